#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "projdyn/scalar.hpp"

namespace projdyn {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using MatQ = Mat<Rational>;
using VecQ = Vec<Rational>;
using MatD = Eigen::MatrixXd;
using VecD = Eigen::VectorXd;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;

MatD to_double(const MatQ& a);
VecD to_double(const VecQ& v);
inline const MatD& to_double(const MatD& a) { return a; }
inline const VecD& to_double(const VecD& v) { return v; }

/// Exact rational image of a double matrix (every finite double is rational).
MatQ to_rational(const MatD& a);
VecQ to_rational(const VecD& v);

// Exact routines. The tolerance argument is accepted for signature parity
// with the float overloads and ignored.

struct RowEchelon {
  MatQ reduced;             ///< reduced row echelon form
  std::vector<int> pivots;  ///< pivot column per nonzero row
};
RowEchelon row_echelon(const MatQ& a);

int rank(const MatQ& a, double tol = 0.0);
/// Columns form a basis of ker(a).
MatQ nullspace(const MatQ& a, double tol = 0.0);
/// Indices of a maximal set of linearly independent columns (first-come).
std::vector<int> independent_columns(const MatQ& a, double tol = 0.0);
MatQ inverse(const MatQ& a);
Rational determinant(const MatQ& a);
/// Solves a * x = b for a of full column rank and a consistent system.
MatQ solve_exact(const MatQ& a, const MatQ& b);

// Float routines (SVD based, relative tolerance).

int rank(const MatD& a, double tol);
MatD nullspace(const MatD& a, double tol);
std::vector<int> independent_columns(const MatD& a, double tol);
/// Orthonormal basis of the column space.
MatD orthonormal_basis(const MatD& a, double tol);
MatC orthonormal_basis(const MatC& a, double tol);
MatD inverse(const MatD& a);
double determinant(const MatD& a);

bool is_zero_matrix(const MatQ& a, double tol = 0.0);
bool is_zero_matrix(const MatD& a, double tol);

/// Entrywise max-abs scale, at least 1.
double scale_of(const MatD& a);

template <class T>
Mat<T> identity(int n) {
  return Mat<T>::Identity(n, n);
}

/// a^n by repeated squaring; negative n uses the inverse.
template <class T>
Mat<T> mat_pow(const Mat<T>& a, long n) {
  if (n < 0) return mat_pow<T>(inverse(a), -n);
  Mat<T> result = identity<T>(static_cast<int>(a.rows()));
  Mat<T> base = a;
  unsigned long e = static_cast<unsigned long>(n);
  while (e > 0) {
    if (e & 1UL) result = (result * base).eval();
    e >>= 1;
    if (e) base = (base * base).eval();
  }
  return result;
}

}  // namespace projdyn
