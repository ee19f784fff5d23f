#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "projdyn/projective.hpp"

namespace projdyn {

/// Exponent vector of a monomial e_1^{a_1} ... e_d^{a_d}.
struct MultiIndex {
  std::vector<int> exponents;
  int degree() const;
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
};

/// a! = prod a_i!
Rational factorial_of(const MultiIndex& a);
/// m! / a!
Rational multinomial(const MultiIndex& a);
std::string monomial_label(const MultiIndex& a, const std::string& letter = "e", bool dual = false);

/// Monomial basis of Sym^m(R^d). All indices have degree m and are ordered by
/// descending lexicographic exponent vector, so for d = 2, m = 2 the order is
/// (e1^2, e1 e2, e2^2). For fixed degree this coincides with graded-lex order.
class SymBasis {
 public:
  SymBasis(int d, int m);
  int ambient() const { return d_; }
  int degree() const { return m_; }
  int dim() const { return static_cast<int>(indices_.size()); }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  const MultiIndex& operator[](int i) const { return indices_[static_cast<std::size_t>(i)]; }
  /// Position of a, or -1.
  int index_of(const MultiIndex& a) const;

 private:
  int d_, m_;
  std::vector<MultiIndex> indices_;
  std::map<std::vector<int>, int> lookup_;
};

/// All exponent vectors of length n summing to m, descending lex order.
std::vector<MultiIndex> compositions(int n, int m);

/// C(d+m-1, m).
std::int64_t sym_dim(int d, int m);
std::int64_t binomial(std::int64_t n, std::int64_t k);

/// Coefficients, in the monomial basis of degree vectors.size(), of the
/// product of the given linear forms. v^m is sym_product({v, ..., v}).
template <class T>
Vec<T> sym_product(const std::vector<Vec<T>>& forms, int d);

/// Matrix of tau_m(g): column a is the expansion of prod_i (g e_i)^{a_i}.
template <class T>
Mat<T> sym_power_matrix(const Mat<T>& g, int m, double tol = NumericConfig{}.tol);

/// Converts polynomial coefficients f_b in the (e*)^b basis to the covector
/// coordinates c_b = f_b * b!/m! acting by the plain dot product. Under this
/// convention <(e*)^b, e^a> = delta_ab a!/m! and (iota* w)(iota v) = w(v)^m.
template <class T>
Vec<T> plain_dual(const Vec<T>& coeffs, const SymBasis& basis);

template <class T>
ProjectivePoint<T> veronese(const ProjectivePoint<T>& v, int m, double tol = NumericConfig{}.tol);
template <class T>
DualPoint<T> dual_veronese(const DualPoint<T>& w, int m, double tol = NumericConfig{}.tol);
template <class T>
Flag<T> flag_veronese(const Flag<T>& f, int m, double tol = NumericConfig{}.tol);

struct DynamicsTransferReport {
  int degree = 0;
  int samples = 0;
  std::vector<double> max_distance;  ///< per sequence term
  /// True when no term exceeds its predecessor by more than tol.
  bool nonincreasing = false;
};

/// Applies tau_m(g_n) to random points of Opp(iota*(w)) kept at least
/// `margin` away from the forbidden hyperplane (normalized pairing) and
/// records the largest distance to iota(x) for every n.
DynamicsTransferReport dynamics_transfer_check(const std::vector<MatD>& g_seq, const DualPoint<double>& w,
                                               const ProjectivePoint<double>& x, int m, int samples,
                                               std::uint64_t seed, double margin = 0.1,
                                               const NumericConfig& cfg = {});

// ---------------------------------------------------------------------------

const SymBasis& cached_sym_basis(int d, int m);

template <class T>
Vec<T> sym_product(const std::vector<Vec<T>>& forms, int d) {
  // Polynomial of degree j stored densely in the degree-j basis.
  Vec<T> poly = Vec<T>::Constant(1, T(1));
  for (std::size_t j = 0; j < forms.size(); ++j) {
    const Vec<T>& f = forms[j];
    if (f.size() != d) throw MathError("sym_product: dimension mismatch");
    const SymBasis& from = cached_sym_basis(d, static_cast<int>(j));
    const SymBasis& to = cached_sym_basis(d, static_cast<int>(j) + 1);
    Vec<T> next = Vec<T>::Zero(to.dim());
    for (int b = 0; b < from.dim(); ++b) {
      if (is_zero(poly(b), 0.0)) continue;
      MultiIndex idx = from[b];
      for (int i = 0; i < d; ++i) {
        if (is_zero(f(i), 0.0)) continue;
        ++idx.exponents[static_cast<std::size_t>(i)];
        next(to.index_of(idx)) += poly(b) * f(i);
        --idx.exponents[static_cast<std::size_t>(i)];
      }
    }
    poly = std::move(next);
  }
  return poly;
}

template <class T>
Mat<T> sym_power_matrix(const Mat<T>& g, int m, double tol) {
  if (g.rows() != g.cols()) throw MathError("sym_power_matrix: square matrix required");
  if (m < 1) throw MathError("sym_power_matrix: degree must be positive");
  if constexpr (std::is_same_v<T, Rational>) {
    if (determinant(g) == 0) throw MathError("sym_power_matrix: matrix is not invertible");
  } else {
    if (!(std::abs(determinant(g)) > 0.0)) throw MathError("sym_power_matrix: matrix is not invertible");
  }
  (void)tol;
  const int d = static_cast<int>(g.rows());
  const SymBasis& basis = cached_sym_basis(d, m);
  Mat<T> out(basis.dim(), basis.dim());
  std::vector<Vec<T>> forms;
  for (int c = 0; c < basis.dim(); ++c) {
    forms.clear();
    for (int i = 0; i < d; ++i)
      for (int r = 0; r < basis[c].exponents[static_cast<std::size_t>(i)]; ++r) forms.push_back(g.col(i));
    out.col(c) = sym_product(forms, d);
  }
  return out;
}

template <class T>
Vec<T> plain_dual(const Vec<T>& coeffs, const SymBasis& basis) {
  if (coeffs.size() != basis.dim()) throw MathError("plain_dual: dimension mismatch");
  Vec<T> out(coeffs.size());
  for (int b = 0; b < basis.dim(); ++b) {
    Rational w = Rational(1) / multinomial(basis[b]);
    if constexpr (std::is_same_v<T, Rational>) {
      out(b) = coeffs(b) * w;
    } else {
      out(b) = coeffs(b) * to_double(w);
    }
  }
  return out;
}

template <class T>
ProjectivePoint<T> veronese(const ProjectivePoint<T>& v, int m, double tol) {
  if (m < 1) throw MathError("veronese: degree must be positive");
  std::vector<Vec<T>> forms(static_cast<std::size_t>(m), v.coords());
  return ProjectivePoint<T>(sym_product(forms, v.dim()), tol);
}

template <class T>
DualPoint<T> dual_veronese(const DualPoint<T>& w, int m, double tol) {
  if (m < 1) throw MathError("dual_veronese: degree must be positive");
  std::vector<Vec<T>> forms(static_cast<std::size_t>(m), w.coords());
  return DualPoint<T>(plain_dual(sym_product(forms, w.dim()), cached_sym_basis(w.dim(), m)), tol);
}

template <class T>
Flag<T> flag_veronese(const Flag<T>& f, int m, double tol) {
  return Flag<T>(veronese(f.point(), m, tol), dual_veronese(f.hyperplane(), m, tol), tol);
}

}  // namespace projdyn
