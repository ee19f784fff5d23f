#include "projdyn/linalg.hpp"

#include <Eigen/SVD>
#include <algorithm>

namespace projdyn {

MatD to_double(const MatQ& a) {
  MatD out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out(i, j) = a(i, j).convert_to<double>();
  return out;
}

VecD to_double(const VecQ& v) {
  VecD out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = v(i).convert_to<double>();
  return out;
}

MatQ to_rational(const MatD& a) {
  MatQ out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (!std::isfinite(a(i, j))) throw MathError("non-finite matrix entry");
      out(i, j) = Rational(a(i, j));
    }
  return out;
}

VecQ to_rational(const VecD& v) {
  VecQ out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v(i))) throw MathError("non-finite vector entry");
    out(i) = Rational(v(i));
  }
  return out;
}

RowEchelon row_echelon(const MatQ& a) {
  RowEchelon out{a, {}};
  MatQ& m = out.reduced;
  const Eigen::Index rows = m.rows(), cols = m.cols();
  Eigen::Index r = 0;
  for (Eigen::Index c = 0; c < cols && r < rows; ++c) {
    Eigen::Index piv = -1;
    for (Eigen::Index i = r; i < rows; ++i)
      if (m(i, c) != 0) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    if (piv != r) m.row(piv).swap(m.row(r));
    Rational inv = Rational(1) / m(r, c);
    for (Eigen::Index j = c; j < cols; ++j) m(r, j) *= inv;
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (i == r || m(i, c) == 0) continue;
      Rational f = m(i, c);
      for (Eigen::Index j = c; j < cols; ++j) m(i, j) -= f * m(r, j);
    }
    out.pivots.push_back(static_cast<int>(c));
    ++r;
  }
  return out;
}

int rank(const MatQ& a, double) { return static_cast<int>(row_echelon(a).pivots.size()); }

MatQ nullspace(const MatQ& a, double) {
  RowEchelon e = row_echelon(a);
  const int cols = static_cast<int>(a.cols());
  std::vector<bool> is_pivot(cols, false);
  for (int p : e.pivots) is_pivot[p] = true;
  std::vector<int> free_cols;
  for (int c = 0; c < cols; ++c)
    if (!is_pivot[c]) free_cols.push_back(c);
  MatQ basis = MatQ::Zero(cols, static_cast<Eigen::Index>(free_cols.size()));
  for (std::size_t k = 0; k < free_cols.size(); ++k) {
    int f = free_cols[k];
    basis(f, static_cast<Eigen::Index>(k)) = 1;
    for (std::size_t r = 0; r < e.pivots.size(); ++r)
      basis(e.pivots[r], static_cast<Eigen::Index>(k)) = -e.reduced(static_cast<Eigen::Index>(r), f);
  }
  return basis;
}

std::vector<int> independent_columns(const MatQ& a, double) { return row_echelon(a).pivots; }

MatQ inverse(const MatQ& a) {
  if (a.rows() != a.cols()) throw MathError("inverse of a non-square matrix");
  const Eigen::Index n = a.rows();
  MatQ aug(n, 2 * n);
  aug << a, MatQ::Identity(n, n);
  RowEchelon e = row_echelon(aug);
  if (static_cast<Eigen::Index>(e.pivots.size()) < n || e.pivots[static_cast<std::size_t>(n - 1)] >= n)
    throw MathError("matrix is singular");
  return e.reduced.rightCols(n);
}

Rational determinant(const MatQ& a) {
  if (a.rows() != a.cols()) throw MathError("determinant of a non-square matrix");
  MatQ m = a;
  const Eigen::Index n = m.rows();
  Rational det = 1;
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = -1;
    for (Eigen::Index i = c; i < n; ++i)
      if (m(i, c) != 0) {
        piv = i;
        break;
      }
    if (piv < 0) return Rational(0);
    if (piv != c) {
      m.row(piv).swap(m.row(c));
      det = -det;
    }
    det *= m(c, c);
    for (Eigen::Index i = c + 1; i < n; ++i) {
      if (m(i, c) == 0) continue;
      Rational f = m(i, c) / m(c, c);
      for (Eigen::Index j = c; j < n; ++j) m(i, j) -= f * m(c, j);
    }
  }
  return det;
}

MatQ solve_exact(const MatQ& a, const MatQ& b) {
  if (a.rows() != b.rows()) throw MathError("solve: row mismatch");
  MatQ aug(a.rows(), a.cols() + b.cols());
  aug << a, b;
  RowEchelon e = row_echelon(aug);
  const Eigen::Index n = a.cols();
  if (static_cast<Eigen::Index>(e.pivots.size()) < n) throw MathError("solve: not full column rank");
  for (std::size_t r = 0; r < e.pivots.size(); ++r) {
    if (e.pivots[r] >= n) throw MathError("solve: inconsistent system");
    if (e.pivots[r] != static_cast<int>(r)) throw MathError("solve: not full column rank");
  }
  return e.reduced.topRightCorner(n, b.cols());
}

namespace {

double svd_threshold(const Eigen::JacobiSVD<MatD>& svd, double tol, Eigen::Index rows,
                     Eigen::Index cols) {
  double top = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  return tol * std::max<double>(1.0, top) * static_cast<double>(std::max(rows, cols));
}

}  // namespace

int rank(const MatD& a, double tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<MatD> svd(a);
  double thr = svd_threshold(svd, tol, a.rows(), a.cols());
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > thr) ++r;
  return r;
}

MatD nullspace(const MatD& a, double tol) {
  const Eigen::Index n = a.cols();
  if (a.rows() == 0) return MatD::Identity(n, n);
  Eigen::JacobiSVD<MatD> svd(a, Eigen::ComputeFullV);
  double thr = svd_threshold(svd, tol, a.rows(), a.cols());
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > thr) ++r;
  return svd.matrixV().rightCols(n - r);
}

std::vector<int> independent_columns(const MatD& a, double tol) {
  std::vector<int> chosen;
  MatD picked(a.rows(), 0);
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    MatD trial(a.rows(), picked.cols() + 1);
    trial << picked, a.col(c);
    if (rank(trial, tol) > picked.cols()) {
      picked = trial;
      chosen.push_back(static_cast<int>(c));
    }
  }
  return chosen;
}

MatD orthonormal_basis(const MatD& a, double tol) {
  if (a.cols() == 0) return MatD(a.rows(), 0);
  Eigen::JacobiSVD<MatD> svd(a, Eigen::ComputeThinU);
  double thr = svd_threshold(svd, tol, a.rows(), a.cols());
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > thr) ++r;
  return svd.matrixU().leftCols(r);
}

MatC orthonormal_basis(const MatC& a, double tol) {
  if (a.cols() == 0) return MatC(a.rows(), 0);
  Eigen::JacobiSVD<MatC> svd(a, Eigen::ComputeThinU);
  double top = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  double thr = tol * std::max(1.0, top) * static_cast<double>(std::max(a.rows(), a.cols()));
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > thr) ++r;
  return svd.matrixU().leftCols(r);
}

MatD inverse(const MatD& a) {
  if (a.rows() != a.cols()) throw MathError("inverse of a non-square matrix");
  // Only exact zero pivots count as singular: long products are legitimately
  // badly scaled and the default relative threshold would reject them.
  Eigen::FullPivLU<MatD> lu(a);
  lu.setThreshold(0.0);
  if (!lu.isInvertible()) throw MathError("matrix is singular");
  return lu.inverse();
}

double determinant(const MatD& a) {
  if (a.rows() != a.cols()) throw MathError("determinant of a non-square matrix");
  return a.determinant();
}

bool is_zero_matrix(const MatQ& a, double) {
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (a(i, j) != 0) return false;
  return true;
}

bool is_zero_matrix(const MatD& a, double tol) {
  return a.size() == 0 || a.cwiseAbs().maxCoeff() <= tol;
}

double scale_of(const MatD& a) {
  if (a.size() == 0) return 1.0;
  return std::max(1.0, a.cwiseAbs().maxCoeff());
}

}  // namespace projdyn
