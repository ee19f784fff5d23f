#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "projdyn/linalg.hpp"

namespace projdyn {

struct PointTag {};
struct CovectorTag {};

/// A nonzero vector up to nonzero scaling, stored by a normalized
/// representative: exact mode has first nonzero coordinate 1, float mode has
/// unit Euclidean norm with first nonzero coordinate positive.
template <class T, class Tag>
class Homogeneous {
 public:
  Homogeneous() = default;
  explicit Homogeneous(Vec<T> coords, double tol = NumericConfig{}.tol) : coords_(std::move(coords)) {
    normalize(tol);
  }

  int dim() const { return static_cast<int>(coords_.size()); }
  const Vec<T>& coords() const { return coords_; }
  const T& operator[](int i) const { return coords_(i); }

  friend bool operator==(const Homogeneous& a, const Homogeneous& b) {
    return a.coords_.size() == b.coords_.size() && a.coords_ == b.coords_;
  }

 private:
  void normalize(double tol);
  Vec<T> coords_;
};

template <class T>
using ProjectivePoint = Homogeneous<T, PointTag>;
template <class T>
using DualPoint = Homogeneous<T, CovectorTag>;

template <class T, class Tag>
void Homogeneous<T, Tag>::normalize(double tol) {
  if (coords_.size() == 0) throw MathError("projective point of dimension zero");
  if constexpr (std::is_same_v<T, Rational>) {
    Eigen::Index first = -1;
    for (Eigen::Index i = 0; i < coords_.size(); ++i)
      if (coords_(i) != 0) {
        first = i;
        break;
      }
    if (first < 0) throw MathError("zero vector has no projective class");
    if (coords_(first) != 1) {
      Rational inv = Rational(1) / coords_(first);
      for (Eigen::Index i = 0; i < coords_.size(); ++i) coords_(i) *= inv;
    }
  } else {
    for (Eigen::Index i = 0; i < coords_.size(); ++i)
      if (!std::isfinite(coords_(i))) throw MathError("non-finite projective coordinate");
    double n = coords_.norm();
    if (n == 0.0) throw MathError("zero vector has no projective class");
    if (std::abs(n - 1.0) > 4e-16) coords_ /= n;
    for (Eigen::Index i = 0; i < coords_.size(); ++i) {
      if (std::abs(coords_(i)) > tol) {
        if (coords_(i) < 0) coords_ = -coords_;
        break;
      }
    }
  }
}

/// Linear subspace of T^dim given by linearly independent basis columns.
template <class T>
class Subspace {
 public:
  Subspace() = default;
  /// Requires independent columns.
  Subspace(Mat<T> basis, double tol = NumericConfig{}.tol);
  /// Span of arbitrary columns (a maximal independent subset is kept).
  static Subspace span(const Mat<T>& columns, double tol = NumericConfig{}.tol);
  static Subspace zero(int ambient) {
    Subspace s;
    s.basis_ = Mat<T>(ambient, 0);
    return s;
  }

  int ambient() const { return static_cast<int>(basis_.rows()); }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Mat<T>& basis() const { return basis_; }

 private:
  Mat<T> basis_;
};

template <class T>
Subspace<T>::Subspace(Mat<T> basis, double tol) : basis_(std::move(basis)) {
  if (rank(basis_, tol) != basis_.cols()) throw MathError("subspace basis is linearly dependent");
}

template <class T>
Subspace<T> Subspace<T>::span(const Mat<T>& columns, double tol) {
  std::vector<int> keep = independent_columns(columns, tol);
  Mat<T> b(columns.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) b.col(static_cast<Eigen::Index>(i)) = columns.col(keep[i]);
  Subspace s;
  s.basis_ = std::move(b);
  return s;
}

/// Incident (point, hyperplane) pair: pairing(hyperplane, point) = 0.
template <class T>
class Flag {
 public:
  Flag(ProjectivePoint<T> point, DualPoint<T> hyperplane, double tol = NumericConfig{}.tol);
  const ProjectivePoint<T>& point() const { return point_; }
  const DualPoint<T>& hyperplane() const { return hyperplane_; }
  int dim() const { return point_.dim(); }

 private:
  ProjectivePoint<T> point_;
  DualPoint<T> hyperplane_;
};

template <class T>
T pairing(const DualPoint<T>& w, const ProjectivePoint<T>& v) {
  if (w.dim() != v.dim()) throw MathError("pairing: dimension mismatch");
  return w.coords().dot(v.coords());
}

template <class T>
Flag<T>::Flag(ProjectivePoint<T> point, DualPoint<T> hyperplane, double tol)
    : point_(std::move(point)), hyperplane_(std::move(hyperplane)) {
  if (!is_zero(pairing(hyperplane_, point_), tol)) throw MathError("flag is not incident");
}

/// Both lines avoid the other flag's hyperplane.
template <class T>
bool transverse(const Flag<T>& a, const Flag<T>& b, double tol = NumericConfig{}.tol) {
  if (a.dim() != b.dim()) throw MathError("transverse: dimension mismatch");
  return !is_zero(pairing(a.hyperplane(), b.point()), tol) &&
         !is_zero(pairing(b.hyperplane(), a.point()), tol);
}

template <class T>
ProjectivePoint<T> act(const Mat<T>& g, const ProjectivePoint<T>& p, double tol = NumericConfig{}.tol) {
  if (g.cols() != p.dim()) throw MathError("act: dimension mismatch");
  return ProjectivePoint<T>(g * p.coords(), tol);
}

/// Contragredient action g^{-T}.
template <class T>
DualPoint<T> act_dual(const Mat<T>& g, const DualPoint<T>& w, double tol = NumericConfig{}.tol) {
  if (g.cols() != w.dim()) throw MathError("act_dual: dimension mismatch");
  Mat<T> inv = inverse(g);
  return DualPoint<T>(inv.transpose() * w.coords(), tol);
}

template <class T>
Flag<T> act(const Mat<T>& g, const Flag<T>& f, double tol = NumericConfig{}.tol) {
  return Flag<T>(act(g, f.point(), tol), act_dual(g, f.hyperplane(), tol), tol);
}

inline ProjectivePoint<double> to_double(const ProjectivePoint<Rational>& p) {
  return ProjectivePoint<double>(to_double(p.coords()));
}
inline DualPoint<double> to_double(const DualPoint<Rational>& p) {
  return DualPoint<double>(to_double(p.coords()));
}
inline const ProjectivePoint<double>& to_double(const ProjectivePoint<double>& p) { return p; }
Subspace<double> to_double(const Subspace<Rational>& s);
inline const Subspace<double>& to_double(const Subspace<double>& s) { return s; }

Subspace<double> line_of(const ProjectivePoint<double>& p);
/// Kernel of the covector.
Subspace<double> hyperplane_of(const DualPoint<double>& w);

/// Sines of the principal angles between a and b (min(dim a, dim b) values,
/// ascending).
std::vector<double> principal_angle_sines(const Subspace<double>& a, const Subspace<double>& b);

/// d_P: sine of the smallest principal angle; for two lines, the sine of the
/// angle between them; for a line and a subspace, the distance from the line
/// to the subspace.
double proj_distance(const Subspace<double>& a, const Subspace<double>& b);
double proj_distance(const ProjectivePoint<double>& a, const ProjectivePoint<double>& b);
double proj_distance(const ProjectivePoint<double>& a, const Subspace<double>& b);

/// Sine of the largest principal angle from a into b: zero iff a lies in b.
/// For equal dimensions this is the usual gap metric on the Grassmannian.
double containment_distance(const Subspace<double>& a, const Subspace<double>& b);
/// Gap metric between subspaces of equal dimension.
double subspace_gap(const Subspace<double>& a, const Subspace<double>& b);

/// [a,b;c,d] = ((d-a)(c-b)) / ((c-a)(d-b)) in any affine coordinate of the
/// common projective line. Exact for rational inputs.
template <class T>
T cross_ratio(const ProjectivePoint<T>& a, const ProjectivePoint<T>& b, const ProjectivePoint<T>& c,
              const ProjectivePoint<T>& d, double tol = NumericConfig{}.tol);

struct SvdProfile {
  VecD sigma;  ///< nonincreasing
  MatD u;      ///< left singular vectors (columns)
  MatD v;      ///< right singular vectors (columns)
  bool approximate = false;  ///< set when the input was exact and converted
  /// Span of the first k left singular vectors.
  Subspace<double> top_left(int k) const;
  /// Span of the last k right singular vectors.
  Subspace<double> bottom_right(int k) const;
  double gap(int k) const { return sigma(k - 1) / sigma(k); }
};

SvdProfile svd_profile(const MatD& g);
SvdProfile svd_profile(const MatQ& g);

/// (||g||, m(g)) with m(g) = ||g^{-1}||^{-1}.
std::pair<double, double> operator_norm_and_conorm(const MatD& g);

// ---------------------------------------------------------------------------

template <class T>
T cross_ratio(const ProjectivePoint<T>& a, const ProjectivePoint<T>& b, const ProjectivePoint<T>& c,
              const ProjectivePoint<T>& d, double tol) {
  const int n = a.dim();
  if (b.dim() != n || c.dim() != n || d.dim() != n) throw MathError("cross_ratio: dimension mismatch");
  Mat<T> pts(n, 4);
  pts.col(0) = a.coords();
  pts.col(1) = b.coords();
  pts.col(2) = c.coords();
  pts.col(3) = d.coords();
  std::vector<int> cols = independent_columns(pts, tol);
  if (cols.size() > 2) throw MathError("cross_ratio: points are not collinear");
  if (cols.size() < 2) throw MathError("cross_ratio: all four points coincide");
  Mat<T> basis(n, 2);
  basis.col(0) = pts.col(cols[0]);
  basis.col(1) = pts.col(cols[1]);
  Mat<T> coords;
  if constexpr (std::is_same_v<T, Rational>) {
    coords = solve_exact(basis, pts);
  } else {
    coords = basis.colPivHouseholderQr().solve(pts);
  }
  auto det2 = [&](int p, int q) { return T(coords(0, p) * coords(1, q) - coords(1, p) * coords(0, q)); };
  T num = det2(3, 0) * det2(2, 1);
  T den = det2(2, 0) * det2(3, 1);
  if constexpr (std::is_same_v<T, Rational>) {
    if (den == 0) throw MathError("cross_ratio: degenerate configuration");
  } else {
    double scale = std::max(1.0, coords.cwiseAbs().maxCoeff());
    if (std::abs(den) <= tol * scale * scale * scale * scale)
      throw MathError("cross_ratio: degenerate configuration");
  }
  return num / den;
}

}  // namespace projdyn
