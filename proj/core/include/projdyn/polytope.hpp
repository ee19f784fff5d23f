#pragma once

#include <set>
#include <vector>

#include "projdyn/linalg.hpp"

namespace projdyn {

/// A facet of a full-dimensional pointed polyhedral cone: an inward normal
/// (nonnegative on every generator) and the generators it vanishes on.
template <class T>
struct ConeFacet {
  Vec<T> normal;
  std::vector<int> incident;
};

/// Facets of the cone spanned by `gens`, which must span T^D.
template <class T>
std::vector<ConeFacet<T>> cone_facets(const std::vector<Vec<T>>& gens, double tol);

/// Face lattice of the convex hull of a finite set of distinct points. Faces
/// are sets of point indices (every input point lying on the face, not only
/// vertices); the polytope itself is the last face.
struct FaceLattice {
  int dim = 0;  ///< affine dimension of the hull
  std::vector<std::vector<int>> faces;
  std::vector<int> face_dims;
  std::vector<int> vertices;  ///< indices of extreme points

  int find(const std::vector<int>& points) const;
  /// Faces of dimension dim - 1 (for a point polytope: none).
  std::vector<int> facets() const;
  std::vector<int> faces_of_dim(int k) const;
  /// True when the point lies on some proper face.
  bool on_boundary(int point) const;
};

template <class T>
FaceLattice face_lattice(const std::vector<Vec<T>>& points, double tol);

/// Nearest point to `query` in the convex hull of the columns of `points`
/// (Wolfe's minimum-norm-point algorithm).
struct HullProjection {
  VecD point;
  VecD weights;  ///< convex weights per column
  double distance = 0.0;
};
HullProjection nearest_point_in_hull(const MatD& points, const VecD& query);

// ---------------------------------------------------------------------------

namespace detail {

template <class T>
int sign_with_scale(const T& v, double tol, double scale) {
  if constexpr (std::is_same_v<T, Rational>) {
    (void)tol;
    (void)scale;
    return v.sign();
  } else {
    return sign_of(v, tol * scale);
  }
}

template <class T>
double norm_of(const Vec<T>& v) {
  if constexpr (std::is_same_v<T, Rational>) {
    return to_double(v).norm();
  } else {
    return v.norm();
  }
}

inline bool next_combination(std::vector<int>& c, int n) {
  const int k = static_cast<int>(c.size());
  for (int i = k - 1; i >= 0; --i) {
    if (c[static_cast<std::size_t>(i)] < n - k + i) {
      ++c[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace detail

template <class T>
std::vector<ConeFacet<T>> cone_facets(const std::vector<Vec<T>>& gens, double tol) {
  std::vector<ConeFacet<T>> out;
  if (gens.empty()) throw MathError("cone_facets: no generators");
  const int dim = static_cast<int>(gens.front().size());
  const int n = static_cast<int>(gens.size());
  Mat<T> all(dim, n);
  for (int i = 0; i < n; ++i) all.col(i) = gens[static_cast<std::size_t>(i)];
  if (rank(all, tol) != dim) throw MathError("cone_facets: generators do not span the ambient space");
  if (dim == 1) {
    // Half-line: the single facet is the apex; a full line is not pointed.
    Vec<T> normal(1);
    normal(0) = T(1);
    int s0 = detail::sign_with_scale(gens[0](0), tol, 1.0);
    for (const auto& g : gens)
      if (detail::sign_with_scale(g(0), tol, 1.0) != s0) throw MathError("cone_facets: cone is not pointed");
    if (s0 < 0) normal(0) = T(-1);
    out.push_back({normal, {}});
    return out;
  }

  std::vector<double> norms(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) norms[static_cast<std::size_t>(i)] = detail::norm_of(gens[static_cast<std::size_t>(i)]);

  std::set<std::vector<int>> seen;
  std::vector<int> combo(static_cast<std::size_t>(dim - 1));
  for (int i = 0; i < dim - 1; ++i) combo[static_cast<std::size_t>(i)] = i;
  if (n < dim - 1) throw MathError("cone_facets: too few generators");
  do {
    bool covered = false;
    for (const auto& f : out) {
      if (std::includes(f.incident.begin(), f.incident.end(), combo.begin(), combo.end())) {
        covered = true;
        break;
      }
    }
    if (covered) continue;
    Mat<T> rows(dim - 1, dim);
    for (int r = 0; r < dim - 1; ++r) rows.row(r) = gens[static_cast<std::size_t>(combo[static_cast<std::size_t>(r)])].transpose();
    Mat<T> ker = nullspace(rows, tol);
    if (ker.cols() != 1) continue;
    Vec<T> normal = ker.col(0);
    double nn = detail::norm_of(normal);
    int pos = 0, neg = 0;
    std::vector<int> incident;
    for (int i = 0; i < n; ++i) {
      T v = normal.dot(gens[static_cast<std::size_t>(i)]);
      int s = detail::sign_with_scale(v, tol, nn * norms[static_cast<std::size_t>(i)]);
      if (s > 0) ++pos;
      if (s < 0) ++neg;
      if (s == 0) incident.push_back(i);
      if (pos > 0 && neg > 0) break;
    }
    if (pos > 0 && neg > 0) continue;
    if (neg > 0) normal = -normal;
    if (seen.insert(incident).second) out.push_back({normal, incident});
  } while (detail::next_combination(combo, n));
  return out;
}

template <class T>
FaceLattice face_lattice(const std::vector<Vec<T>>& points, double tol) {
  FaceLattice out;
  if (points.empty()) throw MathError("face_lattice: no points");
  const int n = static_cast<int>(points.size());
  const int k = static_cast<int>(points.front().size());

  // Coordinates on the affine hull.
  Mat<T> diffs(k, n - 1);
  for (int i = 1; i < n; ++i) diffs.col(i - 1) = points[static_cast<std::size_t>(i)] - points[0];
  std::vector<Vec<T>> local(static_cast<std::size_t>(n));
  int r = 0;
  if constexpr (std::is_same_v<T, Rational>) {
    // Coordinate projection onto pivot coordinates is injective on the hull.
    RowEchelon e = row_echelon(Mat<T>(diffs.transpose()));
    r = static_cast<int>(e.pivots.size());
    for (int i = 0; i < n; ++i) {
      Vec<T> p(r);
      for (int j = 0; j < r; ++j) p(j) = points[static_cast<std::size_t>(i)](e.pivots[static_cast<std::size_t>(j)]);
      local[static_cast<std::size_t>(i)] = p;
    }
  } else {
    MatD basis = n > 1 ? orthonormal_basis(diffs, tol) : MatD(k, 0);
    r = static_cast<int>(basis.cols());
    for (int i = 0; i < n; ++i) local[static_cast<std::size_t>(i)] = basis.transpose() * (points[static_cast<std::size_t>(i)] - points[0]);
  }
  out.dim = r;

  std::vector<int> everything(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) everything[static_cast<std::size_t>(i)] = i;
  if (r == 0) {
    if (n > 1) throw MathError("face_lattice: points must be distinct");
    out.faces = {everything};
    out.face_dims = {0};
    out.vertices = {0};
    return out;
  }

  std::vector<Vec<T>> lifted(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Vec<T> p(r + 1);
    p.head(r) = local[static_cast<std::size_t>(i)];
    p(r) = T(1);
    lifted[static_cast<std::size_t>(i)] = p;
  }
  auto facets = cone_facets(lifted, tol);

  std::set<std::vector<int>> found;
  std::vector<std::vector<int>> queue;
  for (const auto& f : facets) {
    if (f.incident.empty()) continue;
    if (found.insert(f.incident).second) queue.push_back(f.incident);
  }
  for (std::size_t q = 0; q < queue.size(); ++q) {
    for (const auto& f : facets) {
      std::vector<int> meet;
      std::set_intersection(queue[q].begin(), queue[q].end(), f.incident.begin(), f.incident.end(),
                            std::back_inserter(meet));
      if (!meet.empty() && found.insert(meet).second) queue.push_back(meet);
    }
  }

  auto face_dim = [&](const std::vector<int>& set) {
    Mat<T> m(r + 1, static_cast<Eigen::Index>(set.size()));
    for (std::size_t j = 0; j < set.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = lifted[static_cast<std::size_t>(set[j])];
    return rank(m, tol) - 1;
  };
  std::vector<std::pair<int, std::vector<int>>> sorted;
  for (const auto& s : found) sorted.emplace_back(face_dim(s), s);
  std::sort(sorted.begin(), sorted.end());
  for (auto& [dim, set] : sorted) {
    if (dim == 0 && set.size() != 1) throw MathError("face_lattice: points must be distinct");
    out.faces.push_back(set);
    out.face_dims.push_back(dim);
    if (dim == 0) out.vertices.push_back(set.front());
  }
  out.faces.push_back(everything);
  out.face_dims.push_back(r);
  std::sort(out.vertices.begin(), out.vertices.end());
  return out;
}

}  // namespace projdyn
