#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "projdyn/polytope.hpp"
#include "projdyn/projective.hpp"

namespace projdyn {

enum class DomainKind { PolytopeV, PolytopeH, Ellipsoid };

std::string_view to_string(DomainKind kind);

/// Properly convex open domain in P(R^d). Polytopes are kept exactly in both
/// vertex and facet form, whichever way they were given; lifts are scaled so
/// that the chart covector is 1 on each vertex, and facet covectors are
/// positive on the interior.
class ConvexDomain {
 public:
  static ConvexDomain polytope_v(const std::vector<VecQ>& vertex_lifts, std::optional<VecQ> chart = std::nullopt);
  static ConvexDomain polytope_h(const std::vector<VecQ>& covectors, std::optional<VecQ> chart = std::nullopt);
  /// {Q(x) > 0} for a symmetric form of signature (1, d-1).
  static ConvexDomain ellipsoid(const MatD& form);

  DomainKind kind() const { return kind_; }
  bool is_polytope() const { return kind_ != DomainKind::Ellipsoid; }
  int dim() const { return dim_; }

  const std::vector<VecQ>& vertices() const { return vertices_; }
  const std::vector<VecQ>& facets() const { return facets_; }
  /// Vertex indices on each facet.
  const std::vector<std::vector<int>>& facet_vertices() const { return facet_vertices_; }
  /// Face lattice over the vertices.
  const FaceLattice& lattice() const { return lattice_; }
  const VecQ& chart() const { return chart_; }
  const VecD& chart_d() const { return chart_d_; }
  const MatD& form() const { return form_; }

  ProjectivePoint<double> interior_point() const;
  /// Representative with chart value 1 (sign chosen on the domain side).
  VecD chart_lift(const ProjectivePoint<double>& x) const;
  /// Smallest constraint value at the chart lift, scaled by the constraint
  /// norm: positive inside, zero on the frontier.
  double margin(const ProjectivePoint<double>& x) const;
  bool contains(const ProjectivePoint<double>& x, double tol = 1e-9) const { return margin(x) > tol; }

 private:
  void finish_polytope();

  DomainKind kind_ = DomainKind::PolytopeV;
  int dim_ = 0;
  std::vector<VecQ> vertices_, facets_;
  std::vector<VecD> vertices_d_, facets_d_;
  std::vector<std::vector<int>> facet_vertices_;
  FaceLattice lattice_;
  VecQ chart_;
  VecD chart_d_;
  MatD form_;
};

/// Frontier points u, v of the line through x and y, in the order u, x, y, v.
std::pair<ProjectivePoint<double>, ProjectivePoint<double>> line_boundary_points(const ConvexDomain& dom,
                                                                                 const ProjectivePoint<double>& x,
                                                                                 const ProjectivePoint<double>& y);
std::pair<ProjectivePoint<Rational>, ProjectivePoint<Rational>> line_boundary_points(
    const ConvexDomain& dom, const ProjectivePoint<Rational>& x, const ProjectivePoint<Rational>& y);

/// d(x, y) = 1/2 log [u, v; x, y].
double hilbert_distance(const ConvexDomain& dom, const ProjectivePoint<double>& x, const ProjectivePoint<double>& y);
/// Exact cross ratio for polytopes, then the logarithm.
double hilbert_distance(const ConvexDomain& dom, const ProjectivePoint<Rational>& x,
                        const ProjectivePoint<Rational>& y);

struct BoundaryFace {
  std::vector<int> active_facets;
  std::vector<int> vertices;  ///< vertices on the face (polytopes)
  int dim = 0;                ///< projective dimension of the face
  Subspace<double> support;
};

BoundaryFace boundary_face(const ConvexDomain& dom, const ProjectivePoint<double>& x, double tol = 1e-9);
BoundaryFace boundary_face(const ConvexDomain& dom, const ProjectivePoint<Rational>& x);

/// Polar dual of a polytope: vertex lifts are the facet covectors.
ConvexDomain dual_domain(const ConvexDomain& dom);

/// Image A * dom.
ConvexDomain transform(const ConvexDomain& dom, const MatQ& a);
ConvexDomain transform(const ConvexDomain& dom, const MatD& a);

/// Proper face (index into the lattice) whose hull is nearest to x in the
/// chart, with the distance. Polytopes only.
std::pair<int, double> nearest_face(const ConvexDomain& dom, const ProjectivePoint<double>& x);

/// True when the vertex sets agree as projective point sets.
bool same_vertex_set(const ConvexDomain& a, const ConvexDomain& b);

struct MetricFacesReport {
  std::vector<int> x_face;  ///< active facets at the limit of x_n
  std::vector<int> y_face;
  bool same_face = false;
  double face_distance = 0.0;  ///< Hilbert distance inside the face
  double bound = 0.0;
  bool pass = false;
};

/// Takes the last terms of x_n and y_n as the limits, snaps them to the
/// frontier with `face_tol`, and checks that they lie in a common face at
/// face distance at most D + tol. Polytopes only.
MetricFacesReport metric_faces_probe(const ConvexDomain& dom, const std::vector<ProjectivePoint<double>>& xs,
                                     const std::vector<ProjectivePoint<double>>& ys, double bound,
                                     double face_tol = 1e-6, double tol = 1e-9);

}  // namespace projdyn
