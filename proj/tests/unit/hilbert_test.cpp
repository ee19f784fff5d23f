#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "projdyn/hilbert.hpp"
#include "testutil.hpp"

using namespace projdyn;

namespace {

VecQ vq(std::initializer_list<Rational> xs) {
  VecQ v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (const auto& x : xs) v(i++) = x;
  return v;
}

VecD vd(std::initializer_list<double> xs) {
  VecD v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

ConvexDomain interval() { return ConvexDomain::polytope_v({vq({-1, 1}), vq({1, 1})}); }

ConvexDomain square() {
  return ConvexDomain::polytope_v({vq({1, 1, 1}), vq({-1, 1, 1}), vq({-1, -1, 1}), vq({1, -1, 1})});
}

ConvexDomain disk() {
  MatD q = MatD::Identity(3, 3);
  q(0, 0) = q(1, 1) = -1;
  return ConvexDomain::ellipsoid(q);
}

ConvexDomain triangle() { return ConvexDomain::polytope_v({vq({1, 0, 0}), vq({0, 1, 0}), vq({0, 0, 1})}); }

// Affine chart coordinate along the first axis.
double affine_x(const ProjectivePoint<double>& p) { return p[0] / p[p.dim() - 1]; }

}  // namespace

TEST(Domain, SquareFacetsAndVertices) {
  ConvexDomain s = square();
  EXPECT_EQ(s.vertices().size(), 4u);
  EXPECT_EQ(s.facets().size(), 4u);
  for (const auto& fv : s.facet_vertices()) EXPECT_EQ(fv.size(), 2u);
  EXPECT_TRUE(s.contains(ProjectivePoint<double>(vd({0, 0, 1}))));
  EXPECT_FALSE(s.contains(ProjectivePoint<double>(vd({2, 0, 1}))));
}

TEST(Domain, HalfSpaceFormMatchesVertexForm) {
  std::vector<VecQ> facets{vq({-1, 0, 1}), vq({1, 0, 1}), vq({0, -1, 1}), vq({0, 1, 1})};
  ConvexDomain h = ConvexDomain::polytope_h(facets);
  EXPECT_EQ(h.kind(), DomainKind::PolytopeH);
  EXPECT_TRUE(same_vertex_set(h, square()));
}

TEST(Domain, RejectsBadInput) {
  EXPECT_THROW(ConvexDomain::polytope_v({vq({1, 0, 1}), vq({0, 1, 1})}), MathError);
  EXPECT_THROW(ConvexDomain::ellipsoid(MatD::Identity(3, 3)), MathError);
}

TEST(Chords, Endpoints) {
  auto [u, v] = line_boundary_points(interval(), ProjectivePoint<double>(vd({0, 1})), ProjectivePoint<double>(vd({0.5, 1})));
  EXPECT_NEAR(affine_x(u), -1, 1e-14);
  EXPECT_NEAR(affine_x(v), 1, 1e-14);
  auto [su, sv] = line_boundary_points(square(), ProjectivePoint<double>(vd({0, 0, 1})), ProjectivePoint<double>(vd({0.5, 0, 1})));
  EXPECT_NEAR(affine_x(su), -1, 1e-14);
  EXPECT_NEAR(affine_x(sv), 1, 1e-14);
  auto [eu, ev] = line_boundary_points(disk(), ProjectivePoint<double>(vd({0, 0, 1})), ProjectivePoint<double>(vd({0.6, 0, 1})));
  EXPECT_NEAR(affine_x(eu), -1, 1e-14);
  EXPECT_NEAR(affine_x(ev), 1, 1e-14);
  auto [qu, qv] = line_boundary_points(interval(), ProjectivePoint<Rational>(vq({0, 1})), ProjectivePoint<Rational>(vq({Rational(1, 2), 1})));
  EXPECT_EQ(qu, ProjectivePoint<Rational>(vq({-1, 1})));
  EXPECT_EQ(qv, ProjectivePoint<Rational>(vq({1, 1})));
}

TEST(Distance, IntervalHalf) {
  double exact = hilbert_distance(interval(), ProjectivePoint<Rational>(vq({0, 1})), ProjectivePoint<Rational>(vq({Rational(1, 2), 1})));
  EXPECT_NEAR(exact, 0.5 * std::log(3.0), 1e-15);
  double flt = hilbert_distance(interval(), ProjectivePoint<double>(vd({0, 1})), ProjectivePoint<double>(vd({0.5, 1})));
  EXPECT_NEAR(flt, 0.5 * std::log(3.0), 1e-14);
  EXPECT_EQ(hilbert_distance(interval(), ProjectivePoint<Rational>(vq({0, 1})), ProjectivePoint<Rational>(vq({0, 1}))), 0.0);
}

TEST(Distance, EllipsoidChordIsArtanh) {
  for (double t : {0.1, 0.5, 0.9, 0.999})
    EXPECT_NEAR(hilbert_distance(disk(), ProjectivePoint<double>(vd({0, 0, 1})), ProjectivePoint<double>(vd({t, 0, 1}))),
                std::atanh(t), 1e-12);
}

TEST(Distance, OutsidePointsAreRejected) {
  EXPECT_THROW(hilbert_distance(interval(), ProjectivePoint<double>(vd({0, 1})), ProjectivePoint<double>(vd({2, 1}))),
               MathError);
}

TEST(Distance, MetricAxiomsOnRandomPolytopes) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 5; ++t) {
    ConvexDomain p = testutil::random_polytope(3, rng);
    for (int s = 0; s < 100; ++s) {
      auto x = testutil::random_interior(p, rng), y = testutil::random_interior(p, rng), z = testutil::random_interior(p, rng);
      double xy = hilbert_distance(p, x, y);
      EXPECT_NEAR(xy, hilbert_distance(p, y, x), 1e-9);
      EXPECT_LE(hilbert_distance(p, x, z), xy + hilbert_distance(p, y, z) + 1e-9);
      EXPECT_GE(xy, 0.0);
    }
  }
}

TEST(Distance, ProjectiveInvariance) {
  std::mt19937_64 rng(5);
  ConvexDomain dom = square();
  MatQ a = testutil::random_rational_matrix(3, rng);
  ConvexDomain moved = transform(dom, a);
  for (int s = 0; s < 50; ++s) {
    auto x = testutil::random_interior(dom, rng), y = testutil::random_interior(dom, rng);
    MatD ad = to_double(a);
    EXPECT_NEAR(hilbert_distance(moved, act(ad, x), act(ad, y)), hilbert_distance(dom, x, y), 1e-9);
  }
}

TEST(Faces, Square) {
  BoundaryFace edge = boundary_face(square(), ProjectivePoint<Rational>(vq({1, Rational(3, 10), 1})));
  EXPECT_EQ(edge.dim, 1);
  EXPECT_EQ(edge.active_facets.size(), 1u);
  EXPECT_EQ(edge.vertices.size(), 2u);
  EXPECT_EQ(edge.support.dim(), 2);
  BoundaryFace corner = boundary_face(square(), ProjectivePoint<Rational>(vq({1, 1, 1})));
  EXPECT_EQ(corner.dim, 0);
  EXPECT_EQ(corner.vertices.size(), 1u);
}

TEST(Faces, TriangleEdge) {
  BoundaryFace f = boundary_face(triangle(), ProjectivePoint<double>(vd({1, 2, 0})));
  EXPECT_EQ(f.vertices, (std::vector<int>{0, 1}));
}

TEST(Duality, SimplexIsSelfDual) {
  ConvexDomain d = dual_domain(triangle());
  EXPECT_TRUE(same_vertex_set(d, triangle()));
}

TEST(Duality, SquareDualIsCrossPolytope) {
  ConvexDomain d = dual_domain(square());
  ConvexDomain cross = ConvexDomain::polytope_v({vq({1, 0, 1}), vq({-1, 0, 1}), vq({0, 1, 1}), vq({0, -1, 1})});
  EXPECT_TRUE(same_vertex_set(d, cross));
}

TEST(Duality, Reflexive) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 10; ++t) {
    ConvexDomain p = testutil::random_polytope(2 + t % 3, rng);
    EXPECT_TRUE(same_vertex_set(dual_domain(dual_domain(p)), p));
  }
}

TEST(NearestFace, PointNearAnEdge) {
  auto [face, dist] = nearest_face(square(), ProjectivePoint<double>(vd({0.95, 0.1, 1})));
  EXPECT_NEAR(dist, 0.05, 1e-12);
  EXPECT_EQ(square().lattice().face_dims[static_cast<std::size_t>(face)], 1);
}

// Sequences stop at 2^-30 from the frontier; closer points are treated as
// numerically on it.
TEST(MetricFaces, SquareEdgeWithShiftedCompanion) {
  ConvexDomain s = square();
  std::vector<ProjectivePoint<double>> xs, ys;
  for (int n = 1; n <= 30; ++n) {
    double x = 1 - std::pow(2.0, -n);
    xs.emplace_back(vd({x, 0, 1}));
    ys.emplace_back(vd({x, 0.2, 1}));
  }
  double bound = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) bound = std::max(bound, hilbert_distance(s, xs[i], ys[i]));
  MetricFacesReport r = metric_faces_probe(s, xs, ys, bound);
  EXPECT_TRUE(r.same_face);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.face_distance, bound + 1e-9);
}

TEST(MetricFaces, ZeroBound) {
  ConvexDomain s = square();
  std::vector<ProjectivePoint<double>> xs;
  for (int n = 1; n <= 30; ++n) xs.emplace_back(vd({1 - std::pow(2.0, -n), 0.5, 1}));
  MetricFacesReport r = metric_faces_probe(s, xs, xs, 0.0);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.face_distance, 0.0, 1e-9);
}

TEST(MetricFaces, TriangleVertex) {
  ConvexDomain t = triangle();
  std::vector<ProjectivePoint<double>> xs, ys;
  for (int n = 1; n <= 30; ++n) {
    double e = std::pow(2.0, -n);
    xs.emplace_back(vd({1, e, e}));
    ys.emplace_back(vd({1, 2 * e, e}));
  }
  MetricFacesReport r = metric_faces_probe(t, xs, ys, 1.0);
  EXPECT_TRUE(r.same_face);
  EXPECT_EQ(r.x_face, r.y_face);
  EXPECT_TRUE(r.pass);
}
