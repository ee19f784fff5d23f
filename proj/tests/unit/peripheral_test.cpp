#include <gtest/gtest.h>

#include <random>
#include <set>

#include "projdyn/peripheral.hpp"
#include "testutil.hpp"

using namespace projdyn;

namespace {

MatQ diag_q(std::vector<Rational> xs) {
  MatQ m = MatQ::Zero(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = xs[i];
  return m;
}

VecQ unit(int d, int i) {
  VecQ v = VecQ::Zero(d);
  v(i) = 1;
  return v;
}

AbelianRep cusp_rep() {
  return AbelianRep::exact({diag_q({2, Rational(1, 2), 1, 1}), diag_q({1, 2, Rational(1, 2), 1})});
}

std::vector<VecQ> cusp_hints() { return {unit(4, 0), unit(4, 1), unit(4, 2)}; }

struct Fixture : ::testing::Test {
  static void SetUpTestSuite() {
    model = new PeripheralModel(build_model(cusp_rep(), cusp_hints(), Rational(2)));
    pair = new SimplexPair(build_simplices(*model, 2));
  }
  static void TearDownTestSuite() {
    delete pair;
    delete model;
  }
  static PeripheralModel* model;
  static SimplexPair* pair;
};
PeripheralModel* Fixture::model = nullptr;
SimplexPair* Fixture::pair = nullptr;

}  // namespace

TEST(Model, CuspAccepted) {
  PeripheralModel m = build_model(cusp_rep(), cusp_hints(), Rational(2));
  EXPECT_EQ(m.vertex_count(), 3);
  EXPECT_EQ(m.interior_weights.size(), 1u);
  EXPECT_TRUE(m.exact());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_EQ((*m.exact_dual_lifts)[static_cast<std::size_t>(i)].dot((*m.exact_lifts)[static_cast<std::size_t>(j)]), i == j ? 1 : 0);
  // The dual lifts kill the interior weight space.
  for (const auto& w : *m.exact_dual_lifts) EXPECT_EQ(w(3), 0);
}

TEST(Model, InteriorHintIsRejected) {
  EXPECT_THROW(build_model(cusp_rep(), {unit(4, 0), unit(4, 1), unit(4, 3)}, Rational(2)), MathError);
}

TEST(Model, SegmentAccepted) {
  PeripheralModel m = build_model(AbelianRep::exact({diag_q({2, Rational(1, 2)})}), {unit(2, 0), unit(2, 1)});
  EXPECT_EQ(m.vertex_count(), 2);
  EXPECT_EQ(m.polytope.dim(), 1);
}

TEST(Model, NonEigenlineHintIsRejected) {
  VecQ mixed = unit(4, 0) + unit(4, 1);
  EXPECT_THROW(build_model(cusp_rep(), {mixed, unit(4, 1), unit(4, 2)}, Rational(2)), MathError);
}

TEST(Model, NonSimplexIsRejected) {
  // Four weights at the corners of a square.
  AbelianRep sq = AbelianRep::exact({diag_q({2, Rational(1, 2), 1, 1}), diag_q({1, 1, 2, Rational(1, 2)})});
  EXPECT_THROW(build_model(sq, {unit(4, 0), unit(4, 1), unit(4, 2)}), MathError);
}

TEST(Monomials, CountsAndSupport) {
  EXPECT_EQ(boundary_weight_monomials(3, 2).size(), 6u);
  auto m3 = boundary_weight_monomials(3, 3);
  EXPECT_EQ(m3.size(), 9u);
  for (const auto& a : m3) EXPECT_NE(a.exponents, (std::vector<int>{1, 1, 1}));
  auto seg = boundary_weight_monomials(2, 2);
  ASSERT_EQ(seg.size(), 2u);
  EXPECT_EQ(seg[0].exponents, (std::vector<int>{2, 0}));
  EXPECT_EQ(seg[1].exponents, (std::vector<int>{0, 2}));
  EXPECT_EQ(boundary_monomial_count(2, 2), 6);
  EXPECT_EQ(boundary_monomial_count(2, 3), 9);
  EXPECT_EQ(boundary_monomial_count(3, 1), 4);
}

TEST_F(Fixture, CuspSimplexLabels) {
  std::set<std::string> primal(pair->primal_labels.begin(), pair->primal_labels.end());
  std::set<std::string> dual(pair->dual_labels.begin(), pair->dual_labels.end());
  EXPECT_EQ(primal, (std::set<std::string>{"v1^2", "v2^2", "v3^2", "v1v2", "v2v3", "v1v3"}));
  EXPECT_EQ(dual, (std::set<std::string>{"(v1*)^2", "(v2*)^2", "(v3*)^2", "v1*v2*", "v2*v3*", "v1*v3*"}));
}

TEST_F(Fixture, ExactDualityIncidence) {
  const auto& p = *pair->exact_primal;
  const auto& d = *pair->exact_dual;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (i == j) EXPECT_GT(d[j].dot(p[i]), 0);
      else EXPECT_EQ(d[j].dot(p[i]), 0);
    }
}

TEST_F(Fixture, ChartIsOneOnVertices) {
  for (const VecD& v : pair->primal) EXPECT_NEAR(pair->chart.dot(v), 1.0, 1e-12);
}

TEST_F(Fixture, VerticesAreInvariantLines) {
  for (const MatQ& g : pair->sym_rep.exact_generators())
    for (const VecQ& v : *pair->exact_primal) {
      MatQ both(v.size(), 2);
      both << g * v, v;
      EXPECT_EQ(rank(both), 1);
    }
}

TEST(Simplices, DegreeOneReproducesTheHints) {
  PeripheralModel m = build_model(cusp_rep(), cusp_hints(), Rational(2));
  SimplexPair p = build_simplices(m, 1);
  ASSERT_EQ(p.size(), 3);
  for (int i = 0; i < 3; ++i) EXPECT_EQ((*p.exact_primal)[static_cast<std::size_t>(i)], cusp_hints()[static_cast<std::size_t>(i)]);
}

TEST(Simplices, DegreeThreeExcludesTheFullSupportMonomial) {
  PeripheralModel m = build_model(cusp_rep(), cusp_hints(), Rational(2));
  SimplexPair p = build_simplices(m, 3);
  EXPECT_EQ(p.size(), 9);
  for (const auto& l : p.primal_labels) EXPECT_NE(l, "v1v2v3");
}

TEST(Simplices, ConjugatedRandomGroups) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 6; ++t) {
    const int k = 1 + t % 3;
    testutil::SimplexGroup g = testutil::random_simplex_group(k, k + 2, rng);
    std::vector<VecQ> hints;
    for (int v = 0; v <= k; ++v) hints.push_back(g.change.col(v));
    PeripheralModel m = build_model(g.rep, hints, Rational(2));
    SimplexPair p = build_simplices(m, 2);
    EXPECT_EQ(p.size(), boundary_monomial_count(k, 2));
  }
}

TEST_F(Fixture, BoundaryFlagsAreIncident) {
  FlagBoundarySample s = sample_flag_boundary(*pair, 30, 4);
  ASSERT_EQ(s.flags.size(), 30u);
  for (const auto& f : s.flags) {
    EXPECT_TRUE(verify_boundary_flag(*pair, f));
    ASSERT_TRUE(f.exact);
    EXPECT_EQ(pairing(f.exact->hyperplane(), f.exact->point()), 0);
    EXPECT_NE(std::count(f.point_coeffs.begin(), f.point_coeffs.end(), Rational(0)), 0);
    EXPECT_NE(std::count(f.hyperplane_coeffs.begin(), f.hyperplane_coeffs.end(), Rational(0)), 0);
  }
}

TEST_F(Fixture, RegionMembership) {
  AttractionRegion region = attraction_region(*pair);
  // Veronese image of an interior point of the base simplex.
  VecQ y(4);
  y << 1, 2, 3, 5;
  auto inside = region_membership(region, to_double(veronese(ProjectivePoint<Rational>(y), 2)));
  EXPECT_TRUE(inside.member);
  EXPECT_GT(inside.margin, 0.0);
  auto vertex = region_membership(region, ProjectivePoint<double>(pair->primal[0]));
  EXPECT_FALSE(vertex.member);
  // Mixed signs against different walls.
  y << 1, -2, 3, 5;
  EXPECT_FALSE(region_membership(region, to_double(veronese(ProjectivePoint<Rational>(y), 2))).member);
  // Sign normalization: -x is the same projective point.
  VecD neg = -to_double(veronese(ProjectivePoint<Rational>(VecQ((VecQ(4) << 1, 1, 1, 0).finished())), 2)).coords();
  EXPECT_TRUE(region_membership(region, ProjectivePoint<double>(neg)).member);
}

TEST_F(Fixture, SamplesRespectTheMargin) {
  AttractionRegion region = attraction_region(*pair);
  auto pts = sample_region(region, 25, 0.02, 3);
  ASSERT_EQ(pts.size(), 25u);
  for (const VecD& x : pts) {
    Membership m = region_membership(region, ProjectivePoint<double>(x));
    EXPECT_TRUE(m.member);
    EXPECT_GE(m.margin, 0.02 - 1e-12);
  }
}

TEST_F(Fixture, DistancesInTheChart) {
  EXPECT_NEAR(distance_to_boundary(*pair, pair->primal[0]), 0.0, 1e-12);
  VecD mid = 0.5 * (pair->primal[0] + pair->primal[1]);
  EXPECT_NEAR(distance_to_face(*pair, {0, 1}, mid), 0.0, 1e-12);
  VecD bary = VecD::Zero(pair->ambient());
  for (const VecD& v : pair->primal) bary += v / pair->size();
  EXPECT_GT(distance_to_boundary(*pair, bary), 1e-3);
}

TEST_F(Fixture, AttractionBothDirections) {
  AttractionRegion region = attraction_region(*pair);
  AttractionConfig cfg;
  cfg.samples = 20;
  for (const std::vector<long>& dir : {std::vector<long>{2, 1}, std::vector<long>{1, 2}}) {
    AttractionReport r = attraction_experiment(*pair, region, dir, 40, cfg);
    EXPECT_EQ(r.verdict, Verdict::Pass) << r.note;
    EXPECT_TRUE(r.limits_match);
    EXPECT_LE(r.boundary_distance.back(), 1e-6);
  }
}

TEST_F(Fixture, AttractionWithoutStepsIsInconclusive) {
  AttractionReport r = attraction_experiment(*pair, attraction_region(*pair), {2, 1}, 0);
  EXPECT_EQ(r.verdict, Verdict::Inconclusive);
  ASSERT_EQ(r.boundary_distance.size(), 1u);
  EXPECT_GT(r.boundary_distance[0], 0.0);
}

TEST_F(Fixture, ZeroPerturbationIsStill) {
  PerturbationConfig cfg;
  cfg.epsilons = {0.0};
  cfg.t_max = 8;
  PerturbationReport r = perturbation_experiment(*model, *pair, conjugation_family(*pair, 3), cfg);
  ASSERT_EQ(r.steps.size(), 1u);
  EXPECT_TRUE(r.steps[0].error.empty()) << r.steps[0].error;
  EXPECT_LT(r.steps[0].vertex_displacement, 1e-12);
  EXPECT_EQ(r.steps[0].t_min, r.base_t_min);
}

TEST_F(Fixture, ConjugationDisplacementIsLinear) {
  PerturbationConfig cfg;
  cfg.epsilons = {1e-4, 1e-3};
  cfg.t_max = 1;
  PerturbationReport r = perturbation_experiment(*model, *pair, conjugation_family(*pair, 2), cfg);
  ASSERT_TRUE(r.ok);
  EXPECT_TRUE(r.monotone);
  const double ratio = r.steps[1].vertex_displacement / r.steps[0].vertex_displacement;
  EXPECT_NEAR(ratio, 10.0, 0.5);
  for (const auto& s : r.steps) EXPECT_LT(s.weight_displacement, 1e-9);  // conjugation keeps weights
}

TEST_F(Fixture, EigenvalueScalingMovesOneWeight) {
  PerturbationConfig cfg;
  cfg.epsilons = {1e-5, 1e-4};
  cfg.t_max = 1;
  PerturbationReport r = perturbation_experiment(*model, *pair, eigenvalue_scaling_family(*model, 2, 0), cfg);
  ASSERT_TRUE(r.ok);
  // Vertex 0 has eigenvalue 2 under the first generator: log(2 + eps) - log 2
  // in the weights of tau_2 moves by up to twice that (the monomial v1^2).
  for (const auto& s : r.steps) EXPECT_NEAR(s.weight_displacement, 2 * std::log1p(s.epsilon / 2), 1e-9);
  for (const auto& s : r.steps) EXPECT_LT(s.incidence_defect, 1e-9);
}

TEST_F(Fixture, NonCommutingFamilyIsReported) {
  PerturbationFamily bad = custom_family(
      [&](double eps) {
        std::vector<MatD> g = pair->sym_rep.generators();
        g[0](0, 1) += eps;
        g[1](1, 0) += eps;
        return g;
      },
      "shear");
  PerturbationConfig cfg;
  cfg.epsilons = {1e-2};
  cfg.t_max = 1;
  PerturbationReport r = perturbation_experiment(*model, *pair, bad, cfg);
  EXPECT_FALSE(r.ok);
  EXPECT_FALSE(r.steps[0].error.empty());
}
