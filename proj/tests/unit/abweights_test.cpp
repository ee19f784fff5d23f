#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "projdyn/abweights.hpp"
#include "testutil.hpp"

using namespace projdyn;

namespace {

MatQ diag_q(std::vector<Rational> xs) {
  MatQ m = MatQ::Zero(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = xs[i];
  return m;
}

AbelianRep cusp_rep() {
  return AbelianRep::exact({diag_q({2, Rational(1, 2), 1, 1}), diag_q({1, 2, Rational(1, 2), 1})});
}

// Index of the real weight whose exponent vector is e.
int weight_with(const WeightSystem& ws, std::vector<int> e) {
  for (std::size_t r = 0; r < ws.real_weights.size(); ++r) {
    const auto& x = ws.real_weights[r].exponents;
    if (!x || x->size() != static_cast<Eigen::Index>(e.size())) continue;
    bool same = true;
    for (std::size_t i = 0; i < e.size(); ++i) same = same && (*x)(static_cast<Eigen::Index>(i)) == e[i];
    if (same) return static_cast<int>(r);
  }
  return -1;
}

}  // namespace

TEST(AbelianRep, RejectsNonCommutingGenerators) {
  MatQ a(2, 2), b(2, 2);
  a << 1, 1, 0, 1;
  b << 1, 0, 1, 1;
  EXPECT_THROW(AbelianRep::exact({a, b}), MathError);
}

TEST(AbelianRep, ElementsAreProductsOfPowers) {
  AbelianRep rep = cusp_rep();
  EXPECT_EQ(rep.element_exact({2, 1}), diag_q({4, Rational(1, 2), Rational(1, 2), 1}));
  EXPECT_EQ(rep.element_exact({1, 2}), diag_q({2, 2, Rational(1, 4), 1}));
  EXPECT_LE((rep.element({-1, 3}) - to_double(rep.element_exact({-1, 3}))).norm(), 1e-12);
}

TEST(Decompose, DiagonalWeights) {
  WeightSystem ws = decompose(AbelianRep::exact({diag_q({2, 3, 5})}));
  ASSERT_EQ(ws.real_weights.size(), 3u);
  std::vector<double> logs;
  for (const auto& rw : ws.real_weights) {
    EXPECT_EQ(rw.multiplicity, 1);
    logs.push_back(rw.value(0));
  }
  std::sort(logs.begin(), logs.end());
  EXPECT_NEAR(logs[0], std::log(2.0), 1e-12);
  EXPECT_NEAR(logs[1], std::log(3.0), 1e-12);
  EXPECT_NEAR(logs[2], std::log(5.0), 1e-12);
  for (const auto& cw : ws.complex_weights) EXPECT_EQ(cw.nilpotence, 1);
}

TEST(Decompose, JordanBlock) {
  MatQ j(2, 2);
  j << 2, 1, 0, 2;
  WeightSystem ws = decompose(AbelianRep::exact({j}));
  ASSERT_EQ(ws.complex_weights.size(), 1u);
  EXPECT_EQ(ws.complex_weights[0].multiplicity, 2);
  EXPECT_EQ(ws.complex_weights[0].nilpotence, 2);
  EXPECT_EQ(ws.real_weights[0].space.dim(), 2);
  EXPECT_NEAR(ws.real_weights[0].value(0), std::log(2.0), 1e-12);
}

TEST(Decompose, RotationGivesConjugatePair) {
  MatD r(2, 2);
  r << 0, -2, 2, 0;
  WeightSystem ws = decompose(AbelianRep::floating({r}));
  ASSERT_EQ(ws.complex_weights.size(), 2u);
  EXPECT_FALSE(ws.complex_weights[0].is_real);
  EXPECT_EQ(ws.complex_weights[0].conjugate, 1);
  ASSERT_EQ(ws.real_weights.size(), 1u);
  EXPECT_EQ(ws.real_weights[0].multiplicity, 2);
  EXPECT_NEAR(ws.real_weights[0].value(0), std::log(2.0), 1e-12);
}

TEST(Decompose, ExactModeNeedsRationalSpectrum) {
  MatQ a(2, 2);
  a << 0, 2, 1, 0;  // eigenvalues +-sqrt(2)
  EXPECT_THROW(decompose(AbelianRep::exact({a})), MathError);
}

TEST(Decompose, CuspGroupWeightsInBaseTwo) {
  WeightSystem ws = decompose(cusp_rep(), Rational(2));
  ASSERT_EQ(ws.real_weights.size(), 4u);
  for (auto e : std::vector<std::vector<int>>{{1, 0}, {-1, 1}, {0, -1}, {0, 0}}) EXPECT_GE(weight_with(ws, e), 0);
  WeightPolytope wp = weight_polytope(ws);
  EXPECT_EQ(wp.dim(), 2);
  EXPECT_EQ(wp.vertices().size(), 3u);
  EXPECT_TRUE(wp.interior(weight_with(ws, {0, 0})));
  EXPECT_EQ(wp.lattice.faces_of_dim(1).size(), 3u);
}

TEST(Decompose, AgreesWithEigenvaluesUnderConjugation) {
  std::mt19937_64 rng(6);
  MatQ p = testutil::random_rational_matrix(4, rng);
  MatQ pi = inverse(p);
  AbelianRep base = cusp_rep();
  AbelianRep moved = AbelianRep::exact({p * base.exact_generators()[0] * pi, p * base.exact_generators()[1] * pi});
  WeightSystem ws = decompose(moved, Rational(2));
  int r = weight_with(ws, {1, 0});
  ASSERT_GE(r, 0);
  // Its space is P e1.
  ASSERT_TRUE(ws.real_weights[static_cast<std::size_t>(r)].exact_space);
  MatQ both(4, 2);
  both << ws.real_weights[static_cast<std::size_t>(r)].exact_space->basis(), p.col(0);
  EXPECT_EQ(rank(both), 1);
}

TEST(WeightPolytope, SquareOfWeights) {
  const double e = std::exp(1.0);
  MatD g1 = VecD((VecD(5) << e, 1 / e, 1, 1, 1).finished()).asDiagonal();
  MatD g2 = VecD((VecD(5) << 1, 1, e, 1 / e, 1).finished()).asDiagonal();
  WeightSystem ws = decompose(AbelianRep::floating({g1, g2}));
  WeightPolytope wp = weight_polytope(ws);
  EXPECT_EQ(wp.vertices().size(), 4u);
  EXPECT_EQ(wp.lattice.faces_of_dim(1).size(), 4u);
}

TEST(WeightPolytope, SingleWeightIsAPoint) {
  WeightSystem ws = decompose(AbelianRep::exact({diag_q({3, 3})}));
  WeightPolytope wp = weight_polytope(ws);
  EXPECT_EQ(wp.dim(), 0);
  EXPECT_EQ(wp.vertices().size(), 1u);
}

TEST(FaceForDirection, CuspTriangle) {
  WeightSystem ws = decompose(cusp_rep(), Rational(2));
  WeightPolytope wp = weight_polytope(ws);
  VecQ h(2);
  h << 2, 1;  // a = 2, b = c = -1
  std::vector<int> f1 = wp.lattice.faces[static_cast<std::size_t>(face_for_direction(wp, h))];
  EXPECT_EQ(f1, std::vector<int>{weight_with(ws, {1, 0})});
  h << 1, 2;  // a = b = 1, c = -2
  std::vector<int> f2 = wp.lattice.faces[static_cast<std::size_t>(face_for_direction(wp, h))];
  std::vector<int> want{weight_with(ws, {1, 0}), weight_with(ws, {-1, 1})};
  std::sort(want.begin(), want.end());
  EXPECT_EQ(f2, want);
  // Scale invariance.
  h << 4, 2;
  EXPECT_EQ(wp.lattice.faces[static_cast<std::size_t>(face_for_direction(wp, h))], f1);
  VecD hd(2);
  hd << 1, 2;
  EXPECT_EQ(wp.lattice.faces[static_cast<std::size_t>(face_for_direction(wp, hd))], want);
}

TEST(FaceSubspaces, VertexAndWholePolytope) {
  WeightSystem ws = decompose(cusp_rep(), Rational(2));
  WeightPolytope wp = weight_polytope(ws);
  VecQ h(2);
  h << 2, 1;
  FacePick pick = face_subspaces(ws, wp, face_for_direction(wp, h));
  EXPECT_EQ(pick.v_face.dim(), 1);
  EXPECT_EQ(pick.v_opp.dim(), 3);
  MatD e1 = MatD::Zero(4, 1);
  e1(0) = 1;
  EXPECT_NEAR(subspace_gap(pick.v_face, Subspace<double>(e1)), 0.0, 1e-12);
  FacePick whole = face_subspaces(ws, wp, static_cast<int>(wp.lattice.faces.size()) - 1);
  EXPECT_EQ(whole.v_face.dim(), 4);
  EXPECT_EQ(whole.v_opp.dim(), 0);
}

TEST(FaceSubspaces, JordanSpaceIsWhole) {
  MatQ j(2, 2);
  j << 2, 1, 0, 2;
  WeightSystem ws = decompose(AbelianRep::exact({j}));
  WeightPolytope wp = weight_polytope(ws);
  FacePick pick = face_subspaces(ws, wp, static_cast<int>(wp.lattice.faces.size()) - 1);
  EXPECT_EQ(pick.v_face.dim(), 2);
}

TEST(NormBounds, DiagonalIsBoundedByConditioning) {
  NormBoundReport r = verify_norm_bounds(decompose(cusp_rep(), Rational(2)), 20);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.max_r, 1.0, 1e-9);  // orthonormal eigenbasis: R(h) = 1 / |h|^{d-1} at most
}

TEST(NormBounds, JordanBlockGrowthIsLinear) {
  MatQ j(2, 2);
  j << 2, 1, 0, 2;
  NormBoundReport r = verify_norm_bounds(decompose(AbelianRep::exact({j})), 50);
  EXPECT_TRUE(r.finite);
  EXPECT_TRUE(r.stabilized);
  EXPECT_TRUE(r.pass);
  // ||J^n|| ~ n 2^{n-1}/... so the ratio stays below a small constant.
  EXPECT_LT(r.max_r, 3.0);
}

TEST(Continuity, ConjugationPathKeepsWeights) {
  WeightSystem ws = decompose(cusp_rep(), Rational(2));
  MatD x = MatD::Zero(4, 4);
  x(0, 1) = 1;
  x(2, 3) = -1;
  auto family = [&](double t) {
    MatD c = MatD::Identity(4, 4) + t * x;
    MatD ci = c.inverse();
    std::vector<MatD> out;
    for (const MatD& g : ws.rep.generators()) out.push_back(c * g * ci);
    return out;
  };
  ContinuityReport r = perturb_and_track(ws, family, 10);
  EXPECT_TRUE(r.ok) << r.error;
  EXPECT_LT(r.max_weight_displacement, 1e-10);
  EXPECT_GT(r.max_subspace_displacement, 1e-3);
}

TEST(Continuity, EigenvalueScalingMovesTheLogWeight) {
  WeightSystem ws = decompose(AbelianRep::exact({diag_q({2, 5})}));
  const double eps = 1e-4;
  MatD delta = MatD::Zero(2, 2);
  delta(0, 0) = eps;
  ContinuityReport r = perturb_and_track(ws, {delta}, 4);
  ASSERT_TRUE(r.ok);
  // Displacements are per step; the first quarter step moves log 2 the most.
  EXPECT_NEAR(r.max_weight_displacement, std::log1p(eps / 8), 1e-12);
  double total = 0.0;
  for (const auto& st : r.steps) total += st.weight_displacement;
  EXPECT_NEAR(total, std::log1p(eps / 2), 1e-12);
  EXPECT_NEAR(total / eps, 0.5, 1e-4);
}

TEST(Continuity, IdentityPerturbationIsStill) {
  WeightSystem ws = decompose(cusp_rep(), Rational(2));
  ContinuityReport r = perturb_and_track(ws, {MatD::Zero(4, 4), MatD::Zero(4, 4)}, 3);
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.max_weight_displacement, 0.0);
}

TEST(Continuity, CommutatorDefectIsReported) {
  MatD a(2, 2), b(2, 2);
  a << 1, 1, 0, 1;
  b << 1, 0, 1, 1;
  EXPECT_GT(commutator_defect({a, b}), 0.1);
  EXPECT_EQ(commutator_defect({a, a}), 0.0);
}
