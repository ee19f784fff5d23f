#include "projdyn/flagdyn.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SVD>

#include "bigfloat.hpp"

namespace projdyn {

namespace {

using detail::Big;
using detail::MatBig;
using detail::to_big;

MatBig big_pow(MatBig base, long n) {
  MatBig out = MatBig::Identity(base.rows(), base.cols());
  while (n > 0) {
    if (n & 1) out = (out * base).eval();
    base = (base * base).eval();
    n >>= 1;
  }
  return out;
}

double log10_condition(const MatD& g) {
  Eigen::JacobiSVD<MatD> svd(g);
  const VecD& s = svd.singularValues();
  if (!(s(s.size() - 1) > 0.0)) throw MathError("generator is not invertible");
  return std::log10(s(0) / s(s.size() - 1));
}

// SVD of rho(h) in a precision wide enough for its condition number, so that
// long rays keep their small singular values.
SvdProfile ray_profile(const AbelianRep& rep, const std::vector<long>& h) {
  double digits = 30.0;
  for (std::size_t i = 0; i < h.size(); ++i)
    if (h[i] != 0) digits += static_cast<double>(std::labs(h[i])) * log10_condition(rep.generators()[i]);
  detail::PrecisionScope scope(static_cast<unsigned>(std::ceil(digits)));
  const int d = rep.dim();
  MatBig g = MatBig::Identity(d, d);
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h[i] == 0) continue;
    MatBig gen = rep.mode() == ScalarMode::Exact ? to_big(rep.exact_generators()[i]) : to_big(rep.generators()[i]);
    if (h[i] < 0) gen = gen.fullPivLu().inverse().eval();
    g = (g * big_pow(gen, std::labs(h[i]))).eval();
  }
  Eigen::JacobiSVD<MatBig> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SvdProfile out;
  out.sigma = svd.singularValues().unaryExpr([](const Big& x) { return x.convert_to<double>(); });
  out.u = svd.matrixU().unaryExpr([](const Big& x) { return x.convert_to<double>(); });
  out.v = svd.matrixV().unaryExpr([](const Big& x) { return x.convert_to<double>(); });
  if (!(out.sigma(d - 1) > 0.0)) throw MathError("svd_profile: matrix is not invertible");
  return out;
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// MatrixSequence

MatrixSequence MatrixSequence::explicit_terms(std::vector<MatD> terms) {
  if (terms.empty()) throw MathError("matrix sequence is empty");
  const Eigen::Index d = terms.front().rows();
  for (const MatD& t : terms)
    if (t.rows() != d || t.cols() != d) throw MathError("matrix sequence: terms must be square of equal size");
  MatrixSequence s;
  s.n_max_ = static_cast<int>(terms.size());
  s.terms_ = std::move(terms);
  return s;
}

MatrixSequence MatrixSequence::abelian_ray(AbelianRep rep, std::vector<long> direction, int n_max) {
  if (static_cast<int>(direction.size()) != rep.rank()) throw MathError("ray direction has wrong length");
  if (std::all_of(direction.begin(), direction.end(), [](long v) { return v == 0; }))
    throw MathError("ray direction must be nonzero");
  if (n_max < 1) throw MathError("ray needs n_max >= 1");
  MatrixSequence s;
  s.n_max_ = n_max;
  s.rep_ = std::move(rep);
  s.direction_ = std::move(direction);
  return s;
}

int MatrixSequence::dim() const { return rep_ ? rep_->dim() : static_cast<int>(terms_.front().rows()); }

MatD MatrixSequence::term(int n) const {
  if (n < 1 || n > n_max_) throw MathError("matrix sequence: index out of range");
  if (rep_) {
    std::vector<long> h(direction_.size());
    const long sign = inverted_ ? -1 : 1;
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = sign * n * direction_[i];
    return rep_->element(h);
  }
  const MatD& t = terms_[static_cast<std::size_t>(n - 1)];
  return inverted_ ? projdyn::inverse(t) : t;
}

MatD MatrixSequence::inverse_term(int n) const {
  MatrixSequence inv = inverse();
  return inv.term(n);
}

SvdProfile MatrixSequence::profile(int n) const {
  if (n < 1 || n > n_max_) throw MathError("matrix sequence: index out of range");
  if (!rep_) return svd_profile(term(n));
  std::vector<long> h(direction_.size());
  const long sign = inverted_ ? -1 : 1;
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = sign * n * direction_[i];
  return ray_profile(*rep_, h);
}

MatrixSequence MatrixSequence::inverse() const {
  MatrixSequence s = *this;
  s.inverted_ = !inverted_;
  return s;
}

// ---------------------------------------------------------------------------
// Detection

ContractionReport detect_contraction(const MatrixSequence& seq, int k, const DetectionConfig& cfg) {
  const int d = seq.dim();
  if (k < 1 || k >= d) throw MathError("detect_contraction: k out of range");
  ContractionReport rpt;
  rpt.k = k;
  std::optional<Subspace<double>> prev;
  SvdProfile last;
  for (int n = 1; n <= seq.n_max(); ++n) {
    last = seq.profile(n);
    rpt.gaps.push_back(last.gap(k));
    Subspace<double> top = last.top_left(k);
    if (prev) rpt.trace.push_back(subspace_gap(*prev, top));
    prev = top;
  }
  rpt.attracting = last.top_left(k);
  rpt.repelling = seq.inverse().profile(seq.n_max()).top_left(d - k);

  const int n = static_cast<int>(rpt.gaps.size());
  if (n >= cfg.window && rpt.gaps.back() >= cfg.threshold) {
    bool increasing = true;
    for (int i = n - cfg.window + 1; i < n; ++i)
      if (!(rpt.gaps[static_cast<std::size_t>(i)] > rpt.gaps[static_cast<std::size_t>(i - 1)])) increasing = false;
    rpt.detected = increasing;
  }
  return rpt;
}

SymmetryReport contraction_symmetry_check(const MatrixSequence& seq, int k, int samples, std::uint64_t seed,
                                          double tol, double margin, const DetectionConfig& cfg) {
  if (samples < 1) throw MathError("contraction_symmetry_check: need at least one sample");
  const int d = seq.dim();
  SymmetryReport rpt;
  rpt.forward = detect_contraction(seq, k, cfg);
  rpt.backward = detect_contraction(seq.inverse(), d - k, cfg);
  if (!rpt.forward.detected) throw MathError("contraction not detected for the sequence");
  if (!rpt.backward.detected) throw MathError("contraction not detected for the inverse sequence");
  const Subspace<double>& plus = *rpt.forward.attracting;
  const Subspace<double>& minus = *rpt.backward.attracting;
  rpt.repelling_agreement = subspace_gap(minus, *rpt.forward.repelling);

  const MatD g = seq.term(seq.n_max());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  int accepted = 0;
  for (int attempts = 0; accepted < samples; ++attempts) {
    if (attempts > 1000 * samples) throw MathError("contraction_symmetry_check: margin too large to sample");
    VecD x(d);
    for (int i = 0; i < d; ++i) x(i) = normal(rng);
    ProjectivePoint<double> p(x);
    if (proj_distance(p, minus) < margin) continue;
    ++accepted;
    ProjectivePoint<double> image(VecD(g * p.coords()));
    rpt.max_distance = std::max(rpt.max_distance, proj_distance(image, plus));
  }
  rpt.samples = accepted;
  rpt.pass = rpt.max_distance <= tol;
  return rpt;
}

// ---------------------------------------------------------------------------
// Attraction estimate

AttractEstimateReport attract_estimate_check(const MatD& g, const Subspace<double>& w, const Subspace<double>& w_perp,
                                             const std::vector<ProjectivePoint<double>>& samples, double tol) {
  const int d = static_cast<int>(g.rows());
  if (g.cols() != d || w.ambient() != d || w_perp.ambient() != d) throw MathError("attract_estimate: dimension mismatch");
  if (w.dim() == 0 || w_perp.dim() == 0 || w.dim() + w_perp.dim() != d)
    throw MathError("attract_estimate: subspaces are not complementary");
  MatD both(d, d);
  both << w.basis(), w_perp.basis();
  if (rank(both, 1e-12) != d) throw MathError("attract_estimate: subspaces are not complementary");
  const double invariance_tol = 1e-7;
  if (containment_distance(Subspace<double>::span(g * w.basis()), w) > invariance_tol ||
      containment_distance(Subspace<double>::span(g * w_perp.basis()), w_perp) > invariance_tol)
    throw MathError("attract_estimate: g does not preserve the splitting");

  AttractEstimateReport rpt;
  rpt.sine = proj_distance(w, w_perp);
  MatD qw = orthonormal_basis(w.basis(), 1e-12);
  MatD qp = orthonormal_basis(w_perp.basis(), 1e-12);
  Eigen::JacobiSVD<MatD> sw(g * qw), sp(g * qp);
  rpt.conorm_w = sw.singularValues()(sw.singularValues().size() - 1);
  rpt.norm_perp = sp.singularValues()(0);
  for (const auto& x : samples) {
    if (x.dim() != d) throw MathError("attract_estimate: dimension mismatch");
    double dx = proj_distance(x, w_perp);
    if (dx <= 1e-14) throw MathError("attract_estimate: sample lies on P(W_perp)");
    ProjectivePoint<double> gx(VecD(g * x.coords()));
    double lhs = proj_distance(gx, w) / proj_distance(gx, w_perp);
    double rhs = rpt.norm_perp / (rpt.sine * rpt.sine * rpt.conorm_w * dx);
    rpt.max_ratio = std::max(rpt.max_ratio, lhs / rhs);
  }
  rpt.pass = rpt.max_ratio <= 1.0 + tol;
  return rpt;
}

// ---------------------------------------------------------------------------
// Face prediction

CrosscheckReport face_prediction_crosscheck(const WeightSystem& ws, const std::vector<long>& direction, int n_max,
                                            double tol, const DetectionConfig& cfg) {
  CrosscheckReport rpt;
  WeightPolytope wp = weight_polytope(ws);
  VecQ h(static_cast<Eigen::Index>(direction.size()));
  for (std::size_t i = 0; i < direction.size(); ++i) h(static_cast<Eigen::Index>(i)) = direction[i];
  rpt.face = face_for_direction(wp, h);
  rpt.face_weights = wp.lattice.faces[static_cast<std::size_t>(rpt.face)];
  rpt.prediction = face_subspaces(ws, wp, rpt.face);
  rpt.k = rpt.prediction.v_face.dim();
  if (rpt.k == ws.rep.dim()) {
    rpt.verdict = Verdict::Inconclusive;
    rpt.note = "every weight is maximal in this direction; no proper attracting subspace";
    return rpt;
  }
  rpt.empirical = detect_contraction(MatrixSequence::abelian_ray(ws.rep, direction, n_max), rpt.k, cfg);
  rpt.attracting_distance = subspace_gap(rpt.prediction.v_face, *rpt.empirical.attracting);
  rpt.repelling_distance = subspace_gap(rpt.prediction.v_opp, *rpt.empirical.repelling);
  if (!rpt.empirical.detected) {
    rpt.verdict = Verdict::Inconclusive;
    rpt.note = "contraction not detected within n_max";
    return rpt;
  }
  rpt.verdict = rpt.attracting_distance <= tol && rpt.repelling_distance <= tol ? Verdict::Pass : Verdict::Fail;
  return rpt;
}

// ---------------------------------------------------------------------------
// Orbits

OrbitCloud orbit_limit_flags(const std::vector<MatD>& generators, int max_len, int k, std::size_t word_cap,
                             const ConvexDomain* domain, double tol) {
  if (generators.empty()) throw MathError("orbit_limit_flags: no generators");
  const int d = static_cast<int>(generators.front().rows());
  if (k < 1 || k >= d) throw MathError("orbit_limit_flags: k out of range");
  if (max_len < 1) throw MathError("orbit_limit_flags: max_len must be positive");
  const int r = static_cast<int>(generators.size());
  for (const MatD& g : generators) {
    if (g.rows() != d || g.cols() != d) throw MathError("orbit_limit_flags: generator size mismatch");
    Eigen::JacobiSVD<MatD> svd(g);
    if (!(svd.singularValues()(d - 1) > 0.0)) throw MathError("orbit_limit_flags: generator is not invertible");
  }

  OrbitCloud cloud;
  std::vector<std::vector<bool>> cancels(static_cast<std::size_t>(r), std::vector<bool>(static_cast<std::size_t>(r), false));
  const MatD id = MatD::Identity(d, d);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      if (i == j) continue;
      const MatD& a = generators[static_cast<std::size_t>(i)];
      const MatD& b = generators[static_cast<std::size_t>(j)];
      if ((a * b - id).norm() <= tol * std::max(1.0, a.norm() * b.norm())) {
        cancels[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = true;
        if (i < j) cloud.inverse_pairs.emplace_back(i, j);
      }
    }

  struct Node {
    std::vector<int> word;
    MatD product;
  };
  std::vector<Node> frontier;
  auto emit = [&](const Node& node) {
    SvdProfile p = svd_profile(node.product);
    OrbitRecord rec;
    rec.word = node.word;
    rec.gap = p.gap(k);
    rec.attracting = p.top_left(k);
    if (k == 1) {
      ProjectivePoint<double> line(VecD(p.u.col(0)));
      DualPoint<double> hyp(VecD(p.u.col(d - 1)));
      rec.flag = Flag<double>(line, hyp, 1e-9);
      if (domain && domain->is_polytope()) {
        try {
          auto [face, dist] = nearest_face(*domain, line);
          rec.nearest_face = face;
          rec.face_distance = dist;
        } catch (const MathError&) {
          rec.nearest_face = -1;
        }
      }
    }
    cloud.records.push_back(std::move(rec));
    ++cloud.words;
  };

  for (int i = 0; i < r && !cloud.truncated; ++i) {
    if (cloud.words >= word_cap) {
      cloud.truncated = true;
      break;
    }
    Node n{{i}, generators[static_cast<std::size_t>(i)]};
    emit(n);
    frontier.push_back(std::move(n));
  }
  for (int len = 2; len <= max_len && !cloud.truncated; ++len) {
    std::vector<Node> next;
    for (const Node& node : frontier) {
      for (int i = 0; i < r; ++i) {
        if (cancels[static_cast<std::size_t>(node.word.back())][static_cast<std::size_t>(i)]) continue;
        if (cloud.words >= word_cap) {
          cloud.truncated = true;
          break;
        }
        Node n{node.word, node.product * generators[static_cast<std::size_t>(i)]};
        n.word.push_back(i);
        emit(n);
        next.push_back(std::move(n));
      }
      if (cloud.truncated) break;
    }
    frontier = std::move(next);
  }
  std::stable_sort(cloud.records.begin(), cloud.records.end(),
                   [](const OrbitRecord& a, const OrbitRecord& b) { return a.gap > b.gap; });
  return cloud;
}

}  // namespace projdyn
