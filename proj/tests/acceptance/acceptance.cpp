// Acceptance gate: one line per criterion, nonzero exit when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "projdyn/flagdyn.hpp"
#include "projdyn/hilbert.hpp"
#include "projdyn/peripheral.hpp"
#include "projdyn/repfile.hpp"
#include "projdyn/sympow.hpp"
#include "testutil.hpp"

using namespace projdyn;
using testutil::data_file;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::set<std::string> parse_set(const std::string& text, const std::string& prefix) {
  std::set<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) != 0) continue;
    std::string body = line.substr(prefix.size());
    if (body.size() < 2 || body.front() != '{' || body.back() != '}') continue;
    body = body.substr(1, body.size() - 2);
    std::istringstream items(body);
    std::string item;
    while (std::getline(items, item, ',')) {
      while (!item.empty() && item.front() == ' ') item.erase(item.begin());
      out.insert(item);
    }
  }
  return out;
}

struct Cusp {
  RepFile file = load_repfile(data_file("cusp.json"));
  const GroupSpec& spec = file.group("cusp");
  AbelianRep rep = file.group_rep("cusp", ScalarMode::Exact);
};

Cusp& cusp() {
  static Cusp c;
  return c;
}

// Sym^2(R^4) index of a monomial e^a.
int sym2_index(std::vector<int> a) { return cached_sym_basis(4, 2).index_of(MultiIndex{std::move(a)}); }

// Oracle for a diagonal ray: tau_2(diag(t)) is diag(t_i t_j), so the
// attracting k-space of its n-th power is spanned by the basis vectors with
// the k largest entries.
Subspace<double> diagonal_top_space(const std::vector<double>& log_entries, int k) {
  const SymBasis& b = cached_sym_basis(4, 2);
  std::vector<std::pair<double, int>> sorted;
  for (int i = 0; i < b.dim(); ++i) {
    double s = 0;
    for (int j = 0; j < 4; ++j) s += b[i].exponents[static_cast<std::size_t>(j)] * log_entries[static_cast<std::size_t>(j)];
    sorted.emplace_back(-s, i);
  }
  std::sort(sorted.begin(), sorted.end());
  MatD basis = MatD::Zero(b.dim(), k);
  for (int c = 0; c < k; ++c) basis(sorted[static_cast<std::size_t>(c)].second, c) = 1.0;
  return Subspace<double>(basis);
}

Outcome dynamics_case(const std::vector<long>& dir, const std::vector<double>& log2_entries,
                      const std::vector<std::vector<int>>& expected_monomials,
                      const std::set<std::vector<int>>& expected_exponents) {
  auto t0 = Clock::now();
  WeightSystem ws = decompose(sym_power_rep(cusp().rep, 2), cusp().spec.base);
  CrosscheckReport x = face_prediction_crosscheck(ws, dir, 30, 1e-8);
  double secs = seconds_since(t0);
  MatD span = MatD::Zero(10, static_cast<Eigen::Index>(expected_monomials.size()));
  for (std::size_t c = 0; c < expected_monomials.size(); ++c) span(sym2_index(expected_monomials[c]), static_cast<Eigen::Index>(c)) = 1.0;
  Subspace<double> expected(span);
  double empirical = x.empirical.attracting ? subspace_gap(expected, *x.empirical.attracting) : 1.0;
  double oracle = subspace_gap(expected, diagonal_top_space(log2_entries, static_cast<int>(expected_monomials.size())));
  std::set<std::vector<int>> predicted;
  for (int w : x.face_weights) {
    const auto& e = ws.real_weights[static_cast<std::size_t>(w)].exponents;
    if (!e) return {false, "weights lack exponents"};
    std::vector<int> v;
    for (Eigen::Index i = 0; i < e->size(); ++i) v.push_back(static_cast<int>((*e)(i).convert_to<double>()));
    predicted.insert(v);
  }
  bool pass = x.verdict == Verdict::Pass && empirical <= 1e-8 && oracle == 0.0 && predicted == expected_exponents &&
              secs < 1.0;
  return {pass, "d=" + num(empirical) + " crosscheck=" + std::string(to_string(x.verdict)) + " t=" + num(secs) + "s"};
}

// ---------------------------------------------------------------------------

Outcome simplex_vertices() {
  std::string path = data_file("cusp.json");
  const char* argv[] = {"projdyn", "peripheral", path.c_str(), "cusp", "--m", "2"};
  std::ostringstream out, err;
  auto t0 = Clock::now();
  int code = cli::run(6, argv, out, err);
  double secs = seconds_since(t0);
  std::set<std::string> primal = parse_set(out.str(), "primal monomials: ");
  std::set<std::string> dual = parse_set(out.str(), "dual monomials: ");
  const std::set<std::string> want_primal{"v1^2", "v2^2", "v3^2", "v1v2", "v2v3", "v1v3"};
  const std::set<std::string> want_dual{"(v1*)^2", "(v2*)^2", "(v3*)^2", "v1*v2*", "v2*v3*", "v1*v3*"};
  bool pass = code == 0 && primal == want_primal && dual == want_dual && secs < 1.0;
  return {pass, std::to_string(primal.size()) + "+" + std::to_string(dual.size()) + " monomials, t=" + num(secs) + "s"};
}

Outcome dynamics_one() {
  return dynamics_case({2, 1}, {2, -1, -1, 0}, {{2, 0, 0, 0}}, {{2, 0}});
}

Outcome dynamics_two() {
  return dynamics_case({1, 2}, {1, 1, -2, 0}, {{2, 0, 0, 0}, {0, 2, 0, 0}, {1, 1, 0, 0}},
                       {{2, 0}, {-2, 2}, {0, 1}});
}

Outcome sym_dimension() {
  bool pass = sym_dim(4, 2) == 10 && SymBasis(4, 2).dim() == 10 && binomial(5, 2) == 10;
  return {pass, "sym_dim(4,2)=" + std::to_string(sym_dim(4, 2))};
}

Outcome homomorphism_suite() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dd(1, 4), mm(1, 3);
  auto t0 = Clock::now();
  int failures = 0;
  for (int c = 0; c < 200; ++c) {
    const int d = dd(rng), m = mm(rng);
    MatQ g = testutil::random_rational_matrix(d, rng), h = testutil::random_rational_matrix(d, rng);
    MatQ tg = sym_power_matrix(g, m), th = sym_power_matrix(h, m);
    bool ok = sym_power_matrix(MatQ(g * h), m) == tg * th;
    ok = ok && tg == testutil::naive_sym_power(g, m);
    VecQ v = testutil::random_rational_vector(d, rng), w = testutil::random_rational_vector(d, rng);
    ProjectivePoint<Rational> pv(v);
    ok = ok && veronese(act(g, pv), m) == act(tg, veronese(pv, m));
    std::vector<VecQ> vs(static_cast<std::size_t>(m), v), ws(static_cast<std::size_t>(m), w);
    Rational lhs = plain_dual(sym_product(ws, d), cached_sym_basis(d, m)).dot(sym_product(vs, d));
    ok = ok && lhs == pow_int(w.dot(v), m);
    if (!ok) ++failures;
  }
  double secs = seconds_since(t0);
  return {failures == 0 && secs < 30.0, std::to_string(failures) + " failures, t=" + num(secs) + "s"};
}

Outcome weight_sumset() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> kk(1, 3), mm(1, 3);
  int failures = 0;
  std::string first;
  for (int c = 0; c < 50; ++c) {
    const int k = kk(rng);
    std::uniform_int_distribution<int> dd(k + 1, 5);
    const int d = dd(rng), m = mm(rng);
    testutil::SimplexGroup grp = testutil::random_simplex_group(k, d, rng);
    auto expected = testutil::sumset(grp.weights, m);
    WeightSystem ws = decompose(sym_power_rep(grp.rep, m), Rational(2));
    std::map<std::vector<int>, int> got;
    for (const RealWeight& rw : ws.real_weights) {
      std::vector<int> e;
      for (Eigen::Index i = 0; i < rw.exponents->size(); ++i) e.push_back(static_cast<int>((*rw.exponents)(i).convert_to<double>()));
      got[e] += rw.multiplicity;
    }
    bool ok = got == expected;
    // Boundary weights of the sym power are the m-fold vertex sums, each
    // carried by a line.
    WeightPolytope wp = weight_polytope(ws);
    std::size_t boundary = 0;
    for (std::size_t r = 0; r < ws.real_weights.size(); ++r) {
      if (!wp.lattice.on_boundary(static_cast<int>(r))) continue;
      ++boundary;
      ok = ok && ws.real_weights[r].multiplicity == 1;
    }
    ok = ok && static_cast<std::int64_t>(boundary) == boundary_monomial_count(k, m);
    if (!ok) {
      ++failures;
      if (first.empty()) first = " (first: k=" + std::to_string(k) + " d=" + std::to_string(d) + " m=" + std::to_string(m) + ")";
    }
  }
  return {failures == 0, std::to_string(failures) + " failures" + first};
}

Outcome vertex_count_law() {
  int failures = 0;
  for (int k = 1; k <= 3; ++k) {
    for (int m = 1; m <= 5; ++m) {
      // Enumerate exponent vectors over k + 1 vertices with a zero entry.
      std::int64_t count = 0;
      std::vector<int> a(static_cast<std::size_t>(k + 1), 0);
      while (true) {
        int sum = 0;
        bool zero = false;
        for (int x : a) {
          sum += x;
          zero = zero || x == 0;
        }
        if (sum == m && zero) ++count;
        std::size_t pos = 0;
        while (pos < a.size() && a[pos] == m) a[pos++] = 0;
        if (pos == a.size()) break;
        ++a[pos];
      }
      const std::int64_t law = binomial(m + k, k) - binomial(m - 1, k);
      if (count != law || boundary_monomial_count(k, m) != law ||
          static_cast<std::int64_t>(boundary_weight_monomials(k + 1, m).size()) != law)
        ++failures;
    }
  }
  PeripheralModel model = build_model(cusp().rep, cusp().spec.hints, cusp().spec.base);
  const int n2 = build_simplices(model, 2).size(), n3 = build_simplices(model, 3).size();
  bool pass = failures == 0 && n2 == 6 && n3 == 9;
  return {pass, std::to_string(failures) + " mismatches, cusp m=2: " + std::to_string(n2) + ", m=3: " + std::to_string(n3)};
}

Outcome attract_estimate() {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> dd(2, 5);
  auto t0 = Clock::now();
  double worst = 0.0;
  for (int c = 0; c < 1000; ++c) {
    const int d = dd(rng);
    std::uniform_int_distribution<int> kk(1, d - 1);
    const int k = kk(rng);
    MatD p = testutil::well_conditioned(d, rng, 50.0);
    MatD block = MatD::Zero(d, d);
    block.topLeftCorner(k, k) = testutil::gaussian_matrix(k, k, rng);
    block.bottomRightCorner(d - k, d - k) = testutil::gaussian_matrix(d - k, d - k, rng);
    MatD g = p * block * p.inverse();
    Subspace<double> w(MatD(p.leftCols(k))), wp(MatD(p.rightCols(d - k)));
    std::vector<ProjectivePoint<double>> xs{ProjectivePoint<double>(testutil::gaussian_vector(d, rng))};
    AttractEstimateReport r = attract_estimate_check(g, w, wp, xs, 1e-9);
    worst = std::max(worst, r.max_ratio);
  }
  double secs = seconds_since(t0);
  return {worst <= 1.0 + 1e-9 && secs < 10.0, "max LHS/RHS=" + num(worst) + " t=" + num(secs) + "s"};
}

Outcome norm_bounds() {
  WeightSystem ws = decompose(cusp().rep, cusp().spec.base);
  NormBoundReport a = verify_norm_bounds(ws, 50);
  bool pass = a.pass && a.stabilized;
  std::string detail = "cusp max=" + num(a.max_r);
  // Jordan family: a Jordan block of size s for eigenvalue 2, plus fillers.
  for (int s = 2; s <= 4; ++s) {
    MatQ j = MatQ::Zero(s + 1, s + 1);
    for (int i = 0; i < s; ++i) {
      j(i, i) = 2;
      if (i + 1 < s) j(i, i + 1) = 1;
    }
    j(s, s) = Rational(1, 3);
    NormBoundReport r = verify_norm_bounds(decompose(AbelianRep::exact({j})), 50);
    pass = pass && r.pass && r.stabilized;
    detail += " jordan" + std::to_string(s) + " max=" + num(r.max_r);
  }
  const RepFile& f = cusp().file;
  NormBoundReport jf = verify_norm_bounds(decompose(f.group_rep("jordan", ScalarMode::Exact)), 50);
  pass = pass && jf.pass && jf.stabilized;
  return {pass, detail};
}

Outcome hilbert_metric() {
  const RepFile& f = cusp().file;
  ConvexDomain interval = f.build_domain("interval");
  VecQ x(2), y(2);
  x << 0, 1;
  y << Rational(1, 2), 1;
  double d_exact = hilbert_distance(interval, ProjectivePoint<Rational>(x), ProjectivePoint<Rational>(y));
  double interval_err = std::abs(d_exact - 0.5 * std::log(3.0));

  std::mt19937_64 rng(99);
  std::vector<VecQ> square_facets;
  for (int s : {-1, 1})
    for (int i = 0; i < 2; ++i) {
      VecQ c = VecQ::Zero(3);
      c(i) = s;
      c(2) = 1;
      square_facets.push_back(c);
    }
  MatD disk_form = MatD::Identity(3, 3);
  disk_form(0, 0) = disk_form(1, 1) = -1;
  std::vector<ConvexDomain> domains{f.build_domain("tetrahedron"), ConvexDomain::polytope_h(square_facets),
                                    ConvexDomain::ellipsoid(disk_form)};
  double tri = 0.0, inv = 0.0;
  for (const ConvexDomain& dom : domains) {
    MatD a;
    do a = MatD::Identity(dom.dim(), dom.dim()) + 0.3 * testutil::gaussian_matrix(dom.dim(), dom.dim(), rng);
    while (std::abs(a.determinant()) < 0.1);
    ConvexDomain moved = transform(dom, a);
    for (int s = 0; s < 1000; ++s) {
      auto p = testutil::random_interior(dom, rng), q = testutil::random_interior(dom, rng),
           r = testutil::random_interior(dom, rng);
      double pq = hilbert_distance(dom, p, q), qr = hilbert_distance(dom, q, r), pr = hilbert_distance(dom, p, r);
      tri = std::max(tri, pr - pq - qr);
      double mpq = hilbert_distance(moved, act(a, p), act(a, q));
      inv = std::max(inv, std::abs(mpq - pq));
    }
  }
  double chord = 0.0;
  for (double t : {0.0, 0.1, 0.5, 0.9, 0.99, 0.999}) {
    VecD o(3), pt(3);
    o << 0, 0, 1;
    pt << t, 0, 1;
    if (t == 0.0) continue;
    chord = std::max(chord, std::abs(hilbert_distance(domains[2], ProjectivePoint<double>(o), ProjectivePoint<double>(pt)) -
                                     std::atanh(t)));
  }
  bool pass = interval_err <= 1e-12 && tri <= 1e-9 && inv <= 1e-9 && chord <= 1e-10;
  return {pass, "interval=" + num(interval_err) + " triangle=" + num(tri) + " invariance=" + num(inv) +
                    " chord=" + num(chord)};
}

Outcome contraction_symmetry() {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> dd(2, 5);
  std::uniform_real_distribution<double> ratio(2.0, 4.0);
  int failures = 0;
  double worst = 0.0, worst_oracle = 0.0;
  std::string first_error;
  for (int c = 0; c < 100; ++c) {
    const int d = dd(rng);
    std::uniform_int_distribution<int> kk(1, d - 1);
    const int k = kk(rng);
    // Distinct moduli with consecutive ratios in [2, 4]; random signs.
    VecD ev(d);
    double lam = 1.0;
    for (int i = d - 1; i >= 0; --i) {
      ev(i) = lam * (rng() % 2 ? 1.0 : -1.0);
      lam *= ratio(rng);
    }
    MatD p = testutil::well_conditioned(d, rng);
    MatD g = p * ev.asDiagonal() * p.inverse();
    MatrixSequence seq = MatrixSequence::abelian_ray(AbelianRep::floating({g}), {1}, 40);
    try {
      SymmetryReport r = contraction_symmetry_check(seq, k, 50, 1000 + static_cast<std::uint64_t>(c), 1e-6);
      // Oracle: the forward limit is the top-k eigenspace.
      double oracle = subspace_gap(*r.forward.attracting, Subspace<double>(MatD(p.leftCols(k))));
      worst = std::max(worst, r.max_distance);
      worst_oracle = std::max(worst_oracle, oracle);
      if (!r.pass || oracle > 1e-6) ++failures;
    } catch (const MathError& e) {
      if (failures++ == 0) first_error = e.what();
    }
  }
  return {failures == 0, std::to_string(failures) + " failures, max d=" + num(worst) + " eigenspace gap=" +
                             num(worst_oracle) + (first_error.empty() ? "" : " first error: " + first_error)};
}

Outcome attraction() {
  PeripheralModel model = build_model(cusp().rep, cusp().spec.hints, cusp().spec.base);
  SimplexPair pair = build_simplices(model, 2);
  AttractionRegion region = attraction_region(pair);
  AttractionConfig cfg;
  cfg.samples = 100;
  cfg.tol = 1e-6;
  cfg.seed = 7;
  const std::vector<std::pair<std::vector<long>, std::set<std::string>>> cases{
      {{2, 1}, {"v1^2"}}, {{1, 2}, {"v1^2", "v2^2", "v1v2"}}};
  bool pass = true;
  std::string detail;
  for (const auto& [dir, face] : cases) {
    AttractionReport r = attraction_experiment(pair, region, dir, 40, cfg);
    std::set<std::string> predicted;
    for (int v : r.predicted_face) predicted.insert(pair.primal_labels[static_cast<std::size_t>(v)]);
    bool faces_ok = r.limits_match && predicted == face && r.samples == 100;
    for (const auto& lf : r.limiting_faces) faces_ok = faces_ok && lf == r.predicted_face;
    double last = r.boundary_distance.back();
    pass = pass && r.verdict == Verdict::Pass && faces_ok && last <= 1e-6;
    detail += (detail.empty() ? "" : ", ") + std::string("(") + std::to_string(dir[0]) + "," + std::to_string(dir[1]) +
              ") d=" + num(last);
  }
  return {pass, detail};
}

Outcome perturbation() {
  PeripheralModel model = build_model(cusp().rep, cusp().spec.hints, cusp().spec.base);
  SimplexPair pair = build_simplices(model, 2);
  const ExperimentSpec& spec = cusp().file.experiment("perturbation");
  PerturbationConfig cfg;
  cfg.epsilons = {1e-4, 1e-3, 1e-2};
  if (spec.samples) cfg.k_samples = *spec.samples;
  if (spec.margin) cfg.k_margin = *spec.margin;
  if (spec.t_max) cfg.t_max = *spec.t_max;
  if (spec.u_margin) cfg.u_margin = *spec.u_margin;
  cfg.seed = spec.seed.value_or(1);
  PerturbationReport r = perturbation_experiment(model, pair, conjugation_family(pair, cfg.seed), cfg);
  bool pass = r.ok && r.monotone && r.displacement_constant <= 50.0 && r.base_t_min > 0;
  for (const auto& s : r.steps) {
    pass = pass && s.vertex_displacement <= 50.0 * s.epsilon;
    if (s.epsilon <= 1e-3) pass = pass && s.contained_from_base_t_min && s.t_min == r.base_t_min;
  }
  // Monotonicity over a finer grid and several directions X.
  PerturbationConfig fine;
  fine.epsilons = {1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
  fine.t_max = 1;
  bool monotone = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    PerturbationReport m = perturbation_experiment(model, pair, conjugation_family(pair, seed), fine);
    monotone = monotone && m.ok && m.monotone;
  }
  pass = pass && monotone;
  return {pass, "C=" + num(r.displacement_constant) + " T_min=" + std::to_string(r.base_t_min) +
                    (monotone ? " monotone" : " not monotone")};
}

Outcome dual_reflexivity() {
  std::mt19937_64 rng(14);
  std::uniform_int_distribution<int> dd(2, 4);
  int failures = 0;
  for (int c = 0; c < 20; ++c) {
    ConvexDomain p = testutil::random_polytope(dd(rng), rng);
    ConvexDomain back = dual_domain(dual_domain(p));
    if (!same_vertex_set(back, p)) ++failures;
  }
  return {failures == 0, std::to_string(failures) + " failures"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"cusp simplex vertices and duals (m=2)", simplex_vertices},
      {"cusp dynamics along (2,1)", dynamics_one},
      {"cusp dynamics along (1,2)", dynamics_two},
      {"dimension of Sym^2(R^4)", sym_dimension},
      {"symmetric power homomorphism suite", homomorphism_suite},
      {"weight sumset oracle", weight_sumset},
      {"boundary monomial count law", vertex_count_law},
      {"attract estimate inequality", attract_estimate},
      {"norm bound certificate", norm_bounds},
      {"Hilbert metric checks", hilbert_metric},
      {"contraction symmetry", contraction_symmetry},
      {"attraction to the simplex boundary", attraction},
      {"perturbation stability", perturbation},
      {"polar duality reflexivity", dual_reflexivity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
