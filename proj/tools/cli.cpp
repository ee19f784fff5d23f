#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "projdyn/peripheral.hpp"
#include "projdyn/repfile.hpp"

#ifndef PROJDYN_DATA_DIR
#define PROJDYN_DATA_DIR "data"
#endif

namespace projdyn::cli {

std::string data_dir() { return PROJDYN_DATA_DIR; }

namespace {

struct Globals {
  std::uint64_t seed = 1;
  std::optional<double> tol;
  std::string mode;  // empty: as declared in the file
  std::string out;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

VecQ parse_point(const std::string& s) {
  auto parts = split(s, ',');
  if (parts.empty()) throw ParseError("empty coordinate list");
  VecQ v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    try {
      v(static_cast<Eigen::Index>(i)) = parse_rational(parts[i]);
    } catch (const std::exception& e) {
      throw ParseError("bad coordinate '" + parts[i] + "': " + e.what());
    }
  }
  return v;
}

std::vector<long> parse_direction(const std::string& s) {
  std::vector<long> out;
  for (const auto& p : split(s, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stol(p, &used));
      if (used != p.size()) throw std::invalid_argument(p);
    } catch (const std::exception&) {
      throw ParseError("bad direction entry '" + p + "'");
    }
  }
  if (out.empty()) throw ParseError("empty direction");
  return out;
}

std::string fmt(const VecQ& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_rational(v(i));
  return s + ")";
}

std::string fmt(const VecD& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v(i));
  return s + ")";
}

std::string fmt(const std::vector<long>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + ")";
}

std::string fmt_set(const std::vector<std::string>& items) {
  std::string s = "{";
  for (std::size_t i = 0; i < items.size(); ++i) s += (i ? ", " : "") + items[i];
  return s + "}";
}

template <class M>
std::vector<std::string> matrix_lines(const M& m) {
  std::vector<std::vector<std::string>> cells(static_cast<std::size_t>(m.rows()));
  std::size_t width = 1;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::string s;
      if constexpr (std::is_same_v<typename M::Scalar, Rational>) s = format_rational(m(r, c));
      else s = format_double(m(r, c));
      width = std::max(width, s.size());
      cells[static_cast<std::size_t>(r)].push_back(s);
    }
  std::vector<std::string> lines;
  for (const auto& row : cells) {
    std::string line = " ";
    for (const auto& s : row) line += " " + std::string(width - s.size(), ' ') + s;
    lines.push_back(line);
  }
  return lines;
}

ScalarMode effective_mode(const RepFile& f, const Globals& g) {
  return g.mode.empty() ? f.mode : parse_scalar_mode(g.mode);
}

Report new_report(const std::string& command, const RepFile* f, const Globals& g, double default_tol) {
  Report r;
  r.command = command;
  r.seed = g.seed;
  r.tol = g.tol.value_or(default_tol);
  r.mode = f ? effective_mode(*f, g) : ScalarMode::Exact;
  return r;
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::Pass: return kPass;
    case Verdict::Fail: return kFail;
    case Verdict::Inconclusive: return kInconclusive;
  }
  return kFail;
}

int finish(const Report& r, const Globals& g, std::ostream& out, bool write_json = true) {
  out << report_text(r);
  if (write_json && !g.out.empty()) {
    std::ofstream f(g.out);
    if (!f) throw ParseError("cannot write " + g.out);
    f << report_json(r);
  }
  return exit_code(r.overall());
}

// Small random rational matrices with entries in {-3..3}/{1,2}.
MatQ random_rational(int d, std::mt19937_64& rng, bool invertible) {
  std::uniform_int_distribution<int> num(-3, 3), den(1, 2);
  while (true) {
    MatQ m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = Rational(num(rng), den(rng));
    if (!invertible || determinant(m) != 0) return m;
  }
}

VecQ random_vector(int d, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> num(-5, 5);
  while (true) {
    VecQ v(d);
    for (int i = 0; i < d; ++i) v(i) = num(rng);
    if (!is_zero_matrix(MatQ(v))) return v;
  }
}

// ---------------------------------------------------------------------------

int cmd_sympow(const Globals& g, const std::string& path, const std::string& name, int m, std::ostream& out) {
  RepFile f = load_repfile(path);
  Report r = new_report("sympow " + name + " m=" + std::to_string(m), &f, g, 1e-9);
  const MatQ& a = f.matrix(name);
  const int d = f.dim;
  std::mt19937_64 rng(g.seed);
  const SymBasis& basis = cached_sym_basis(d, m);
  r.lines.push_back("basis: " + [&] {
    std::vector<std::string> labels;
    for (const auto& idx : basis.indices()) labels.push_back(monomial_label(idx));
    return fmt_set(labels);
  }());

  if (r.mode == ScalarMode::Exact) {
    MatQ t = sym_power_matrix(a, m);
    r.lines.push_back("tau_" + std::to_string(m) + "(" + name + ") [" + std::to_string(t.rows()) + "x" +
                      std::to_string(t.cols()) + "]");
    for (auto& l : matrix_lines(t)) r.lines.push_back(l);
    MatQ h = random_rational(d, rng, true);
    r.add("homomorphism", sym_power_matrix(MatQ(a * h), m) == t * sym_power_matrix(h, m) ? Verdict::Pass
                                                                                          : Verdict::Fail);
    VecQ v = random_vector(d, rng), w = random_vector(d, rng);
    ProjectivePoint<Rational> lhs = veronese(ProjectivePoint<Rational>(VecQ(a * v)), m);
    ProjectivePoint<Rational> rhs(VecQ(t * veronese(ProjectivePoint<Rational>(v), m).coords()));
    r.add("equivariance", lhs == rhs ? Verdict::Pass : Verdict::Fail);
    std::vector<VecQ> wf(static_cast<std::size_t>(m), w), vf(static_cast<std::size_t>(m), v);
    Rational pair = plain_dual(sym_product(wf, d), basis).dot(sym_product(vf, d));
    r.add("duality", pair == pow_int(w.dot(v), m) ? Verdict::Pass : Verdict::Fail);
  } else {
    const double tol = r.tol;
    MatD ad = to_double(a);
    MatD t = sym_power_matrix(ad, m);
    r.lines.push_back("tau_" + std::to_string(m) + "(" + name + ") [" + std::to_string(t.rows()) + "x" +
                      std::to_string(t.cols()) + "]");
    for (auto& l : matrix_lines(t)) r.lines.push_back(l);
    MatD h = to_double(random_rational(d, rng, true));
    MatD lhs = sym_power_matrix(MatD(ad * h), m), rhs = t * sym_power_matrix(h, m);
    double err = (lhs - rhs).norm() / std::max(1.0, rhs.norm());
    r.add("homomorphism", err <= tol ? Verdict::Pass : Verdict::Fail).values.emplace_back("error", format_double(err));
    VecD v = to_double(random_vector(d, rng));
    double eq = proj_distance(veronese(ProjectivePoint<double>(VecD(ad * v)), m),
                              ProjectivePoint<double>(VecD(t * veronese(ProjectivePoint<double>(v), m).coords())));
    r.add("equivariance", eq <= tol ? Verdict::Pass : Verdict::Fail).values.emplace_back("error", format_double(eq));
  }
  return finish(r, g, out);
}

int cmd_weights(const Globals& g, const std::string& path, const std::string& group, std::ostream& out) {
  RepFile f = load_repfile(path);
  Report r = new_report("weights " + group, &f, g, 1e-9);
  NumericConfig cfg;
  if (g.tol) cfg.tol = *g.tol;
  AbelianRep rep = f.group_rep(group, r.mode, cfg);
  std::optional<Rational> base = r.mode == ScalarMode::Exact ? f.group(group).base : std::nullopt;
  WeightSystem ws = decompose(rep, base, cfg);
  WeightPolytope wp = weight_polytope(ws);
  if (base) r.meta.emplace_back("base", format_rational(*base));
  r.meta.emplace_back("coordinates", "one per generator");
  r.lines.push_back("weights (" + std::to_string(ws.real_weights.size()) + "):");
  for (std::size_t i = 0; i < ws.real_weights.size(); ++i) {
    const RealWeight& rw = ws.real_weights[i];
    int nil = 1;
    bool real = true;
    for (int c : rw.complex_weights) {
      nil = std::max(nil, ws.complex_weights[static_cast<std::size_t>(c)].nilpotence);
      real = real && ws.complex_weights[static_cast<std::size_t>(c)].is_real;
    }
    const int wi = static_cast<int>(i);
    const auto& verts = wp.vertices();
    std::string where = std::find(verts.begin(), verts.end(), wi) != verts.end() ? "vertex"
                        : wp.lattice.on_boundary(wi)                              ? "boundary"
                                                                                  : "interior";
    std::string line = "  mu" + std::to_string(i + 1) + " = " + (rw.exponents ? fmt(*rw.exponents) : fmt(rw.value));
    if (rw.exponents) line += "  log " + fmt(rw.value);
    line += "  dim " + std::to_string(rw.multiplicity) + "  nilpotence " + std::to_string(nil) +
            (real ? "" : "  complex") + "  " + where;
    r.lines.push_back(line);
  }
  r.lines.push_back("face lattice (dim " + std::to_string(wp.dim()) + "):");
  for (int k = 0; k <= wp.dim(); ++k) {
    auto faces = wp.lattice.faces_of_dim(k);
    if (k == wp.dim()) faces.push_back(static_cast<int>(wp.lattice.faces.size()) - 1);
    r.lines.push_back("  dim " + std::to_string(k) + ": " + std::to_string(faces.size()) + " face(s)");
    for (int fi : faces) {
      std::vector<std::string> names;
      for (int w : wp.lattice.faces[static_cast<std::size_t>(fi)]) names.push_back("mu" + std::to_string(w + 1));
      r.lines.push_back("    " + fmt_set(names));
    }
  }
  int total = 0;
  for (const auto& rw : ws.real_weights) total += rw.multiplicity;
  r.add("weight spaces fill the ambient space", total == rep.dim() ? Verdict::Pass : Verdict::Fail)
      .values.emplace_back("total", std::to_string(total));
  return finish(r, g, out);
}

void add_crosscheck(Report& r, const WeightSystem& ws, const std::vector<long>& dir, int n_max, double tol) {
  CrosscheckReport c = face_prediction_crosscheck(ws, dir, n_max, tol);
  std::vector<std::string> names;
  for (int w : c.face_weights) {
    const RealWeight& rw = ws.real_weights[static_cast<std::size_t>(w)];
    names.push_back(rw.exponents ? fmt(*rw.exponents) : fmt(rw.value));
  }
  r.lines.push_back("direction " + fmt(dir) + ": predicted face " + fmt_set(names) + ", k = " + std::to_string(c.k));
  auto& rec = r.add("crosscheck " + fmt(dir), c.verdict);
  rec.values.emplace_back("k", std::to_string(c.k));
  if (!c.empirical.gaps.empty()) {
    rec.values.emplace_back("attracting", format_double(c.attracting_distance));
    rec.values.emplace_back("repelling", format_double(c.repelling_distance));
    rec.values.emplace_back("last_gap", format_double(c.empirical.gaps.back()));
  }
  if (!c.note.empty()) rec.values.emplace_back("note", "\"" + c.note + "\"");
}

int cmd_dynamics(const Globals& g, const std::string& path, const std::string& group, const std::string& dir_text,
                 int m, int n_max, const std::string& experiment, std::ostream& out) {
  RepFile f = load_repfile(path);
  std::vector<std::vector<long>> dirs;
  double tol = g.tol.value_or(1e-8);
  if (!experiment.empty()) {
    const ExperimentSpec& e = f.experiment(experiment);
    dirs = e.directions;
    if (e.m) m = *e.m;
    if (e.n_max) n_max = *e.n_max;
    if (e.tol && !g.tol) tol = *e.tol;
  }
  if (!dir_text.empty()) dirs = {parse_direction(dir_text)};
  if (dirs.empty()) throw ParseError("no direction given");
  Report r = new_report("dynamics " + group + " m=" + std::to_string(m) + " n_max=" + std::to_string(n_max), &f, g, tol);
  r.tol = tol;
  AbelianRep rep = f.group_rep(group, r.mode);
  for (const auto& d : dirs)
    if (static_cast<int>(d.size()) != rep.rank()) throw ParseError("direction length differs from the group rank");
  if (m > 1) rep = sym_power_rep(rep, m);
  std::optional<Rational> base = r.mode == ScalarMode::Exact ? f.group(group).base : std::nullopt;
  WeightSystem ws = decompose(rep, base);
  for (const auto& d : dirs) add_crosscheck(r, ws, d, n_max, tol);
  return finish(r, g, out);
}

void list_simplices(Report& r, const SimplexPair& pair) {
  r.lines.push_back("S_H vertices (" + std::to_string(pair.size()) + "):");
  for (int i = 0; i < pair.size(); ++i)
    r.lines.push_back("  " + pair.primal_labels[static_cast<std::size_t>(i)] + "  " +
                      (pair.exact() ? fmt((*pair.exact_primal)[static_cast<std::size_t>(i)])
                                    : fmt(pair.primal[static_cast<std::size_t>(i)])));
  r.lines.push_back("S_H* vertices (" + std::to_string(pair.size()) + "):");
  for (int i = 0; i < pair.size(); ++i)
    r.lines.push_back("  " + pair.dual_labels[static_cast<std::size_t>(i)] + "  " +
                      (pair.exact() ? fmt((*pair.exact_dual)[static_cast<std::size_t>(i)])
                                    : fmt(pair.dual[static_cast<std::size_t>(i)])));
  r.lines.push_back("primal monomials: " + fmt_set(pair.primal_labels));
  r.lines.push_back("dual monomials: " + fmt_set(pair.dual_labels));
  r.lines.push_back("cone membership: a point is in the region when one sign of its lift pairs positively with all " +
                    std::to_string(pair.size()) + " dual vertex covectors");
}

int cmd_peripheral(const Globals& g, const std::string& path, const std::string& group, int m,
                   const std::string& experiment, std::ostream& out) {
  RepFile f = load_repfile(path);
  std::optional<ExperimentSpec> spec;
  if (!experiment.empty()) {
    spec = f.experiment(experiment);
    if (spec->m) m = *spec->m;
  }
  Report r = new_report("peripheral " + group + " m=" + std::to_string(m) + (experiment.empty() ? "" : " " + experiment),
                        &f, g, 1e-6);
  const GroupSpec& gs = f.group(group);
  AbelianRep rep = f.group_rep(group, r.mode);
  PeripheralModel model = build_model(rep, gs.hints, r.mode == ScalarMode::Exact ? gs.base : std::nullopt);
  SimplexPair pair = build_simplices(model, m);
  list_simplices(r, pair);

  const int k = model.rank();
  const auto expected = boundary_monomial_count(k, m);
  r.add("vertex count", pair.size() == expected ? Verdict::Pass : Verdict::Fail)
      .values.emplace_back("count", std::to_string(pair.size()) + "/" + std::to_string(expected));
  r.add("duality incidence", Verdict::Pass);
  FlagBoundarySample flags = sample_flag_boundary(pair, 20, g.seed);
  bool flags_ok = std::all_of(flags.flags.begin(), flags.flags.end(),
                              [&](const BoundaryFlag& b) { return verify_boundary_flag(pair, b); });
  r.add("boundary flags", flags_ok ? Verdict::Pass : Verdict::Fail)
      .values.emplace_back("samples", std::to_string(flags.flags.size()));

  AttractionRegion region = attraction_region(pair);
  VecD bary = VecD::Zero(model.dim());
  for (const VecD& l : model.lifts) bary += l;
  Membership inside = region_membership(region, veronese(ProjectivePoint<double>(bary), m));
  Membership vertex = region_membership(region, ProjectivePoint<double>(pair.primal.front()));
  r.add("cone membership sanity", inside.member && !vertex.member ? Verdict::Pass : Verdict::Fail)
      .values.emplace_back("barycenter_margin", format_double(inside.margin));

  if (spec) {
    const std::string kind = spec->kind.value_or("attraction");
    if (kind == "attraction") {
      AttractionConfig cfg;
      if (spec->samples) cfg.samples = *spec->samples;
      cfg.seed = spec->seed.value_or(g.seed);
      cfg.tol = g.tol.value_or(spec->tol.value_or(cfg.tol));
      if (spec->margin) cfg.margin = *spec->margin;
      const int n_max = spec->n_max.value_or(40);
      for (const auto& dir : spec->directions) {
        AttractionReport a = attraction_experiment(pair, region, dir, n_max, cfg);
        std::vector<std::string> names;
        for (int i : a.predicted_face) names.push_back(pair.primal_labels[static_cast<std::size_t>(i)]);
        r.lines.push_back("direction " + fmt(dir) + ": predicted face " + fmt_set(names));
        for (int n = 0; n <= n_max; n += std::max(1, n_max / 8))
          r.lines.push_back("  n=" + std::to_string(n) + "  boundary " +
                            format_double(a.boundary_distance[static_cast<std::size_t>(n)]) + "  face " +
                            format_double(a.face_distance[static_cast<std::size_t>(n)]));
        auto& rec = r.add("attraction " + fmt(dir), a.verdict);
        rec.values.emplace_back("boundary", format_double(a.boundary_distance.back()));
        rec.values.emplace_back("face", format_double(a.face_distance.back()));
        rec.values.emplace_back("limits_match", a.limits_match ? "true" : "false");
        if (a.contraction) rec.values.emplace_back("attracting", format_double(a.attracting_distance));
        if (!a.note.empty()) rec.values.emplace_back("note", "\"" + a.note + "\"");
      }
    } else if (kind == "perturbation") {
      PerturbationConfig cfg;
      if (!spec->epsilons.empty()) cfg.epsilons = spec->epsilons;
      if (spec->samples) cfg.k_samples = *spec->samples;
      if (spec->margin) cfg.k_margin = *spec->margin;
      if (spec->t_max) cfg.t_max = *spec->t_max;
      if (spec->u_margin) cfg.u_margin = *spec->u_margin;
      cfg.seed = spec->seed.value_or(g.seed);
      PerturbationReport p = perturbation_experiment(model, pair, conjugation_family(pair, cfg.seed), cfg);
      r.lines.push_back("family: " + p.description);
      r.lines.push_back("unperturbed T_min: " + std::to_string(p.base_t_min));
      r.lines.push_back("  epsilon  vertex_disp  dual_disp  weight_disp  T_min  contained");
      bool contained = p.base_t_min > 0;
      for (const auto& s : p.steps) {
        if (!s.error.empty()) {
          r.lines.push_back("  " + format_double(s.epsilon) + "  error: " + s.error);
          continue;
        }
        r.lines.push_back("  " + format_double(s.epsilon) + "  " + format_double(s.vertex_displacement) + "  " +
                          format_double(s.dual_vertex_displacement) + "  " + format_double(s.weight_displacement) +
                          "  " + std::to_string(s.t_min) + "  " + (s.contained_from_base_t_min ? "yes" : "no") +
                          (s.failing_h ? "  failing h " + fmt(*s.failing_h) : ""));
        if (s.epsilon <= 1e-3) contained = contained && s.contained_from_base_t_min;
      }
      auto& rec = r.add("perturbation", p.ok && p.monotone && contained && p.displacement_constant <= 50.0 ? Verdict::Pass : Verdict::Fail);
      rec.values.emplace_back("displacement_constant", format_double(p.displacement_constant));
      rec.values.emplace_back("monotone", p.monotone ? "true" : "false");
      rec.values.emplace_back("base_t_min", std::to_string(p.base_t_min));
    } else {
      throw ParseError("experiment " + experiment + ": unsupported kind '" + kind + "' for peripheral");
    }
  }
  return finish(r, g, out);
}

int cmd_orbit(const Globals& g, const std::string& path, const std::string& gens_text, int max_len, int k,
              const std::string& domain_name, std::size_t cap, std::ostream& out) {
  RepFile f = load_repfile(path);
  Report r = new_report("orbit " + gens_text + " max_len=" + std::to_string(max_len) + " k=" + std::to_string(k), &f,
                        g, 1e-9);
  std::vector<std::string> names = split(gens_text, ',');
  if (names.empty()) throw ParseError("no generators given");
  std::vector<MatD> gens;
  for (const auto& n : names) gens.push_back(to_double(f.matrix(n)));
  std::optional<ConvexDomain> dom;
  if (!domain_name.empty()) dom = f.build_domain(domain_name);
  OrbitCloud cloud = orbit_limit_flags(gens, max_len, k, cap, dom ? &*dom : nullptr, r.tol);

  std::ostringstream tsv;
  tsv << "# words " << cloud.words << "\n# truncated " << (cloud.truncated ? "true" : "false") << "\n";
  tsv << "# inverse_pairs";
  for (auto [a, b] : cloud.inverse_pairs) tsv << " " << names[static_cast<std::size_t>(a)] << ":" << names[static_cast<std::size_t>(b)];
  tsv << "\nword\tgap";
  const int d = static_cast<int>(gens.front().rows());
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < d; ++i) tsv << "\tu" << j + 1 << "_" << i + 1;
  if (dom) tsv << "\tface\tface_distance";
  tsv << "\n";
  for (const auto& rec : cloud.records) {
    std::string word;
    for (std::size_t i = 0; i < rec.word.size(); ++i)
      word += (i ? "." : "") + names[static_cast<std::size_t>(rec.word[i])];
    tsv << word << "\t" << format_double(rec.gap);
    MatD b = rec.flag ? MatD(rec.flag->point().coords()) : MatD(orthonormal_basis(rec.attracting.basis(), 1e-12));
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      for (Eigen::Index i = 0; i < b.rows(); ++i) tsv << "\t" << format_double(b(i, j));
    if (dom) tsv << "\t" << rec.nearest_face << "\t" << format_double(rec.face_distance);
    tsv << "\n";
  }
  if (!g.out.empty()) {
    std::ofstream o(g.out);
    if (!o) throw ParseError("cannot write " + g.out);
    o << tsv.str();
    r.attachments.push_back(g.out);
  } else {
    r.lines.push_back(tsv.str());
  }
  r.meta.emplace_back("words", std::to_string(cloud.words));
  r.meta.emplace_back("truncated", cloud.truncated ? "true" : "false");
  r.add("record count", cloud.records.size() == cloud.words ? Verdict::Pass : Verdict::Fail)
      .values.emplace_back("records", std::to_string(cloud.records.size()));
  return finish(r, g, out, false);
}

// Random interior point: a random point on a random chord through the
// interior point.
VecD random_interior(const ConvexDomain& dom, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.02, 0.98);
  ProjectivePoint<double> p = dom.interior_point();
  const VecD p0 = dom.chart_lift(p);
  const VecD& c = dom.chart_d();
  while (true) {
    VecD q(dom.dim());
    for (int i = 0; i < dom.dim(); ++i) q(i) = gauss(rng);
    q -= (c.dot(q) / c.squaredNorm()) * c;  // stay in the chart
    if (q.norm() < 1e-6) continue;
    q *= 1e-3 * std::max(1.0, p0.norm()) / q.norm();
    ProjectivePoint<double> y{VecD(p0 + q)};
    if (!dom.contains(y)) continue;
    auto [u, v] = line_boundary_points(dom, p, y);
    VecD lu = dom.chart_lift(u), lv = dom.chart_lift(v);
    double t = unit(rng);
    return (1 - t) * lu + t * lv;
  }
}

int cmd_hilbert(const Globals& g, const std::string& path, const std::string& domain, const std::string& sub,
                const std::string& x_text, const std::string& y_text, int samples, std::ostream& out) {
  RepFile f = load_repfile(path);
  Report r = new_report("hilbert " + domain + " " + sub, &f, g, 1e-9);
  ConvexDomain dom = f.build_domain(domain);
  r.meta.emplace_back("kind", std::string(to_string(dom.kind())));
  auto point = [&](const std::string& s, const char* what) {
    if (s.empty()) throw ParseError(std::string("missing --") + what);
    VecQ v = parse_point(s);
    if (v.size() != dom.dim()) throw ParseError(std::string("--") + what + " has the wrong dimension");
    if (!dom.contains(ProjectivePoint<double>(to_double(v)), 0.0))
      throw ParseError(std::string("--") + what + " is not an interior point");
    return v;
  };
  if (sub == "distance") {
    VecQ x = point(x_text, "x"), y = point(y_text, "y");
    double dist = dom.is_polytope() && r.mode == ScalarMode::Exact
                      ? hilbert_distance(dom, ProjectivePoint<Rational>(x), ProjectivePoint<Rational>(y))
                      : hilbert_distance(dom, ProjectivePoint<double>(to_double(x)), ProjectivePoint<double>(to_double(y)));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", dist);
    r.lines.push_back(std::string("distance ") + buf);
    r.add("distance", Verdict::Pass).values.emplace_back("d", buf);
  } else if (sub == "face") {
    if (x_text.empty()) throw ParseError("missing --x");
    VecQ x = parse_point(x_text);
    if (x.size() != dom.dim()) throw ParseError("--x has the wrong dimension");
    BoundaryFace bf = dom.is_polytope() ? boundary_face(dom, ProjectivePoint<Rational>(x))
                                        : boundary_face(dom, ProjectivePoint<double>(to_double(x)), r.tol);
    std::vector<std::string> facets, verts;
    for (int i : bf.active_facets) facets.push_back(std::to_string(i + 1));
    for (int i : bf.vertices) verts.push_back(std::to_string(i + 1));
    r.lines.push_back("face dim " + std::to_string(bf.dim) + "  active facets " + fmt_set(facets) + "  vertices " +
                      fmt_set(verts));
    r.add("face", Verdict::Pass).values.emplace_back("dim", std::to_string(bf.dim));
  } else if (sub == "dual") {
    ConvexDomain dual = dual_domain(dom);
    r.lines.push_back("dual vertices (" + std::to_string(dual.vertices().size()) + "):");
    for (const VecQ& v : dual.vertices()) r.lines.push_back("  " + fmt(v));
    ConvexDomain back = dual_domain(dual);
    r.add("reflexivity", same_vertex_set(back, dom) ? Verdict::Pass : Verdict::Fail);
  } else if (sub == "axioms") {
    std::mt19937_64 rng(g.seed);
    double worst_tri = 0.0, worst_sym = 0.0, worst_zero = 0.0, worst_inv = 0.0;
    MatD a(dom.dim(), dom.dim());
    std::normal_distribution<double> gauss;
    do {
      a = MatD::Identity(dom.dim(), dom.dim());
      for (int i = 0; i < dom.dim(); ++i)
        for (int j = 0; j < dom.dim(); ++j) a(i, j) += 0.3 * gauss(rng);
    } while (std::abs(a.determinant()) < 0.1);
    ConvexDomain moved = transform(dom, a);
    for (int s = 0; s < samples; ++s) {
      ProjectivePoint<double> x(random_interior(dom, rng)), y(random_interior(dom, rng)), z(random_interior(dom, rng));
      double dxy = hilbert_distance(dom, x, y), dyz = hilbert_distance(dom, y, z), dxz = hilbert_distance(dom, x, z);
      worst_tri = std::max(worst_tri, dxz - dxy - dyz);
      worst_sym = std::max(worst_sym, std::abs(dxy - hilbert_distance(dom, y, x)));
      worst_zero = std::max(worst_zero, hilbert_distance(dom, x, x));
      double moved_d = hilbert_distance(moved, ProjectivePoint<double>(VecD(a * x.coords())),
                                        ProjectivePoint<double>(VecD(a * y.coords())));
      worst_inv = std::max(worst_inv, std::abs(moved_d - dxy) / std::max(1.0, dxy));
    }
    r.add("triangle inequality", worst_tri <= r.tol ? Verdict::Pass : Verdict::Fail)
        .values.emplace_back("violation", format_double(worst_tri));
    r.add("symmetry", worst_sym <= r.tol ? Verdict::Pass : Verdict::Fail)
        .values.emplace_back("error", format_double(worst_sym));
    r.add("identity", worst_zero <= r.tol ? Verdict::Pass : Verdict::Fail)
        .values.emplace_back("error", format_double(worst_zero));
    r.add("projective invariance", worst_inv <= r.tol ? Verdict::Pass : Verdict::Fail)
        .values.emplace_back("error", format_double(worst_inv));
    r.meta.emplace_back("samples", std::to_string(samples));
  } else {
    throw ParseError("unknown hilbert subcommand '" + sub + "' (distance, face, dual, axioms)");
  }
  return finish(r, g, out);
}

int cmd_verify(const Globals& g, std::string path, std::ostream& out) {
  if (path.empty()) path = data_dir() + "/cusp.json";
  RepFile f = load_repfile(path);
  Report r = new_report("verify-paper-example", &f, g, 1e-8);
  r.mode = ScalarMode::Exact;
  const GroupSpec& gs = f.group("cusp");
  AbelianRep rep = f.group_rep("cusp", ScalarMode::Exact);

  auto t0 = std::chrono::steady_clock::now();
  PeripheralModel model = build_model(rep, gs.hints, gs.base);
  SimplexPair pair = build_simplices(model, 2);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::set<std::string> primal(pair.primal_labels.begin(), pair.primal_labels.end());
  std::set<std::string> dual(pair.dual_labels.begin(), pair.dual_labels.end());
  const std::set<std::string> want_primal{"v1^2", "v2^2", "v3^2", "v1v2", "v2v3", "v1v3"};
  const std::set<std::string> want_dual{"(v1*)^2", "(v2*)^2", "(v3*)^2", "v1*v2*", "v2*v3*", "v1*v3*"};
  list_simplices(r, pair);
  auto& rec1 = r.add("simplex vertices", primal == want_primal && dual == want_dual && secs < 1.0 ? Verdict::Pass
                                                                                                  : Verdict::Fail);
  rec1.values.emplace_back("seconds", format_double(secs));

  AbelianRep sym = sym_power_rep(rep, 2);
  WeightSystem ws = decompose(sym, gs.base);
  struct Case {
    std::vector<long> dir;
    std::set<std::string> face;
  };
  const std::vector<Case> cases{{{2, 1}, {"v1^2"}}, {{1, 2}, {"v1^2", "v2^2", "v1v2"}}};
  for (std::size_t c = 0; c < cases.size(); ++c) {
    auto tc = std::chrono::steady_clock::now();
    CrosscheckReport x = face_prediction_crosscheck(ws, cases[c].dir, 30, r.tol);
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - tc).count();
    // Direct comparison with the span of the expected vertex monomials.
    MatD span(pair.ambient(), static_cast<Eigen::Index>(cases[c].face.size()));
    int col = 0;
    for (int i = 0; i < pair.size(); ++i)
      if (cases[c].face.count(pair.primal_labels[static_cast<std::size_t>(i)]))
        span.col(col++) = pair.primal[static_cast<std::size_t>(i)];
    double direct = x.empirical.attracting ? subspace_gap(Subspace<double>(span), *x.empirical.attracting) : 1.0;
    std::set<std::string> predicted;
    for (int w : x.face_weights)
      for (int i = 0; i < pair.size(); ++i)
        if (pair.vertex_sym_weight[static_cast<std::size_t>(i)] == w) predicted.insert(pair.primal_labels[static_cast<std::size_t>(i)]);
    const bool ok = x.verdict == Verdict::Pass && direct <= r.tol && predicted == cases[c].face &&
                    x.face_weights.size() == cases[c].face.size() && s < 1.0;
    auto& rec = r.add("dynamics " + std::to_string(c + 1) + " " + fmt(cases[c].dir), ok ? Verdict::Pass : Verdict::Fail);
    rec.values.emplace_back("distance", format_double(direct));
    rec.values.emplace_back("predicted", "\"" + [&] {
      std::vector<std::string> v(predicted.begin(), predicted.end());
      return fmt_set(v);
    }() + "\"");
    rec.values.emplace_back("seconds", format_double(s));
  }
  r.add("sym_dim(4, 2) = 10", sym_dim(4, 2) == 10 ? Verdict::Pass : Verdict::Fail);
  r.add("vertex count (k=2, m=2) = 6", boundary_monomial_count(2, 2) == 6 ? Verdict::Pass : Verdict::Fail);
  return finish(r, g, out);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Projective dynamics of abelian and symmetric-power representations"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--tol", g.tol, "Tolerance override");
  app.add_option("--mode", g.mode, "Scalar mode (exact or float)")->check(CLI::IsMember({"exact", "float"}));
  app.add_option("--out", g.out, "Machine-readable output path");

  std::string file, name, group, dir_text, experiment, domain, sub, x_text, y_text, gens_text;
  int m = 2, n_max = 30, max_len = 6, k = 1, samples = 1000;
  std::size_t cap = 200000;

  auto* sympow = app.add_subcommand("sympow", "Print tau_m of a matrix with spot checks");
  sympow->add_option("file", file)->required();
  sympow->add_option("matrix", name)->required();
  sympow->add_option("m", m)->required()->check(CLI::PositiveNumber);

  auto* weights = app.add_subcommand("weights", "Weight table and weight polytope face lattice");
  weights->add_option("file", file)->required();
  weights->add_option("group", group)->required();

  auto* dynamics = app.add_subcommand("dynamics", "Predicted versus empirical attracting subspaces");
  dynamics->add_option("file", file)->required();
  dynamics->add_option("group", group)->required();
  dynamics->add_option("--direction", dir_text, "Comma-separated generator exponents");
  dynamics->add_option("--m", m, "Symmetric power degree")->check(CLI::PositiveNumber);
  dynamics->add_option("--n-max", n_max, "Sequence length")->check(CLI::NonNegativeNumber);
  dynamics->add_option("--experiment", experiment, "Experiment block supplying directions");

  auto* peripheral = app.add_subcommand("peripheral", "Invariant simplices and attraction experiments");
  peripheral->add_option("file", file)->required();
  peripheral->add_option("group", group)->required();
  peripheral->add_option("--m", m, "Symmetric power degree")->check(CLI::PositiveNumber);
  peripheral->add_option("--experiment", experiment, "Experiment block to run");

  auto* orbit = app.add_subcommand("orbit", "Point cloud of attracting subspaces over reduced words");
  orbit->add_option("file", file)->required();
  orbit->add_option("generators", gens_text, "Comma-separated matrix names")->required();
  orbit->add_option("--max-len", max_len)->check(CLI::PositiveNumber);
  orbit->add_option("--k", k)->check(CLI::PositiveNumber);
  orbit->add_option("--domain", domain, "Domain for nearest-face tags");
  orbit->add_option("--word-cap", cap);

  auto* hilbert = app.add_subcommand("hilbert", "Hilbert metric, boundary faces and duals");
  hilbert->add_option("file", file)->required();
  hilbert->add_option("domain", domain)->required();
  hilbert->add_option("action", sub, "distance, face, dual or axioms")->required();
  hilbert->add_option("--x", x_text, "Comma-separated coordinates");
  hilbert->add_option("--y", y_text, "Comma-separated coordinates");
  hilbert->add_option("--samples", samples)->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify-paper-example", "Reproduce the bundled cusp example");
  verify->add_option("file", file, "Example file (defaults to the bundled one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kPass;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kParseError;
  }

  try {
    if (*sympow) return cmd_sympow(g, file, name, m, out);
    if (*weights) return cmd_weights(g, file, group, out);
    if (*dynamics) return cmd_dynamics(g, file, group, dir_text, m, n_max, experiment, out);
    if (*peripheral) return cmd_peripheral(g, file, group, m, experiment, out);
    if (*orbit) return cmd_orbit(g, file, gens_text, max_len, k, domain, cap, out);
    if (*hilbert) return cmd_hilbert(g, file, domain, sub, x_text, y_text, samples, out);
    if (*verify) return cmd_verify(g, file, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kParseError;
  } catch (const MathError& e) {
    err << "error: " << e.what() << "\n";
    return kParseError;
  }
  return kParseError;
}

}  // namespace projdyn::cli
