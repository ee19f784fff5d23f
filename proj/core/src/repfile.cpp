#include "projdyn/repfile.hpp"

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace projdyn {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw ParseError(where + ": " + what); }

template <class Items>
const auto& lookup(const Items& items, const std::string& name, const char* what) {
  for (const auto& [n, v] : items)
    if (n == name) return v;
  throw ParseError(std::string("unknown ") + what + " '" + name + "'");
}

Rational read_scalar(const json& j, const std::string& where) {
  try {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long long>());
  } catch (const std::exception& e) {
    fail(where, e.what());
  }
  fail(where, "expected a rational string");
}

VecQ read_vector(const json& j, int dim, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array");
  if (dim >= 0 && static_cast<int>(j.size()) != dim) fail(where, "expected " + std::to_string(dim) + " entries");
  VecQ v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = read_scalar(j[i], where);
  return v;
}

MatQ read_matrix(const json& j, int dim, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) fail(where, "expected " + std::to_string(dim) + " rows");
  MatQ m(dim, dim);
  for (int r = 0; r < dim; ++r) m.row(r) = read_vector(j[static_cast<std::size_t>(r)], dim, where).transpose();
  return m;
}

json write_vector(const VecQ& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(format_rational(v(i)));
  return a;
}

json write_matrix(const MatQ& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(write_vector(m.row(r).transpose()));
  return a;
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(where, "unknown field '" + key + "'");
  }
}

std::string_view kind_name(DomainKind k) {
  switch (k) {
    case DomainKind::PolytopeV: return "polytope-v";
    case DomainKind::PolytopeH: return "polytope-h";
    case DomainKind::Ellipsoid: return "ellipsoid";
  }
  return "?";
}

template <class T>
T get_as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    fail(where, e.what());
  }
}

}  // namespace

const MatQ& RepFile::matrix(const std::string& name) const { return lookup(matrices, name, "matrix"); }
const GroupSpec& RepFile::group(const std::string& name) const { return lookup(groups, name, "group"); }
const DomainSpec& RepFile::domain(const std::string& name) const { return lookup(domains, name, "domain"); }
const ExperimentSpec& RepFile::experiment(const std::string& name) const {
  return lookup(experiments, name, "experiment");
}

AbelianRep RepFile::group_rep(const std::string& name, std::optional<ScalarMode> m, const NumericConfig& cfg) const {
  const GroupSpec& g = group(name);
  if (m.value_or(mode) == ScalarMode::Exact) {
    std::vector<MatQ> gens;
    for (const auto& n : g.generators) gens.push_back(matrix(n));
    return AbelianRep::exact(gens);
  }
  std::vector<MatD> gens;
  for (const auto& n : g.generators) gens.push_back(to_double(matrix(n)));
  return AbelianRep::floating(gens, cfg);
}

ConvexDomain RepFile::build_domain(const std::string& name) const {
  const DomainSpec& d = domain(name);
  switch (d.kind) {
    case DomainKind::PolytopeV: return ConvexDomain::polytope_v(d.vectors, d.chart);
    case DomainKind::PolytopeH: return ConvexDomain::polytope_h(d.vectors, d.chart);
    case DomainKind::Ellipsoid: return ConvexDomain::ellipsoid(to_double(d.form));
  }
  throw ParseError("unknown domain kind");
}

RepFile parse_repfile(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed file: ") + e.what());
  }
  check_keys(root, {"version", "mode", "dim", "matrices", "groups", "domains", "experiments"}, "file");
  if (!root.contains("version") || root["version"] != kRepFileVersion)
    fail("file", std::string("version must be \"") + kRepFileVersion + "\"");
  RepFile f;
  try {
    f.mode = parse_scalar_mode(get_as<std::string>(root.at("mode"), "mode"));
  } catch (const json::exception&) {
    fail("file", "missing mode");
  } catch (const MathError& e) {
    fail("mode", e.what());
  }
  if (!root.contains("dim")) fail("file", "missing dim");
  f.dim = get_as<int>(root["dim"], "dim");
  if (f.dim < 1) fail("dim", "must be positive");

  if (root.contains("matrices")) {
    if (!root["matrices"].is_object()) fail("matrices", "expected an object");
    for (const auto& [name, m] : root["matrices"].items())
      f.matrices.emplace_back(name, read_matrix(m, f.dim, "matrix " + name));
  }
  if (root.contains("groups")) {
    if (!root["groups"].is_object()) fail("groups", "expected an object");
    for (const auto& [name, g] : root["groups"].items()) {
      const std::string where = "group " + name;
      check_keys(g, {"generators", "base", "hints"}, where);
      GroupSpec spec;
      if (!g.contains("generators") || !g["generators"].is_array() || g["generators"].empty())
        fail(where, "needs a nonempty generator list");
      for (const auto& n : g["generators"]) {
        auto s = get_as<std::string>(n, where);
        try {
          f.matrix(s);
        } catch (const ParseError& e) {
          fail(where, e.what());
        }
        spec.generators.push_back(s);
      }
      if (g.contains("base")) spec.base = read_scalar(g["base"], where + " base");
      if (g.contains("hints"))
        for (const auto& h : g["hints"]) spec.hints.push_back(read_vector(h, f.dim, where + " hints"));
      f.groups.emplace_back(name, std::move(spec));
    }
  }
  if (root.contains("domains")) {
    if (!root["domains"].is_object()) fail("domains", "expected an object");
    for (const auto& [name, d] : root["domains"].items()) {
      const std::string where = "domain " + name;
      check_keys(d, {"kind", "dim", "vertices", "covectors", "chart", "form"}, where);
      DomainSpec spec;
      std::string kind = d.contains("kind") ? get_as<std::string>(d["kind"], where) : "";
      spec.dim = d.contains("dim") ? get_as<int>(d["dim"], where) : f.dim;
      if (spec.dim < 1) fail(where, "dim must be positive");
      if (kind == "polytope-v" || kind == "polytope-h") {
        spec.kind = kind == "polytope-v" ? DomainKind::PolytopeV : DomainKind::PolytopeH;
        const char* field = kind == "polytope-v" ? "vertices" : "covectors";
        if (!d.contains(field) || !d[field].is_array()) fail(where, std::string("needs ") + field);
        for (const auto& v : d[field]) spec.vectors.push_back(read_vector(v, spec.dim, where));
        if (d.contains("chart")) spec.chart = read_vector(d["chart"], spec.dim, where + " chart");
      } else if (kind == "ellipsoid") {
        spec.kind = DomainKind::Ellipsoid;
        if (!d.contains("form")) fail(where, "needs form");
        spec.form = read_matrix(d["form"], spec.dim, where + " form");
      } else {
        fail(where, "kind must be polytope-v, polytope-h or ellipsoid");
      }
      f.domains.emplace_back(name, std::move(spec));
    }
  }
  if (root.contains("experiments")) {
    if (!root["experiments"].is_object()) fail("experiments", "expected an object");
    for (const auto& [name, e] : root["experiments"].items()) {
      const std::string where = "experiment " + name;
      check_keys(e, {"kind", "group", "directions", "m", "n_max", "samples", "seed", "tol", "margin", "epsilons",
                     "t_max", "u_margin"},
                 where);
      ExperimentSpec spec;
      if (e.contains("kind")) spec.kind = get_as<std::string>(e["kind"], where);
      if (e.contains("group")) {
        spec.group = get_as<std::string>(e["group"], where);
        try {
          f.group(*spec.group);
        } catch (const ParseError& err) {
          fail(where, err.what());
        }
      }
      if (e.contains("directions")) {
        spec.directions = get_as<std::vector<std::vector<long>>>(e["directions"], where);
        if (spec.group) {
          const std::size_t rank = f.group(*spec.group).generators.size();
          for (const auto& dir : spec.directions)
            if (dir.size() != rank) fail(where, "direction length differs from the group rank");
        }
      }
      if (e.contains("m")) spec.m = get_as<int>(e["m"], where);
      if (e.contains("n_max")) spec.n_max = get_as<int>(e["n_max"], where);
      if (e.contains("samples")) spec.samples = get_as<int>(e["samples"], where);
      if (e.contains("seed")) spec.seed = get_as<std::uint64_t>(e["seed"], where);
      if (e.contains("tol")) spec.tol = get_as<double>(e["tol"], where);
      if (e.contains("margin")) spec.margin = get_as<double>(e["margin"], where);
      if (e.contains("epsilons")) spec.epsilons = get_as<std::vector<double>>(e["epsilons"], where);
      if (e.contains("t_max")) spec.t_max = get_as<int>(e["t_max"], where);
      if (e.contains("u_margin")) spec.u_margin = get_as<double>(e["u_margin"], where);
      f.experiments.emplace_back(name, std::move(spec));
    }
  }
  return f;
}

RepFile load_repfile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_repfile(buf.str());
}

std::string emit_repfile(const RepFile& f) {
  json root;
  root["version"] = kRepFileVersion;
  root["mode"] = std::string(to_string(f.mode));
  root["dim"] = f.dim;
  if (!f.matrices.empty()) {
    json m = json::object();
    for (const auto& [name, mat] : f.matrices) m[name] = write_matrix(mat);
    root["matrices"] = m;
  }
  if (!f.groups.empty()) {
    json gs = json::object();
    for (const auto& [name, g] : f.groups) {
      json j;
      j["generators"] = g.generators;
      if (g.base) j["base"] = format_rational(*g.base);
      if (!g.hints.empty()) {
        json hs = json::array();
        for (const auto& h : g.hints) hs.push_back(write_vector(h));
        j["hints"] = hs;
      }
      gs[name] = j;
    }
    root["groups"] = gs;
  }
  if (!f.domains.empty()) {
    json ds = json::object();
    for (const auto& [name, d] : f.domains) {
      json j;
      j["kind"] = std::string(kind_name(d.kind));
      if (d.dim != f.dim) j["dim"] = d.dim;
      if (d.kind == DomainKind::Ellipsoid) {
        j["form"] = write_matrix(d.form);
      } else {
        json vs = json::array();
        for (const auto& v : d.vectors) vs.push_back(write_vector(v));
        j[d.kind == DomainKind::PolytopeV ? "vertices" : "covectors"] = vs;
        if (d.chart) j["chart"] = write_vector(*d.chart);
      }
      ds[name] = j;
    }
    root["domains"] = ds;
  }
  if (!f.experiments.empty()) {
    json es = json::object();
    for (const auto& [name, e] : f.experiments) {
      json j = json::object();
      if (e.kind) j["kind"] = *e.kind;
      if (e.group) j["group"] = *e.group;
      if (!e.directions.empty()) j["directions"] = e.directions;
      if (e.m) j["m"] = *e.m;
      if (e.n_max) j["n_max"] = *e.n_max;
      if (e.samples) j["samples"] = *e.samples;
      if (e.seed) j["seed"] = *e.seed;
      if (e.tol) j["tol"] = *e.tol;
      if (e.margin) j["margin"] = *e.margin;
      if (!e.epsilons.empty()) j["epsilons"] = e.epsilons;
      if (e.t_max) j["t_max"] = *e.t_max;
      if (e.u_margin) j["u_margin"] = *e.u_margin;
      es[name] = j;
    }
    root["experiments"] = es;
  }
  return root.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Reports

CheckRecord& Report::add(std::string name, Verdict v) {
  checks.push_back(CheckRecord{std::move(name), v, {}});
  return checks.back();
}

Verdict Report::overall() const {
  bool inconclusive = false;
  for (const auto& c : checks) {
    if (c.verdict == Verdict::Fail) return Verdict::Fail;
    if (c.verdict == Verdict::Inconclusive) inconclusive = true;
  }
  return inconclusive ? Verdict::Inconclusive : Verdict::Pass;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string report_text(const Report& r) {
  std::ostringstream out;
  out << "# " << r.command << "\n";
  out << "# seed " << r.seed << ", tol " << format_double(r.tol) << ", mode " << to_string(r.mode) << ", version "
      << kRepFileVersion << "\n";
  for (const auto& [k, v] : r.meta) out << "# " << k << ": " << v << "\n";
  for (const auto& l : r.lines) out << l << "\n";
  for (const auto& c : r.checks) {
    out << "[" << to_string(c.verdict) << "] " << c.name;
    for (const auto& [k, v] : c.values) out << "  " << k << "=" << v;
    out << "\n";
  }
  for (const auto& a : r.attachments) out << "# attachment: " << a << "\n";
  out << "overall: " << to_string(r.overall()) << "\n";
  return out.str();
}

std::string report_json(const Report& r) {
  json j;
  j["command"] = r.command;
  j["seed"] = r.seed;
  j["tol"] = r.tol;
  j["mode"] = std::string(to_string(r.mode));
  j["version"] = kRepFileVersion;
  json meta = json::object();
  for (const auto& [k, v] : r.meta) meta[k] = v;
  j["meta"] = meta;
  j["lines"] = r.lines;
  json checks = json::array();
  for (const auto& c : r.checks) {
    json cj;
    cj["name"] = c.name;
    cj["verdict"] = std::string(to_string(c.verdict));
    json vals = json::object();
    for (const auto& [k, v] : c.values) vals[k] = v;
    cj["values"] = vals;
    checks.push_back(cj);
  }
  j["checks"] = checks;
  j["attachments"] = r.attachments;
  j["overall"] = std::string(to_string(r.overall()));
  return j.dump(2) + "\n";
}

}  // namespace projdyn
