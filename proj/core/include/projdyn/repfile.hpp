#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "projdyn/abweights.hpp"
#include "projdyn/flagdyn.hpp"
#include "projdyn/hilbert.hpp"

namespace projdyn {

inline constexpr const char* kRepFileVersion = "projdyn-rep/1";

/// Malformed or inconsistent input file.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GroupSpec {
  std::vector<std::string> generators;
  std::optional<Rational> base;
  std::vector<VecQ> hints;
};

struct DomainSpec {
  DomainKind kind = DomainKind::PolytopeV;
  int dim = 0;
  std::vector<VecQ> vectors;  ///< vertex lifts or facet covectors
  std::optional<VecQ> chart;
  MatQ form;                  ///< ellipsoid only
};

/// Parameters of one experiment block; absent fields fall back to the
/// command defaults.
struct ExperimentSpec {
  std::optional<std::string> kind;  ///< "crosscheck", "attraction", "perturbation", ...
  std::optional<std::string> group;
  std::vector<std::vector<long>> directions;
  std::optional<int> m;
  std::optional<int> n_max;
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<double> margin;
  std::vector<double> epsilons;
  std::optional<int> t_max;
  std::optional<double> u_margin;
};

/// Self-describing input: named matrices, groups, domains and experiment
/// blocks, kept in declaration order. Matrix entries are "p/q" strings or
/// decimal literals, both read exactly.
struct RepFile {
  ScalarMode mode = ScalarMode::Exact;
  int dim = 0;
  std::vector<std::pair<std::string, MatQ>> matrices;
  std::vector<std::pair<std::string, GroupSpec>> groups;
  std::vector<std::pair<std::string, DomainSpec>> domains;
  std::vector<std::pair<std::string, ExperimentSpec>> experiments;

  const MatQ& matrix(const std::string& name) const;
  const GroupSpec& group(const std::string& name) const;
  const DomainSpec& domain(const std::string& name) const;
  const ExperimentSpec& experiment(const std::string& name) const;

  /// Generators of a group, exact or rounded according to `mode`.
  AbelianRep group_rep(const std::string& name, std::optional<ScalarMode> mode = std::nullopt,
                       const NumericConfig& cfg = {}) const;
  ConvexDomain build_domain(const std::string& name) const;
};

RepFile parse_repfile(const std::string& text);
RepFile load_repfile(const std::string& path);
/// Canonical form: two-space indented JSON with a trailing newline.
std::string emit_repfile(const RepFile& file);

// ---------------------------------------------------------------------------
// Reports

struct CheckRecord {
  std::string name;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<std::pair<std::string, std::string>> values;  ///< preformatted measurements
};

struct Report {
  std::string command;
  std::uint64_t seed = 0;
  double tol = 0.0;
  ScalarMode mode = ScalarMode::Exact;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> lines;  ///< free-form listing printed before the checks
  std::vector<CheckRecord> checks;
  std::vector<std::string> attachments;

  CheckRecord& add(std::string name, Verdict v);
  /// Inconclusive dominates fail only when nothing failed.
  Verdict overall() const;
};

std::string format_double(double x);
std::string report_text(const Report& r);
std::string report_json(const Report& r);

}  // namespace projdyn
