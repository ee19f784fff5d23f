#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "projdyn/abweights.hpp"
#include "projdyn/flagdyn.hpp"
#include "projdyn/sympow.hpp"

namespace projdyn {

/// A rank-k abelian group acting diagonalizably near a k-simplex of
/// eigenlines. The lifts are the hints as given; `admissible` is the
/// min-norm covector equal to 1 on each of them.
struct PeripheralModel {
  AbelianRep rep;
  WeightSystem weights;
  WeightPolytope polytope;
  std::vector<int> vertex_weights;  ///< real weight index per simplex vertex, in hint order
  std::vector<int> interior_weights;
  std::vector<VecD> lifts;
  std::optional<std::vector<VecQ>> exact_lifts;
  /// w_v(lift_u) = delta_uv, and w_v vanishes on every other weight space.
  std::vector<VecD> dual_lifts;
  std::optional<std::vector<VecQ>> exact_dual_lifts;
  VecD admissible;
  std::optional<VecQ> exact_admissible;

  int rank() const { return rep.rank(); }
  int dim() const { return rep.dim(); }
  int vertex_count() const { return static_cast<int>(lifts.size()); }
  bool exact() const { return exact_lifts.has_value(); }
};

/// Refuses inputs whose weight polytope is not a k-simplex with exactly the
/// hinted weights as vertices, each on a one-dimensional weight space, with
/// every other weight strictly inside.
PeripheralModel build_model(const AbelianRep& rep, const std::vector<VecQ>& hints,
                            std::optional<Rational> base = std::nullopt, const NumericConfig& cfg = {});

/// Exponent vectors over the simplex vertices of degree m whose support
/// misses at least one vertex, in descending lex order.
std::vector<MultiIndex> boundary_weight_monomials(const PeripheralModel& model, int m);
std::vector<MultiIndex> boundary_weight_monomials(int vertices, int m);
/// C(m+k, k) - C(m-1, k).
std::int64_t boundary_monomial_count(int k, int m);

struct SimplexPair {
  int m = 0;
  std::vector<MultiIndex> monomials;
  std::vector<std::string> primal_labels;
  std::vector<std::string> dual_labels;
  std::vector<VecD> primal;  ///< vertex lifts prod lift_v^{a_v} in the monomial basis of Sym^m
  std::vector<VecD> dual;    ///< dual vertex lifts as covectors (plain pairing)
  std::optional<std::vector<VecQ>> exact_primal;
  std::optional<std::vector<VecQ>> exact_dual;
  /// sum_b (m!/b!) dual_b: equal to 1 on every primal vertex lift and
  /// positive on the attraction cone.
  VecD chart;
  AbelianRep sym_rep;
  WeightSystem sym_weights;
  WeightPolytope sym_polytope;
  std::vector<int> vertex_sym_weight;  ///< real weight of tau_m rho carried by each vertex

  int size() const { return static_cast<int>(monomials.size()); }
  int ambient() const { return static_cast<int>(chart.size()); }
  bool exact() const { return exact_primal.has_value(); }
  /// Chart image x / chart(x); empty when chart(x) <= 0.
  std::optional<VecD> chart_point(const VecD& x) const;
  MatD chart_vertices() const;
};

/// Builds S_H and its dual and checks invariance, duality incidence, and
/// that the vertices are exactly the boundary weights of tau_m rho with
/// one-dimensional spaces.
SimplexPair build_simplices(const PeripheralModel& model, int m);

/// Flags (x, w) with x on a proper face of S_H and w on a proper face of the
/// dual, supported on disjoint vertex sets so that incidence holds exactly.
struct BoundaryFlag {
  std::vector<Rational> point_coeffs;       ///< over primal vertices, some zero
  std::vector<Rational> hyperplane_coeffs;  ///< over dual vertices, some zero
  Flag<double> flag;
  std::optional<Flag<Rational>> exact;
};

struct FlagBoundarySample {
  std::vector<BoundaryFlag> flags;
};

FlagBoundarySample sample_flag_boundary(const SimplexPair& pair, int count, std::uint64_t seed);
/// Re-derives both coordinates from the certificates and checks incidence.
bool verify_boundary_flag(const SimplexPair& pair, const BoundaryFlag& f, double tol = 1e-9);

/// Positivity cone of the dual vertex covectors. This is the cone attached
/// to the simplices alone; it contains any region cut out by further
/// positivity constraints from an ambient limit set.
struct AttractionRegion {
  std::vector<VecD> dual_vertex_lifts;
  std::optional<std::vector<VecQ>> exact_dual_vertex_lifts;
  std::vector<VecD> primal_vertex_lifts;  ///< cut out the dual cone
};

AttractionRegion attraction_region(const SimplexPair& pair);

struct Membership {
  bool member = false;
  double margin = 0.0;  ///< min normalized pairing after the sign choice
  int sign = 0;
};

Membership region_membership(const AttractionRegion& region, const ProjectivePoint<double>& x);
Membership dual_region_membership(const AttractionRegion& region, const DualPoint<double>& w);

/// Rejection sampling of unit vectors in the cone with the given margin,
/// returned with the positive sign.
std::vector<VecD> sample_region(const AttractionRegion& region, int count, double margin, std::uint64_t seed,
                                int max_attempts = 1000000);

/// Distance in the chart from x to the union of the proper faces of S_H.
double distance_to_boundary(const SimplexPair& pair, const VecD& x);
/// Distance in the chart from x to the hull of the given vertices.
double distance_to_face(const SimplexPair& pair, const std::vector<int>& vertices, const VecD& x);

struct AttractionConfig {
  int samples = 100;
  double margin = 1e-2;
  double tol = 1e-6;
  double support_tol = 1e-6;
  std::uint64_t seed = 1;
  DetectionConfig detection;
};

struct AttractionReport {
  std::vector<long> direction;
  int n_max = 0;
  int samples = 0;
  std::vector<int> predicted_face;  ///< primal vertex indices
  std::vector<double> boundary_distance;  ///< max over samples, n = 0..n_max
  std::vector<double> face_distance;      ///< to the predicted face
  std::vector<std::vector<int>> limiting_faces;  ///< support at n_max, per sample
  bool limits_match = false;
  std::optional<ContractionReport> contraction;
  /// containment_distance(empirical attracting subspace, span of predicted vertices)
  double attracting_distance = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  std::string note;
};

AttractionReport attraction_experiment(const SimplexPair& pair, const AttractionRegion& region,
                                       const std::vector<long>& direction, int n_max,
                                       const AttractionConfig& cfg = {});

enum class PerturbationKind { Conjugation, EigenvalueScaling, Custom };
std::string_view to_string(PerturbationKind kind);

/// epsilon -> generators of a commuting family on Sym^m V.
struct PerturbationFamily {
  PerturbationKind kind = PerturbationKind::Custom;
  std::string description;
  std::function<std::vector<MatD>(double)> generators;
};

/// exp(eps X) tau_m(g) exp(-eps X) for a random X of unit operator norm.
PerturbationFamily conjugation_family(const SimplexPair& pair, std::uint64_t seed);
/// tau_m of g_i + eps * (projection onto the vertex line along the other
/// weight spaces), for one generator and one simplex vertex.
PerturbationFamily eigenvalue_scaling_family(const PeripheralModel& model, int m, int vertex, int generator = 0);
PerturbationFamily custom_family(std::function<std::vector<MatD>(double)> generators, std::string description);

struct PerturbationConfig {
  std::vector<double> epsilons{1e-4, 1e-3, 1e-2};
  int k_samples = 20;
  double k_margin = 0.05;
  double u_margin = 1e-2;
  int t_max = 12;
  std::uint64_t seed = 1;
  double commute_tol = 1e-9;
};

struct PerturbationStep {
  double epsilon = 0.0;
  double vertex_displacement = 0.0;       ///< max d_P(vertex, perturbed vertex)
  double dual_vertex_displacement = 0.0;
  double weight_displacement = 0.0;       ///< natural log units
  double incidence_defect = 0.0;          ///< max off-partner |pairing| of the perturbed simplices
  std::vector<bool> shell_ok;             ///< containment per sup-norm shell 1..t_max
  int t_min = -1;                         ///< smallest T with every shell in [T, t_max] ok, -1 if none
  bool contained_from_base_t_min = false;
  std::optional<std::vector<long>> failing_h;  ///< first failure at or beyond the unperturbed T_min
  std::string error;
};

struct PerturbationReport {
  PerturbationKind kind = PerturbationKind::Custom;
  std::string description;
  int base_t_min = -1;
  std::vector<PerturbationStep> steps;  ///< one per epsilon, in input order
  double displacement_constant = 0.0;   ///< max displacement / epsilon over nonzero epsilons
  bool monotone = false;                ///< displacement nondecreasing in epsilon
  bool ok = false;                      ///< no step raised an error
};

PerturbationReport perturbation_experiment(const PeripheralModel& model, const SimplexPair& pair,
                                           const PerturbationFamily& family, const PerturbationConfig& cfg = {});

}  // namespace projdyn
