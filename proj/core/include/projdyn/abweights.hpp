#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "projdyn/polytope.hpp"
#include "projdyn/projective.hpp"

namespace projdyn {

/// Representation of Z^k by commuting invertible matrices. Exact reps keep
/// their rational generators; the double images are always available.
class AbelianRep {
 public:
  static AbelianRep exact(std::vector<MatQ> generators);
  static AbelianRep floating(std::vector<MatD> generators, const NumericConfig& cfg = {});

  ScalarMode mode() const { return mode_; }
  int rank() const { return static_cast<int>(float_gens_.size()); }
  int dim() const { return dim_; }
  const std::vector<MatQ>& exact_generators() const;
  const std::vector<MatD>& generators() const { return float_gens_; }

  /// rho(h) = prod g_i^{h_i}.
  MatQ element_exact(const std::vector<long>& h) const;
  MatD element(const std::vector<long>& h) const;

 private:
  ScalarMode mode_ = ScalarMode::Float;
  int dim_ = 0;
  std::vector<MatQ> exact_gens_;
  std::vector<MatD> float_gens_;
};

/// tau_m applied to every generator.
AbelianRep sym_power_rep(const AbelianRep& rep, int m);

struct ComplexWeight {
  std::vector<std::complex<double>> eigenvalues;  ///< exp(mu_C(g_i)) per generator
  std::vector<std::complex<double>> values;       ///< mu_C(g_i) (principal log)
  int multiplicity = 0;                           ///< complex dimension
  int nilpotence = 1;
  bool is_real = true;
  int conjugate = -1;  ///< partner index for non-real weights
  /// Real span of the weight space (merged with the conjugate's when
  /// non-real, so of dimension 2 * multiplicity in that case).
  Subspace<double> space;
  std::optional<Subspace<Rational>> exact_space;
  std::optional<std::vector<Rational>> exact_eigenvalues;
  int real_weight = -1;
};

struct RealWeight {
  VecD value;                      ///< log |eigenvalue| per generator
  std::optional<VecQ> exponents;   ///< log_b |eigenvalue| when a base is declared
  std::vector<int> complex_weights;
  int multiplicity = 0;            ///< real dimension of the summed spaces
  Subspace<double> space;
  std::optional<Subspace<Rational>> exact_space;
};

struct WeightSystem {
  AbelianRep rep;
  std::vector<ComplexWeight> complex_weights;
  std::vector<RealWeight> real_weights;
  std::optional<Rational> base;
  NumericConfig cfg;
};

/// Simultaneous generalized eigendecomposition. Exact reps require a
/// rational spectrum; `base` (exact only) makes weights exact exponent
/// vectors. Float eigenvalues closer than cfg.cluster_tol relative to the
/// spectral radius are merged.
WeightSystem decompose(const AbelianRep& rep, std::optional<Rational> base = std::nullopt,
                       const NumericConfig& cfg = {});

struct WeightPolytope {
  std::vector<VecD> points;                   ///< one per real weight
  std::optional<std::vector<VecQ>> exact_points;
  std::vector<int> multiplicities;
  FaceLattice lattice;

  bool exact() const { return exact_points.has_value(); }
  int dim() const { return lattice.dim; }
  const std::vector<int>& vertices() const { return lattice.vertices; }
  bool interior(int weight) const { return !lattice.on_boundary(weight); }
};

WeightPolytope weight_polytope(const WeightSystem& ws);

/// Index of the face whose weights maximize mu(h).
int face_for_direction(const WeightPolytope& wp, const VecQ& h);
int face_for_direction(const WeightPolytope& wp, const VecD& h, double tol = 1e-9);

struct FacePick {
  int face = -1;
  std::vector<int> weights;
  Subspace<double> v_face;
  Subspace<double> v_opp;
  std::optional<Subspace<Rational>> exact_face;
  std::optional<Subspace<Rational>> exact_opp;
};

FacePick face_subspaces(const WeightSystem& ws, const WeightPolytope& wp, int face);

struct NormBoundReport {
  int radius = 0;
  double max_r = 0.0;      ///< max ||rho(h)|| / (|h|^{d-1} r+(h))
  double max_inv_l = 0.0;  ///< max r-(h) / (m(rho(h)) |h|^{d-1})
  std::vector<double> shell_max_r;      ///< running max of R up to each shell radius
  std::vector<double> shell_max_inv_l;
  double growth_factor = 1.0;
  bool stabilized = false;
  bool finite = false;
  bool pass = false;
  std::string note;
};

/// Sweeps integer lattice points 1 <= |h|_inf <= radius. The certificate
/// passes when both maxima are finite and the maximum over the whole range
/// is at most growth_factor times the maximum over |h| <= radius / 2.
NormBoundReport verify_norm_bounds(const WeightSystem& ws, int radius, double growth_factor = 1.0 + 1e-12);

struct ContinuityStep {
  double t = 0.0;
  double weight_displacement = 0.0;    ///< max over matched real weights (natural log units)
  double subspace_displacement = 0.0;  ///< max gap between matched weight spaces
};

struct ContinuityReport {
  std::vector<ContinuityStep> steps;
  double max_weight_displacement = 0.0;
  double max_subspace_displacement = 0.0;
  bool ok = false;
  std::string error;  ///< commutativity violation or matching ambiguity
};

/// Matching of real weights between two systems by nearest neighbour.
/// Returns, for each weight of `from`, its partner in `to`; throws on count
/// mismatch or when weights of `from` are closer than twice the largest
/// displacement.
std::vector<int> match_weights(const WeightSystem& from, const WeightSystem& to);

/// g_i(t) = g_i + t * delta_i for t = 0, 1/steps, ..., 1.
ContinuityReport perturb_and_track(const WeightSystem& ws, const std::vector<MatD>& deltas, int steps);
/// General family t -> generators, t in [0, 1].
ContinuityReport perturb_and_track(const WeightSystem& ws,
                                   const std::function<std::vector<MatD>(double)>& family, int steps);

/// Max over generators of ||[g_i, g_j]|| / (||g_i|| ||g_j||).
double commutator_defect(const std::vector<MatD>& gens);

}  // namespace projdyn
