#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "projdyn/abweights.hpp"
#include "projdyn/hilbert.hpp"

namespace projdyn {

enum class Verdict { Pass, Fail, Inconclusive };
std::string_view to_string(Verdict v);

/// Terms g_1, ..., g_{n_max}: either listed explicitly or rho(n * direction)
/// for an abelian representation (exact powers when the rep is exact).
class MatrixSequence {
 public:
  static MatrixSequence explicit_terms(std::vector<MatD> terms);
  static MatrixSequence abelian_ray(AbelianRep rep, std::vector<long> direction, int n_max);

  int n_max() const { return n_max_; }
  int dim() const;
  bool is_ray() const { return rep_.has_value(); }
  MatD term(int n) const;
  MatD inverse_term(int n) const;
  /// Singular value profile of term n. Rays are evaluated in extended
  /// precision sized to their condition number.
  SvdProfile profile(int n) const;
  /// The sequence of inverses.
  MatrixSequence inverse() const;

 private:
  int n_max_ = 0;
  std::vector<MatD> terms_;
  std::optional<AbelianRep> rep_;
  std::vector<long> direction_;
  bool inverted_ = false;
};

struct DetectionConfig {
  double threshold = 1e6;
  int window = 5;
};

struct ContractionReport {
  int k = 0;
  std::vector<double> gaps;   ///< sigma_k / sigma_{k+1} for n = 1..n_max
  std::vector<double> trace;  ///< gap metric between consecutive top-k subspaces
  bool detected = false;
  std::optional<Subspace<double>> attracting;  ///< top-k left singular subspace of the last term
  std::optional<Subspace<double>> repelling;   ///< top-(d-k) left singular subspace of the last inverse
};

ContractionReport detect_contraction(const MatrixSequence& seq, int k, const DetectionConfig& cfg = {});

struct SymmetryReport {
  ContractionReport forward;
  ContractionReport backward;  ///< inverse sequence, index d - k
  double repelling_agreement = 0.0;  ///< gap between the backward limit and the forward repelling subspace
  double max_distance = 0.0;         ///< max d_P(g_n x, forward limit) at the last n
  int samples = 0;
  bool pass = false;
};

/// Samples points at distance >= margin from the backward limit and checks
/// that the last term pushes them within tol of the forward limit. Throws
/// when either direction fails to contract.
SymmetryReport contraction_symmetry_check(const MatrixSequence& seq, int k, int samples, std::uint64_t seed,
                                          double tol = 1e-6, double margin = 0.1,
                                          const DetectionConfig& cfg = {});

struct AttractEstimateReport {
  double max_ratio = 0.0;  ///< max LHS / RHS over the samples
  double sine = 0.0;       ///< sin of the angle between W and W_perp
  double norm_perp = 0.0;  ///< ||g restricted to W_perp||
  double conorm_w = 0.0;   ///< m(g restricted to W)
  bool pass = false;
};

/// Checks d(gx, W) / d(gx, W') <= (1/sin^2) (||g|W'|| / m(g|W)) / d(x, W')
/// for every sample, with W' the complementary invariant subspace.
AttractEstimateReport attract_estimate_check(const MatD& g, const Subspace<double>& w, const Subspace<double>& w_perp,
                                             const std::vector<ProjectivePoint<double>>& samples,
                                             double tol = 1e-9);

struct CrosscheckReport {
  Verdict verdict = Verdict::Inconclusive;
  int face = -1;
  std::vector<int> face_weights;
  int k = 0;
  FacePick prediction;
  ContractionReport empirical;
  double attracting_distance = 0.0;  ///< gap(V_F, empirical attracting)
  double repelling_distance = 0.0;   ///< gap(V_F_opp, empirical repelling)
  std::string note;
};

CrosscheckReport face_prediction_crosscheck(const WeightSystem& ws, const std::vector<long>& direction, int n_max,
                                            double tol = 1e-8, const DetectionConfig& cfg = {});

struct OrbitRecord {
  std::vector<int> word;  ///< letter indices, applied left to right as a product
  double gap = 0.0;       ///< sigma_k / sigma_{k+1}
  Subspace<double> attracting;
  std::optional<Flag<double>> flag;  ///< (top line, top hyperplane) when k = 1
  int nearest_face = -1;             ///< face of the supplied domain, when any
  double face_distance = 0.0;
};

struct OrbitCloud {
  std::vector<OrbitRecord> records;  ///< sorted by decreasing gap, ties by word rank
  std::size_t words = 0;
  bool truncated = false;
  std::vector<std::pair<int, int>> inverse_pairs;
};

/// Enumerates reduced words of length 1..max_len over the generators (a
/// free monoid in which adjacent inverse letters cancel), up to word_cap.
OrbitCloud orbit_limit_flags(const std::vector<MatD>& generators, int max_len, int k, std::size_t word_cap = 200000,
                             const ConvexDomain* domain = nullptr, double tol = 1e-9);

}  // namespace projdyn
