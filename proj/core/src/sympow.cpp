#include "projdyn/sympow.hpp"

#include <memory>
#include <numeric>
#include <random>

namespace projdyn {

int MultiIndex::degree() const { return std::accumulate(exponents.begin(), exponents.end(), 0); }

Rational factorial_of(const MultiIndex& a) {
  Rational out = 1;
  for (int e : a.exponents)
    for (int i = 2; i <= e; ++i) out *= i;
  return out;
}

Rational multinomial(const MultiIndex& a) {
  Rational m_fact = 1;
  for (int i = 2; i <= a.degree(); ++i) m_fact *= i;
  return m_fact / factorial_of(a);
}

std::string monomial_label(const MultiIndex& a, const std::string& letter, bool dual) {
  std::string out;
  for (std::size_t i = 0; i < a.exponents.size(); ++i) {
    int e = a.exponents[i];
    if (e == 0) continue;
    std::string base = letter + std::to_string(i + 1) + (dual ? "*" : "");
    if (e == 1) {
      out += base;
    } else {
      out += (dual ? "(" + base + ")" : base) + "^" + std::to_string(e);
    }
  }
  return out.empty() ? "1" : out;
}

std::vector<MultiIndex> compositions(int n, int m) {
  std::vector<MultiIndex> out;
  if (n <= 0) return out;
  std::vector<int> cur(static_cast<std::size_t>(n), 0);
  // Depth-first with the first coordinate taking its largest value first.
  auto rec = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == n - 1) {
      cur[static_cast<std::size_t>(pos)] = remaining;
      out.push_back(MultiIndex{cur});
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      cur[static_cast<std::size_t>(pos)] = v;
      self(self, pos + 1, remaining - v);
    }
  };
  rec(rec, 0, m);
  return out;
}

SymBasis::SymBasis(int d, int m) : d_(d), m_(m) {
  if (d < 1 || m < 0) throw MathError("SymBasis: invalid arguments");
  indices_ = compositions(d, m);
  for (std::size_t i = 0; i < indices_.size(); ++i) lookup_[indices_[i].exponents] = static_cast<int>(i);
}

int SymBasis::index_of(const MultiIndex& a) const {
  auto it = lookup_.find(a.exponents);
  return it == lookup_.end() ? -1 : it->second;
}

const SymBasis& cached_sym_basis(int d, int m) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<SymBasis>> cache;
  auto& slot = cache[{d, m}];
  if (!slot) slot = std::make_unique<SymBasis>(d, m);
  return *slot;
}

std::int64_t binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t r = 1;
  for (std::int64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::int64_t sym_dim(int d, int m) {
  if (d < 1 || m < 1) throw MathError("sym_dim: arguments must be positive");
  return binomial(d + m - 1, m);
}

DynamicsTransferReport dynamics_transfer_check(const std::vector<MatD>& g_seq, const DualPoint<double>& w,
                                               const ProjectivePoint<double>& x, int m, int samples,
                                               std::uint64_t seed, double margin, const NumericConfig& cfg) {
  if (g_seq.empty()) throw MathError("dynamics_transfer_check: empty sequence");
  if (samples < 1) throw MathError("dynamics_transfer_check: need at least one sample");
  const int d = w.dim();
  if (x.dim() != d) throw MathError("dynamics_transfer_check: dimension mismatch");

  const DualPoint<double> forbidden = dual_veronese(w, m, cfg.tol);
  const ProjectivePoint<double> target = veronese(x, m, cfg.tol);
  const int n_sym = target.dim();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<VecD> pts;
  for (int attempts = 0; static_cast<int>(pts.size()) < samples; ++attempts) {
    if (attempts > 1000 * samples) throw MathError("dynamics_transfer_check: margin too large to sample");
    VecD y(n_sym);
    for (int i = 0; i < n_sym; ++i) y(i) = normal(rng);
    y.normalize();
    if (std::abs(forbidden.coords().dot(y)) >= margin) pts.push_back(y);
  }

  DynamicsTransferReport out;
  out.degree = m;
  out.samples = samples;
  for (const MatD& g : g_seq) {
    if (g.rows() != d || g.cols() != d) throw MathError("dynamics_transfer_check: dimension mismatch");
    MatD big = sym_power_matrix(g, m, cfg.tol);
    double worst = 0.0;
    for (const VecD& y : pts) worst = std::max(worst, proj_distance(ProjectivePoint<double>(big * y), target));
    out.max_distance.push_back(worst);
  }
  out.nonincreasing = true;
  for (std::size_t i = 1; i < out.max_distance.size(); ++i)
    if (out.max_distance[i] > out.max_distance[i - 1] + cfg.tol) out.nonincreasing = false;
  return out;
}

}  // namespace projdyn
