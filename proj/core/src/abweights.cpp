#include "projdyn/abweights.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "projdyn/sympow.hpp"
#include "bigfloat.hpp"

namespace projdyn {

// ---------------------------------------------------------------------------
// AbelianRep

double commutator_defect(const std::vector<MatD>& gens) {
  double worst = 0.0;
  for (std::size_t i = 0; i < gens.size(); ++i)
    for (std::size_t j = i + 1; j < gens.size(); ++j) {
      MatD c = gens[i] * gens[j] - gens[j] * gens[i];
      double scale = gens[i].norm() * gens[j].norm();
      worst = std::max(worst, c.norm() / scale);
    }
  return worst;
}

AbelianRep AbelianRep::exact(std::vector<MatQ> generators) {
  if (generators.empty()) throw MathError("abelian rep needs at least one generator");
  AbelianRep rep;
  rep.mode_ = ScalarMode::Exact;
  rep.dim_ = static_cast<int>(generators.front().rows());
  for (const MatQ& g : generators) {
    if (g.rows() != rep.dim_ || g.cols() != rep.dim_) throw MathError("generators must be square of equal size");
    if (determinant(g) == 0) throw MathError("generator is not invertible");
  }
  for (std::size_t i = 0; i < generators.size(); ++i)
    for (std::size_t j = i + 1; j < generators.size(); ++j)
      if (generators[i] * generators[j] != generators[j] * generators[i])
        throw MathError("generators " + std::to_string(i + 1) + " and " + std::to_string(j + 1) + " do not commute");
  for (const MatQ& g : generators) rep.float_gens_.push_back(to_double(g));
  rep.exact_gens_ = std::move(generators);
  return rep;
}

AbelianRep AbelianRep::floating(std::vector<MatD> generators, const NumericConfig& cfg) {
  if (generators.empty()) throw MathError("abelian rep needs at least one generator");
  AbelianRep rep;
  rep.mode_ = ScalarMode::Float;
  rep.dim_ = static_cast<int>(generators.front().rows());
  for (const MatD& g : generators) {
    if (g.rows() != rep.dim_ || g.cols() != rep.dim_) throw MathError("generators must be square of equal size");
    if (!g.allFinite()) throw MathError("generator has non-finite entries");
    Eigen::JacobiSVD<MatD> svd(g);
    const VecD& s = svd.singularValues();
    if (!(s(s.size() - 1) > cfg.tol * s(0))) throw MathError("generator is not invertible");
  }
  double defect = commutator_defect(generators);
  if (defect > cfg.tol) {
    std::ostringstream msg;
    msg << "generators do not commute (relative commutator " << defect << ")";
    throw MathError(msg.str());
  }
  rep.float_gens_ = std::move(generators);
  return rep;
}

const std::vector<MatQ>& AbelianRep::exact_generators() const {
  if (mode_ != ScalarMode::Exact) throw MathError("representation is not exact");
  return exact_gens_;
}

MatQ AbelianRep::element_exact(const std::vector<long>& h) const {
  const auto& gens = exact_generators();
  if (h.size() != gens.size()) throw MathError("element: exponent vector has wrong length");
  MatQ out = identity<Rational>(dim_);
  for (std::size_t i = 0; i < h.size(); ++i)
    if (h[i] != 0) out = (out * mat_pow(gens[i], h[i])).eval();
  return out;
}

MatD AbelianRep::element(const std::vector<long>& h) const {
  if (mode_ == ScalarMode::Exact) return to_double(element_exact(h));
  if (h.size() != float_gens_.size()) throw MathError("element: exponent vector has wrong length");
  MatD out = MatD::Identity(dim_, dim_);
  for (std::size_t i = 0; i < h.size(); ++i)
    if (h[i] != 0) out = (out * mat_pow(float_gens_[i], h[i])).eval();
  return out;
}

AbelianRep sym_power_rep(const AbelianRep& rep, int m) {
  if (rep.mode() == ScalarMode::Exact) {
    std::vector<MatQ> gens;
    for (const MatQ& g : rep.exact_generators()) gens.push_back(sym_power_matrix(g, m));
    return AbelianRep::exact(std::move(gens));
  }
  std::vector<MatD> gens;
  for (const MatD& g : rep.generators()) gens.push_back(sym_power_matrix(g, m));
  NumericConfig loose;
  loose.tol = 1e-7;
  return AbelianRep::floating(std::move(gens), loose);
}

// ---------------------------------------------------------------------------
// Exact decomposition

namespace {

bool is_triangular(const MatQ& m) {
  bool upper = true, lower = true;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i > j && m(i, j) != 0) upper = false;
      if (i < j && m(i, j) != 0) lower = false;
    }
  return upper || lower;
}

bool is_singular_shift(const MatQ& m, const Rational& c) {
  MatQ n = m - c * MatQ::Identity(m.rows(), m.cols());
  return rank(n) < m.rows();
}

// Rational eigenvalues of m, located in extended precision and confirmed
// exactly. Wide eigenvalue ranges and large denominators (as in symmetric
// powers) defeat a double-precision search.
std::vector<Rational> rational_eigenvalues(const MatQ& m) {
  std::vector<Rational> out;
  if (is_triangular(m)) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (std::find(out.begin(), out.end(), m(i, i)) == out.end()) out.push_back(m(i, i));
    return out;
  }
  // A Jordan block of size s perturbs its eigenvalue by about eps^(1/s), so
  // the working precision grows with the dimension.
  const unsigned digits = 60 + 8 * static_cast<unsigned>(m.rows());
  detail::PrecisionScope scope(digits);
  using detail::Big;
  Eigen::EigenSolver<detail::MatBig> es(detail::to_big(m), false);
  const BigInt max_den = boost::multiprecision::pow(BigInt(10), digits / 3);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const Big re = es.eigenvalues()(i).real();
    const Big im = es.eigenvalues()(i).imag();
    const Big mag = sqrt(re * re + im * im);
    const Big near = mag / 1000000;
    if (abs(im) > near) throw MathError("exact decomposition needs a rational spectrum; use float mode");
    bool known = false;
    for (const Rational& c : out)
      if (abs(detail::to_big(c) - re) <= near) known = true;
    if (known) continue;
    bool found = false;
    int tested = 0;
    for (const Rational& c : detail::convergents(re, max_den)) {
      if (abs(detail::to_big(c) - re) > near) continue;
      if (++tested > 12) break;
      if (is_singular_shift(m, c)) {
        out.push_back(c);
        found = true;
        break;
      }
    }
    if (!found) throw MathError("exact decomposition needs a rational spectrum; use float mode");
  }
  return out;
}

// Basis of ker (m - c)^s for s large enough that the kernel is stable.
MatQ generalized_kernel(const MatQ& m, const Rational& c) {
  const Eigen::Index r = m.rows();
  MatQ n = m - c * MatQ::Identity(r, r);
  MatQ power = n;
  MatQ ker = nullspace(power);
  while (true) {
    MatQ next_power = power * n;
    MatQ next = nullspace(next_power);
    if (next.cols() == ker.cols()) return ker;
    power = next_power;
    ker = next;
  }
}

struct ExactBlock {
  MatQ basis;
  std::vector<Rational> eig;
};

std::vector<ExactBlock> exact_blocks(const AbelianRep& rep) {
  const int d = rep.dim();
  std::vector<ExactBlock> blocks{{MatQ::Identity(d, d), {}}};
  for (const MatQ& g : rep.exact_generators()) {
    std::vector<ExactBlock> next;
    for (const ExactBlock& b : blocks) {
      MatQ restricted = solve_exact(b.basis, g * b.basis);
      const Eigen::Index r = restricted.rows();
      bool diagonal = true;
      for (Eigen::Index i = 0; i < r && diagonal; ++i)
        for (Eigen::Index j = 0; j < r; ++j)
          if (i != j && restricted(i, j) != 0) {
            diagonal = false;
            break;
          }
      std::vector<Rational> eig = rational_eigenvalues(restricted);
      Eigen::Index total = 0;
      for (const Rational& c : eig) {
        MatQ ker;
        if (diagonal) {
          std::vector<Eigen::Index> cols;
          for (Eigen::Index i = 0; i < r; ++i)
            if (restricted(i, i) == c) cols.push_back(i);
          ker = MatQ::Zero(r, static_cast<Eigen::Index>(cols.size()));
          for (std::size_t j = 0; j < cols.size(); ++j) ker(cols[j], static_cast<Eigen::Index>(j)) = 1;
        } else {
          ker = generalized_kernel(restricted, c);
        }
        total += ker.cols();
        ExactBlock nb{b.basis * ker, b.eig};
        nb.eig.push_back(c);
        next.push_back(std::move(nb));
      }
      if (total != r) throw MathError("exact decomposition needs a rational spectrum; use float mode");
    }
    blocks = std::move(next);
  }
  return blocks;
}

int exact_nilpotence(const AbelianRep& rep, const ExactBlock& b) {
  int ell = 1;
  const auto& gens = rep.exact_generators();
  for (std::size_t i = 0; i < gens.size(); ++i) {
    MatQ restricted = solve_exact(b.basis, gens[i] * b.basis);
    const Eigen::Index r = restricted.rows();
    MatQ n = restricted - b.eig[i] * MatQ::Identity(r, r);
    MatQ power = n;
    int s = 1;
    while (!is_zero_matrix(power)) {
      power = (power * n).eval();
      ++s;
    }
    ell = std::max(ell, s);
  }
  return ell;
}

Rational exact_log(const Rational& modulus, const Rational& base) {
  if (modulus == 1) return 0;
  double est = std::log(to_double(modulus)) / std::log(to_double(base));
  for (const Rational& q : convergents(est, 10000)) {
    long p = numerator(q).convert_to<long>();
    long den = denominator(q).convert_to<long>();
    if (pow_int(modulus, den) == pow_int(base, p)) return q;
  }
  std::ostringstream msg;
  msg << "eigenvalue modulus " << format_rational(modulus) << " is not a rational power of the base "
      << format_rational(base);
  throw MathError(msg.str());
}

// ---------------------------------------------------------------------------
// Float decomposition

struct FloatBlock {
  MatC basis;  // orthonormal columns
  std::vector<std::complex<double>> eig;
};

MatC orthonormalize(const MatC& a) {
  Eigen::HouseholderQR<MatC> qr(a);
  return qr.householderQ() * MatC::Identity(a.rows(), a.cols());
}

std::vector<FloatBlock> float_blocks(const AbelianRep& rep, const NumericConfig& cfg) {
  const int d = rep.dim();
  std::vector<FloatBlock> blocks{{MatC::Identity(d, d), {}}};
  for (std::size_t gi = 0; gi < rep.generators().size(); ++gi) {
    const MatC g = rep.generators()[gi].cast<std::complex<double>>();
    Eigen::ComplexEigenSolver<MatC> whole(g, false);
    const double radius = std::max(whole.eigenvalues().cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    std::vector<FloatBlock> next;
    for (const FloatBlock& b : blocks) {
      MatC restricted = b.basis.adjoint() * g * b.basis;
      const Eigen::Index r = restricted.rows();
      Eigen::ComplexEigenSolver<MatC> ces(restricted, false);
      VecC ev = ces.eigenvalues();
      // Single-linkage clustering.
      std::vector<int> label(static_cast<std::size_t>(r));
      std::iota(label.begin(), label.end(), 0);
      std::function<int(int)> root = [&](int i) {
        return label[static_cast<std::size_t>(i)] == i ? i : (label[static_cast<std::size_t>(i)] = root(label[static_cast<std::size_t>(i)]));
      };
      for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = i + 1; j < r; ++j)
          if (std::abs(ev(i) - ev(j)) <= cfg.cluster_tol * radius)
            label[static_cast<std::size_t>(root(static_cast<int>(j)))] = root(static_cast<int>(i));
      std::vector<std::vector<Eigen::Index>> clusters;
      std::vector<int> roots;
      for (Eigen::Index i = 0; i < r; ++i) {
        int rt = root(static_cast<int>(i));
        auto it = std::find(roots.begin(), roots.end(), rt);
        if (it == roots.end()) {
          roots.push_back(rt);
          clusters.push_back({i});
        } else {
          clusters[static_cast<std::size_t>(it - roots.begin())].push_back(i);
        }
      }
      for (const auto& cl : clusters) {
        std::complex<double> center = 0.0;
        for (Eigen::Index i : cl) center += ev(i);
        center /= static_cast<double>(cl.size());
        const Eigen::Index s = static_cast<Eigen::Index>(cl.size());
        MatC ker;
        if (s == r) {
          ker = MatC::Identity(r, r);
        } else {
          MatC n = restricted - center * MatC::Identity(r, r);
          MatC power = n;
          for (Eigen::Index p = 1; p < s; ++p) power = (power * n).eval();
          Eigen::JacobiSVD<MatC> svd(power, Eigen::ComputeFullV);
          const VecD& sv = svd.singularValues();
          double kept = sv(r - s);
          double next_sv = sv(r - s - 1);
          if (!(kept <= 1e-2 * next_sv)) {
            std::ostringstream msg;
            msg << "cannot separate eigenvalue cluster near " << center << " (size " << s << ") of generator "
                << gi + 1;
            throw MathError(msg.str());
          }
          ker = svd.matrixV().rightCols(s);
        }
        FloatBlock nb{orthonormalize(b.basis * ker), b.eig};
        nb.eig.push_back(center);
        next.push_back(std::move(nb));
      }
    }
    blocks = std::move(next);
  }
  // Refresh the eigenvalues from the final restrictions (trace average).
  for (FloatBlock& b : blocks)
    for (std::size_t gi = 0; gi < rep.generators().size(); ++gi) {
      MatC restricted = b.basis.adjoint() * rep.generators()[gi].cast<std::complex<double>>() * b.basis;
      b.eig[gi] = restricted.trace() / static_cast<double>(restricted.rows());
    }
  return blocks;
}

int float_nilpotence(const AbelianRep& rep, const FloatBlock& b, const NumericConfig& cfg) {
  int ell = 1;
  for (std::size_t gi = 0; gi < rep.generators().size(); ++gi) {
    MatC restricted = b.basis.adjoint() * rep.generators()[gi].cast<std::complex<double>>() * b.basis;
    const Eigen::Index r = restricted.rows();
    const double scale = std::max(1.0, restricted.norm());
    MatC n = restricted - b.eig[gi] * MatC::Identity(r, r);
    MatC power = n;
    int s = 1;
    double thr = cfg.cluster_tol * scale;
    while (power.norm() > thr && s < r) {
      power = (power * n).eval();
      ++s;
      thr *= scale;
    }
    ell = std::max(ell, s);
  }
  return ell;
}

// Real span of a complex subspace, of the requested real dimension.
MatD real_span(const MatC& basis, Eigen::Index dim) {
  MatD both(basis.rows(), 2 * basis.cols());
  both << basis.real(), basis.imag();
  Eigen::JacobiSVD<MatD> svd(both, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(dim);
}

bool near(const std::complex<double>& a, const std::complex<double>& b, double tol) {
  return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace

WeightSystem decompose(const AbelianRep& rep, std::optional<Rational> base, const NumericConfig& cfg) {
  WeightSystem ws{rep, {}, {}, base, cfg};
  if (base) {
    if (rep.mode() != ScalarMode::Exact) throw MathError("an exact base needs an exact representation");
    if (*base <= 0 || *base == 1) throw MathError("base must be positive and different from 1");
  }
  const int k = rep.rank();

  if (rep.mode() == ScalarMode::Exact) {
    for (const ExactBlock& b : exact_blocks(rep)) {
      ComplexWeight cw;
      cw.multiplicity = static_cast<int>(b.basis.cols());
      cw.nilpotence = exact_nilpotence(rep, b);
      cw.is_real = true;
      cw.exact_eigenvalues = b.eig;
      for (const Rational& c : b.eig) {
        double x = to_double(c);
        cw.eigenvalues.emplace_back(x, 0.0);
        cw.values.emplace_back(std::log(std::abs(x)), x < 0 ? std::numbers::pi : 0.0);
      }
      cw.exact_space = Subspace<Rational>(b.basis);
      cw.space = to_double(*cw.exact_space);
      ws.complex_weights.push_back(std::move(cw));
    }
  } else {
    std::vector<FloatBlock> blocks = float_blocks(rep, cfg);
    for (const FloatBlock& b : blocks) {
      ComplexWeight cw;
      cw.multiplicity = static_cast<int>(b.basis.cols());
      cw.nilpotence = float_nilpotence(rep, b, cfg);
      cw.eigenvalues = b.eig;
      cw.is_real = true;
      for (const auto& z : b.eig) {
        if (std::abs(z.imag()) > cfg.cluster_tol * std::max(1.0, std::abs(z))) cw.is_real = false;
        cw.values.push_back(std::log(z));
      }
      if (cw.is_real)
        for (auto& z : cw.eigenvalues) z = {z.real(), 0.0};
      ws.complex_weights.push_back(std::move(cw));
    }
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      ComplexWeight& cw = ws.complex_weights[i];
      if (cw.is_real) {
        cw.space = Subspace<double>(real_span(blocks[i].basis, cw.multiplicity), cfg.tol);
        continue;
      }
      if (cw.conjugate >= 0) continue;
      for (std::size_t j = 0; j < blocks.size(); ++j) {
        if (j == i || ws.complex_weights[j].conjugate >= 0) continue;
        bool match = ws.complex_weights[j].multiplicity == cw.multiplicity;
        for (int g = 0; g < k && match; ++g)
          match = near(std::conj(cw.eigenvalues[static_cast<std::size_t>(g)]),
                       ws.complex_weights[j].eigenvalues[static_cast<std::size_t>(g)], cfg.cluster_tol);
        if (!match) continue;
        cw.conjugate = static_cast<int>(j);
        ws.complex_weights[j].conjugate = static_cast<int>(i);
        MatC both(blocks[i].basis.rows(), 2 * cw.multiplicity);
        both << blocks[i].basis, blocks[j].basis;
        cw.space = Subspace<double>(real_span(both, 2 * cw.multiplicity), cfg.tol);
        ws.complex_weights[j].space = cw.space;
        break;
      }
      if (cw.conjugate < 0) throw MathError("non-real weight without a conjugate partner");
    }
  }

  // Group complex weights by real weight.
  for (std::size_t i = 0; i < ws.complex_weights.size(); ++i) {
    ComplexWeight& cw = ws.complex_weights[i];
    VecD value(k);
    for (int g = 0; g < k; ++g) value(g) = cw.values[static_cast<std::size_t>(g)].real();
    std::optional<VecQ> exps;
    if (base) {
      VecQ e(k);
      for (int g = 0; g < k; ++g) {
        Rational lam = (*cw.exact_eigenvalues)[static_cast<std::size_t>(g)];
        e(g) = exact_log(lam < 0 ? Rational(-lam) : lam, *base);
        value(g) = to_double(e(g)) * std::log(to_double(*base));
      }
      exps = e;
    }
    int found = -1;
    for (std::size_t r = 0; r < ws.real_weights.size(); ++r) {
      const RealWeight& rw = ws.real_weights[r];
      bool same;
      if (exps) {
        same = *rw.exponents == *exps;
      } else if (rep.mode() == ScalarMode::Exact) {
        same = true;
        const auto& other = *ws.complex_weights[static_cast<std::size_t>(rw.complex_weights.front())].exact_eigenvalues;
        for (int g = 0; g < k; ++g) {
          Rational a = (*cw.exact_eigenvalues)[static_cast<std::size_t>(g)];
          Rational b = other[static_cast<std::size_t>(g)];
          if ((a < 0 ? Rational(-a) : a) != (b < 0 ? Rational(-b) : b)) same = false;
        }
      } else {
        same = (rw.value - value).cwiseAbs().maxCoeff() <= cfg.cluster_tol;
      }
      if (same) {
        found = static_cast<int>(r);
        break;
      }
    }
    if (found < 0) {
      RealWeight rw;
      rw.value = value;
      rw.exponents = exps;
      ws.real_weights.push_back(std::move(rw));
      found = static_cast<int>(ws.real_weights.size() - 1);
    }
    ws.real_weights[static_cast<std::size_t>(found)].complex_weights.push_back(static_cast<int>(i));
    cw.real_weight = found;
  }

  for (RealWeight& rw : ws.real_weights) {
    if (rep.mode() == ScalarMode::Exact) {
      MatQ cols(rep.dim(), 0);
      for (int ci : rw.complex_weights) {
        const MatQ& b = ws.complex_weights[static_cast<std::size_t>(ci)].exact_space->basis();
        MatQ joined(rep.dim(), cols.cols() + b.cols());
        joined << cols, b;
        cols = joined;
      }
      rw.exact_space = Subspace<Rational>(cols);
      rw.space = to_double(*rw.exact_space);
      rw.multiplicity = static_cast<int>(cols.cols());
    } else {
      MatD cols(rep.dim(), 0);
      for (int ci : rw.complex_weights) {
        const ComplexWeight& cw = ws.complex_weights[static_cast<std::size_t>(ci)];
        if (!cw.is_real && cw.conjugate < ci) continue;  // pair counted once
        MatD joined(rep.dim(), cols.cols() + cw.space.dim());
        joined << cols, cw.space.basis();
        cols = joined;
      }
      rw.multiplicity = static_cast<int>(cols.cols());
      rw.space = Subspace<double>(orthonormal_basis(cols, cfg.tol), cfg.tol);
      if (rw.space.dim() != rw.multiplicity) throw MathError("weight spaces are not independent");
    }
  }
  return ws;
}

// ---------------------------------------------------------------------------
// Polytope and faces

WeightPolytope weight_polytope(const WeightSystem& ws) {
  if (ws.real_weights.empty()) throw MathError("weight_polytope: no weights");
  WeightPolytope wp;
  bool exact = true;
  for (const RealWeight& rw : ws.real_weights) {
    wp.points.push_back(rw.value);
    wp.multiplicities.push_back(rw.multiplicity);
    if (!rw.exponents) exact = false;
  }
  if (exact) {
    std::vector<VecQ> pts;
    for (const RealWeight& rw : ws.real_weights) pts.push_back(*rw.exponents);
    wp.lattice = face_lattice(pts, 0.0);
    wp.exact_points = std::move(pts);
  } else {
    wp.lattice = face_lattice(wp.points, ws.cfg.tol);
  }
  return wp;
}

int face_for_direction(const WeightPolytope& wp, const VecQ& h) {
  if (h.size() == 0 || is_zero_matrix(MatQ(h))) throw MathError("face_for_direction: zero direction");
  if (!wp.exact()) return face_for_direction(wp, to_double(h));
  const auto& pts = *wp.exact_points;
  if (pts.front().size() != h.size()) throw MathError("face_for_direction: dimension mismatch");
  std::vector<Rational> vals;
  for (const VecQ& p : pts) vals.push_back(p.dot(h));
  Rational best = *std::max_element(vals.begin(), vals.end());
  std::vector<int> set;
  for (std::size_t i = 0; i < vals.size(); ++i)
    if (vals[i] == best) set.push_back(static_cast<int>(i));
  int face = wp.lattice.find(set);
  if (face < 0) throw MathError("face_for_direction: maximizing set is not a face");
  return face;
}

int face_for_direction(const WeightPolytope& wp, const VecD& h, double tol) {
  if (h.size() == 0 || h.norm() == 0.0) throw MathError("face_for_direction: zero direction");
  if (wp.points.front().size() != h.size()) throw MathError("face_for_direction: dimension mismatch");
  VecD u = h / h.norm();
  std::vector<double> vals;
  double scale = 1.0;
  for (const VecD& p : wp.points) {
    vals.push_back(p.dot(u));
    scale = std::max(scale, p.norm());
  }
  double best = *std::max_element(vals.begin(), vals.end());
  std::vector<int> set;
  for (std::size_t i = 0; i < vals.size(); ++i)
    if (vals[i] >= best - tol * scale) set.push_back(static_cast<int>(i));
  int face = wp.lattice.find(set);
  if (face < 0) throw MathError("face_for_direction: maximizing set is not a face");
  return face;
}

FacePick face_subspaces(const WeightSystem& ws, const WeightPolytope& wp, int face) {
  if (face < 0 || face >= static_cast<int>(wp.lattice.faces.size()))
    throw MathError("face_subspaces: stale face reference");
  if (wp.points.size() != ws.real_weights.size()) throw MathError("face_subspaces: polytope belongs to another system");
  for (std::size_t i = 0; i < wp.points.size(); ++i)
    if (wp.points[i] != ws.real_weights[i].value) throw MathError("face_subspaces: polytope belongs to another system");

  FacePick pick;
  pick.face = face;
  pick.weights = wp.lattice.faces[static_cast<std::size_t>(face)];
  const int d = ws.rep.dim();
  std::vector<bool> in_face(ws.real_weights.size(), false);
  for (int w : pick.weights) in_face[static_cast<std::size_t>(w)] = true;

  if (ws.real_weights.front().exact_space) {
    MatQ f(d, 0), o(d, 0);
    for (std::size_t i = 0; i < ws.real_weights.size(); ++i) {
      MatQ& target = in_face[i] ? f : o;
      const MatQ& b = ws.real_weights[i].exact_space->basis();
      MatQ joined(d, target.cols() + b.cols());
      joined << target, b;
      target = joined;
    }
    pick.exact_face = f.cols() ? Subspace<Rational>(f) : Subspace<Rational>::zero(d);
    pick.exact_opp = o.cols() ? Subspace<Rational>(o) : Subspace<Rational>::zero(d);
    pick.v_face = to_double(*pick.exact_face);
    pick.v_opp = to_double(*pick.exact_opp);
  } else {
    MatD f(d, 0), o(d, 0);
    for (std::size_t i = 0; i < ws.real_weights.size(); ++i) {
      MatD& target = in_face[i] ? f : o;
      const MatD& b = ws.real_weights[i].space.basis();
      MatD joined(d, target.cols() + b.cols());
      joined << target, b;
      target = joined;
    }
    pick.v_face = f.cols() ? Subspace<double>(orthonormal_basis(f, ws.cfg.tol), ws.cfg.tol) : Subspace<double>::zero(d);
    pick.v_opp = o.cols() ? Subspace<double>(orthonormal_basis(o, ws.cfg.tol), ws.cfg.tol) : Subspace<double>::zero(d);
  }
  if (pick.v_face.dim() + pick.v_opp.dim() != d) throw MathError("face_subspaces: weight spaces do not span");
  return pick;
}

// ---------------------------------------------------------------------------
// Norm bounds

NormBoundReport verify_norm_bounds(const WeightSystem& ws, int radius, double growth_factor) {
  if (radius < 1) throw MathError("verify_norm_bounds: radius must be positive");
  const AbelianRep& rep = ws.rep;
  const int k = rep.rank();
  const int d = rep.dim();
  NormBoundReport rpt;
  rpt.radius = radius;
  rpt.growth_factor = growth_factor;
  rpt.note = "integer lattice points only";
  rpt.shell_max_r.assign(static_cast<std::size_t>(radius), 0.0);
  rpt.shell_max_inv_l.assign(static_cast<std::size_t>(radius), 0.0);

  // powers[g][n + radius] = g^n
  std::vector<std::vector<MatD>> powers(static_cast<std::size_t>(k));
  for (int g = 0; g < k; ++g) {
    auto& row = powers[static_cast<std::size_t>(g)];
    row.resize(static_cast<std::size_t>(2 * radius + 1));
    if (rep.mode() == ScalarMode::Exact) {
      const MatQ& gen = rep.exact_generators()[static_cast<std::size_t>(g)];
      MatQ inv = inverse(gen);
      MatQ up = identity<Rational>(d), down = identity<Rational>(d);
      row[static_cast<std::size_t>(radius)] = MatD::Identity(d, d);
      for (int n = 1; n <= radius; ++n) {
        up = (up * gen).eval();
        down = (down * inv).eval();
        row[static_cast<std::size_t>(radius + n)] = to_double(up);
        row[static_cast<std::size_t>(radius - n)] = to_double(down);
      }
    } else {
      const MatD& gen = rep.generators()[static_cast<std::size_t>(g)];
      MatD inv = inverse(gen);
      row[static_cast<std::size_t>(radius)] = MatD::Identity(d, d);
      for (int n = 1; n <= radius; ++n) {
        row[static_cast<std::size_t>(radius + n)] = row[static_cast<std::size_t>(radius + n - 1)] * gen;
        row[static_cast<std::size_t>(radius - n)] = row[static_cast<std::size_t>(radius - n + 1)] * inv;
      }
    }
  }

  std::vector<int> h(static_cast<std::size_t>(k), -radius);
  VecD hv(k);
  while (true) {
    int sup = 0;
    for (int v : h) sup = std::max(sup, std::abs(v));
    if (sup > 0) {
      MatD m = MatD::Identity(d, d);
      for (int g = 0; g < k; ++g) {
        m = (m * powers[static_cast<std::size_t>(g)][static_cast<std::size_t>(h[static_cast<std::size_t>(g)] + radius)]).eval();
        hv(g) = h[static_cast<std::size_t>(g)];
      }
      double top = -std::numeric_limits<double>::infinity(), bottom = std::numeric_limits<double>::infinity();
      for (const RealWeight& rw : ws.real_weights) {
        double v = rw.value.dot(hv);
        top = std::max(top, v);
        bottom = std::min(bottom, v);
      }
      Eigen::JacobiSVD<MatD> svd(m);
      const VecD& s = svd.singularValues();
      double poly = std::pow(static_cast<double>(sup), d - 1);
      double r_val = s(0) / (poly * std::exp(top));
      double inv_l = std::exp(bottom) / (s(s.size() - 1) * poly);
      auto idx = static_cast<std::size_t>(sup - 1);
      rpt.shell_max_r[idx] = std::max(rpt.shell_max_r[idx], r_val);
      rpt.shell_max_inv_l[idx] = std::max(rpt.shell_max_inv_l[idx], inv_l);
    }
    int pos = 0;
    while (pos < k && h[static_cast<std::size_t>(pos)] == radius) h[static_cast<std::size_t>(pos++)] = -radius;
    if (pos == k) break;
    ++h[static_cast<std::size_t>(pos)];
  }
  for (std::size_t i = 1; i < rpt.shell_max_r.size(); ++i) {
    rpt.shell_max_r[i] = std::max(rpt.shell_max_r[i], rpt.shell_max_r[i - 1]);
    rpt.shell_max_inv_l[i] = std::max(rpt.shell_max_inv_l[i], rpt.shell_max_inv_l[i - 1]);
  }
  rpt.max_r = rpt.shell_max_r.back();
  rpt.max_inv_l = rpt.shell_max_inv_l.back();
  rpt.finite = std::isfinite(rpt.max_r) && std::isfinite(rpt.max_inv_l);
  const auto half = static_cast<std::size_t>(std::max(1, radius / 2) - 1);
  rpt.stabilized = rpt.max_r <= growth_factor * rpt.shell_max_r[half] &&
                   rpt.max_inv_l <= growth_factor * rpt.shell_max_inv_l[half];
  rpt.pass = rpt.finite && rpt.stabilized;
  return rpt;
}

// ---------------------------------------------------------------------------
// Deformations

std::vector<int> match_weights(const WeightSystem& from, const WeightSystem& to) {
  const auto& a = from.real_weights;
  const auto& b = to.real_weights;
  if (a.size() != b.size()) {
    std::ostringstream msg;
    msg << "weight count changed from " << a.size() << " to " << b.size();
    throw MathError(msg.str());
  }
  std::vector<int> partner(a.size(), -1);
  double disp = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b.size(); ++j) {
      double dist = (a[i].value - b[j].value).norm();
      if (dist < best) {
        best = dist;
        partner[i] = static_cast<int>(j);
      }
    }
    disp = std::max(disp, best);
  }
  double sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) sep = std::min(sep, (a[i].value - a[j].value).norm());
  if (sep <= 2.0 * disp) {
    std::ostringstream msg;
    msg << "ambiguous weight matching: separation " << sep << " vs displacement " << disp;
    throw MathError(msg.str());
  }
  return partner;
}

ContinuityReport perturb_and_track(const WeightSystem& ws, const std::vector<MatD>& deltas, int steps) {
  const auto& gens = ws.rep.generators();
  if (deltas.size() != gens.size()) throw MathError("perturb_and_track: one delta per generator required");
  return perturb_and_track(
      ws,
      [&](double t) {
        std::vector<MatD> out;
        for (std::size_t i = 0; i < gens.size(); ++i) out.push_back(gens[i] + t * deltas[i]);
        return out;
      },
      steps);
}

ContinuityReport perturb_and_track(const WeightSystem& ws,
                                   const std::function<std::vector<MatD>(double)>& family, int steps) {
  if (steps < 1) throw MathError("perturb_and_track: steps must be positive");
  ContinuityReport rpt;
  WeightSystem prev = ws;
  for (int j = 1; j <= steps; ++j) {
    double t = static_cast<double>(j) / steps;
    ContinuityStep step;
    step.t = t;
    try {
      std::vector<MatD> gens = family(t);
      double defect = commutator_defect(gens);
      if (defect > ws.cfg.tol) {
        std::ostringstream msg;
        msg << "commutativity broken at t=" << t << " (relative commutator " << defect << ")";
        throw MathError(msg.str());
      }
      WeightSystem cur = decompose(AbelianRep::floating(std::move(gens), ws.cfg), std::nullopt, ws.cfg);
      std::vector<int> partner = match_weights(prev, cur);
      for (std::size_t i = 0; i < partner.size(); ++i) {
        const RealWeight& a = prev.real_weights[i];
        const RealWeight& b = cur.real_weights[static_cast<std::size_t>(partner[i])];
        step.weight_displacement = std::max(step.weight_displacement, (a.value - b.value).norm());
        if (a.space.dim() != b.space.dim()) throw MathError("weight space dimension changed");
        step.subspace_displacement = std::max(step.subspace_displacement, subspace_gap(a.space, b.space));
      }
      // Keep the labelling of the original system.
      WeightSystem relabeled = cur;
      for (std::size_t i = 0; i < partner.size(); ++i)
        relabeled.real_weights[i] = cur.real_weights[static_cast<std::size_t>(partner[i])];
      prev = std::move(relabeled);
    } catch (const MathError& e) {
      rpt.error = e.what();
      rpt.ok = false;
      return rpt;
    }
    rpt.max_weight_displacement = std::max(rpt.max_weight_displacement, step.weight_displacement);
    rpt.max_subspace_displacement = std::max(rpt.max_subspace_displacement, step.subspace_displacement);
    rpt.steps.push_back(step);
  }
  rpt.ok = true;
  return rpt;
}

}  // namespace projdyn
