#include "projdyn/peripheral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

namespace projdyn {

namespace {

// Loose threshold for float membership of a hint in a weight space.
constexpr double kLineTol = 1e-7;

bool hint_is_eigenline(const AbelianRep& rep, const VecQ& h) {
  if (rep.mode() == ScalarMode::Exact) {
    for (const MatQ& g : rep.exact_generators()) {
      MatQ pair(h.size(), 2);
      pair.col(0) = h;
      pair.col(1) = g * h;
      if (rank(pair) > 1) return false;
    }
    return true;
  }
  VecD hd = to_double(h);
  for (const MatD& g : rep.generators()) {
    VecD gh = g * hd;
    VecD resid = gh - (hd.dot(gh) / hd.squaredNorm()) * hd;
    if (resid.norm() > kLineTol * std::max(1.0, gh.norm())) return false;
  }
  return true;
}

bool space_contains(const RealWeight& rw, const VecQ& h) {
  if (rw.exact_space) {
    const MatQ& b = rw.exact_space->basis();
    MatQ joined(b.rows(), b.cols() + 1);
    joined << b, h;
    return rank(joined) == b.cols();
  }
  return proj_distance(ProjectivePoint<double>(to_double(h)), rw.space) <= kLineTol;
}

template <class T>
Vec<T> monomial_lift(const std::vector<Vec<T>>& lifts, const MultiIndex& a, int d) {
  std::vector<Vec<T>> forms;
  for (std::size_t v = 0; v < lifts.size(); ++v)
    for (int r = 0; r < a.exponents[v]; ++r) forms.push_back(lifts[v]);
  return sym_product(forms, d);
}

// Columns: all weight spaces of `ws`, the listed weights first in order.
template <class T>
Mat<T> adapted_basis(const WeightSystem& ws, const std::vector<int>& first, const std::vector<Vec<T>>& first_cols) {
  const int d = ws.rep.dim();
  Mat<T> out(d, d);
  int col = 0;
  for (const Vec<T>& c : first_cols) out.col(col++) = c;
  for (std::size_t r = 0; r < ws.real_weights.size(); ++r) {
    if (std::find(first.begin(), first.end(), static_cast<int>(r)) != first.end()) continue;
    const RealWeight& rw = ws.real_weights[r];
    if constexpr (std::is_same_v<T, Rational>) {
      const MatQ& b = rw.exact_space->basis();
      for (Eigen::Index j = 0; j < b.cols(); ++j) out.col(col++) = b.col(j);
    } else {
      const MatD& b = rw.space.basis();
      for (Eigen::Index j = 0; j < b.cols(); ++j) out.col(col++) = b.col(j);
    }
  }
  if (col != d) throw MathError("weight spaces do not fill the ambient space");
  return out;
}

std::string fmt_weight(const VecD& v) {
  std::ostringstream s;
  s << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s << (i ? ", " : "") << v(i);
  s << ")";
  return s.str();
}

double normalized_pairing(const VecD& w, const VecD& x) { return w.dot(x) / (w.norm() * x.norm()); }

}  // namespace

// ---------------------------------------------------------------------------
// Model

PeripheralModel build_model(const AbelianRep& rep, const std::vector<VecQ>& hints, std::optional<Rational> base,
                            const NumericConfig& cfg) {
  const int k = rep.rank();
  const int d = rep.dim();
  if (k < 1) throw MathError("peripheral model needs a group of positive rank");
  PeripheralModel model{rep, decompose(rep, base, cfg), {}, {}, {}, {}, {}, {}, {}, {}, {}};
  model.polytope = weight_polytope(model.weights);
  const WeightPolytope& wp = model.polytope;
  if (wp.dim() != k || static_cast<int>(wp.vertices().size()) != k + 1)
    throw MathError("weight polytope is not a " + std::to_string(k) + "-simplex");
  if (static_cast<int>(hints.size()) != k + 1)
    throw MathError("expected " + std::to_string(k + 1) + " simplex vertex hints");

  for (std::size_t i = 0; i < hints.size(); ++i) {
    const VecQ& h = hints[i];
    const std::string tag = "hint " + std::to_string(i + 1);
    if (h.size() != d) throw MathError(tag + " has the wrong dimension");
    if (is_zero_matrix(MatQ(h))) throw MathError(tag + " is zero");
    if (!hint_is_eigenline(rep, h)) throw MathError(tag + " is not an eigenline");
    int found = -1;
    for (std::size_t r = 0; r < model.weights.real_weights.size(); ++r)
      if (space_contains(model.weights.real_weights[r], h)) found = static_cast<int>(r);
    if (found < 0) throw MathError(tag + " does not lie in a weight space");
    const auto& verts = wp.vertices();
    if (std::find(verts.begin(), verts.end(), found) == verts.end()) {
      const bool inside = !wp.lattice.on_boundary(found);
      throw MathError(tag + " carries weight " + fmt_weight(model.weights.real_weights[found].value) +
                      (inside ? ", which is interior to the weight polytope" : ", which is not a polytope vertex"));
    }
    if (model.weights.real_weights[found].multiplicity != 1)
      throw MathError(tag + ": vertex weight space is not one-dimensional");
    if (std::find(model.vertex_weights.begin(), model.vertex_weights.end(), found) != model.vertex_weights.end())
      throw MathError(tag + " repeats a vertex");
    model.vertex_weights.push_back(found);
  }
  for (std::size_t r = 0; r < model.weights.real_weights.size(); ++r) {
    const int ri = static_cast<int>(r);
    if (std::find(model.vertex_weights.begin(), model.vertex_weights.end(), ri) != model.vertex_weights.end()) continue;
    if (wp.lattice.on_boundary(ri))
      throw MathError("weight " + fmt_weight(model.weights.real_weights[r].value) +
                      " lies on the boundary of the weight polytope without being a vertex");
    model.interior_weights.push_back(ri);
  }

  const int n = k + 1;
  if (rep.mode() == ScalarMode::Exact) {
    std::vector<VecQ> lifts(hints.begin(), hints.end());
    MatQ l(d, n);
    for (int v = 0; v < n; ++v) l.col(v) = lifts[static_cast<std::size_t>(v)];
    VecQ ones = VecQ::Constant(n, Rational(1));
    MatQ gram = l.transpose() * l;
    VecQ c = l * (inverse(gram) * ones);
    MatQ inv = inverse(adapted_basis<Rational>(model.weights, model.vertex_weights, lifts));
    std::vector<VecQ> duals;
    for (int v = 0; v < n; ++v) duals.push_back(inv.row(v).transpose());
    for (const VecQ& x : lifts) model.lifts.push_back(to_double(x));
    for (const VecQ& w : duals) model.dual_lifts.push_back(to_double(w));
    model.admissible = to_double(c);
    model.exact_lifts = std::move(lifts);
    model.exact_dual_lifts = std::move(duals);
    model.exact_admissible = std::move(c);
  } else {
    for (const VecQ& h : hints) model.lifts.push_back(to_double(h));
    MatD l(d, n);
    for (int v = 0; v < n; ++v) l.col(v) = model.lifts[static_cast<std::size_t>(v)];
    model.admissible = l * (l.transpose() * l).ldlt().solve(VecD::Ones(n));
    MatD inv = inverse(adapted_basis<double>(model.weights, model.vertex_weights, model.lifts));
    for (int v = 0; v < n; ++v) model.dual_lifts.push_back(inv.row(v).transpose());
  }
  return model;
}

std::vector<MultiIndex> boundary_weight_monomials(int vertices, int m) {
  if (m < 1) throw MathError("degree must be positive");
  if (vertices < 2) throw MathError("a simplex needs at least two vertices");
  std::vector<MultiIndex> out;
  for (const MultiIndex& a : compositions(vertices, m))
    if (std::find(a.exponents.begin(), a.exponents.end(), 0) != a.exponents.end()) out.push_back(a);
  return out;
}

std::vector<MultiIndex> boundary_weight_monomials(const PeripheralModel& model, int m) {
  if (model.vertex_count() != model.rank() + 1) throw MathError("invalid peripheral model");
  return boundary_weight_monomials(model.vertex_count(), m);
}

std::int64_t boundary_monomial_count(int k, int m) {
  std::int64_t all = binomial(m + k, k);
  std::int64_t inner = m - 1 >= k ? binomial(m - 1, k) : 0;
  return all - inner;
}

// ---------------------------------------------------------------------------
// Simplices

std::optional<VecD> SimplexPair::chart_point(const VecD& x) const {
  double c = chart.dot(x);
  if (!(c > 1e-300 * x.norm() * chart.norm()) || !std::isfinite(c)) return std::nullopt;
  return VecD(x / c);
}

MatD SimplexPair::chart_vertices() const {
  MatD out(ambient(), size());
  for (int i = 0; i < size(); ++i) out.col(i) = primal[static_cast<std::size_t>(i)];
  return out;
}

SimplexPair build_simplices(const PeripheralModel& model, int m) {
  const int d = model.dim();
  SimplexPair pair;
  pair.m = m;
  pair.monomials = boundary_weight_monomials(model, m);
  const SymBasis& basis = cached_sym_basis(d, m);
  const int n = pair.size();

  for (const MultiIndex& a : pair.monomials) {
    pair.primal_labels.push_back(monomial_label(a, "v"));
    pair.dual_labels.push_back(monomial_label(a, "v", true));
  }
  if (model.exact()) {
    std::vector<VecQ> primal, dual;
    VecQ chart = VecQ::Constant(basis.dim(), Rational(0));
    for (const MultiIndex& a : pair.monomials) {
      primal.push_back(monomial_lift(*model.exact_lifts, a, d));
      dual.push_back(plain_dual(monomial_lift(*model.exact_dual_lifts, a, d), basis));
      chart += multinomial(a) * dual.back();
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Rational p = dual[static_cast<std::size_t>(j)].dot(primal[static_cast<std::size_t>(i)]);
        Rational expect = i == j ? Rational(1) / multinomial(pair.monomials[static_cast<std::size_t>(i)]) : Rational(0);
        if (p != expect) throw MathError("duality incidence fails between " + pair.dual_labels[j] + " and " +
                                         pair.primal_labels[i]);
      }
    }
    for (const VecQ& x : primal) pair.primal.push_back(to_double(x));
    for (const VecQ& w : dual) pair.dual.push_back(to_double(w));
    pair.chart = to_double(chart);
    pair.exact_primal = std::move(primal);
    pair.exact_dual = std::move(dual);
  } else {
    VecD chart = VecD::Zero(basis.dim());
    for (const MultiIndex& a : pair.monomials) {
      pair.primal.push_back(monomial_lift(model.lifts, a, d));
      pair.dual.push_back(plain_dual(monomial_lift(model.dual_lifts, a, d), basis));
      chart += to_double(multinomial(a)) * pair.dual.back();
    }
    pair.chart = chart;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double p = normalized_pairing(pair.dual[static_cast<std::size_t>(j)], pair.primal[static_cast<std::size_t>(i)]);
        if ((i == j) == (std::abs(p) <= kLineTol))
          throw MathError("duality incidence fails between " + pair.dual_labels[j] + " and " + pair.primal_labels[i]);
      }
  }

  // Cross-validation against the weights of the actual symmetric power.
  pair.sym_rep = sym_power_rep(model.rep, m);
  pair.sym_weights = decompose(pair.sym_rep, model.weights.base, model.weights.cfg);
  pair.sym_polytope = weight_polytope(pair.sym_weights);
  const auto& sw = pair.sym_weights.real_weights;
  for (int i = 0; i < n; ++i) {
    const std::string& label = pair.primal_labels[static_cast<std::size_t>(i)];
    int found = -1;
    for (std::size_t r = 0; r < sw.size(); ++r) {
      bool in = pair.exact() ? space_contains(sw[r], (*pair.exact_primal)[static_cast<std::size_t>(i)])
                             : proj_distance(ProjectivePoint<double>(pair.primal[static_cast<std::size_t>(i)]),
                                             sw[r].space) <= kLineTol;
      if (in) found = static_cast<int>(r);
    }
    if (found < 0) throw MathError("vertex " + label + " is not in a weight space of the symmetric power");
    if (sw[static_cast<std::size_t>(found)].multiplicity != 1)
      throw MathError("vertex " + label + " has a weight space of dimension > 1");
    if (!pair.sym_polytope.lattice.on_boundary(found))
      throw MathError("vertex " + label + " carries an interior weight");
    if (sw[static_cast<std::size_t>(found)].exponents && model.weights.real_weights.front().exponents) {
      VecQ expect = VecQ::Constant(model.rank(), Rational(0));
      const MultiIndex& a = pair.monomials[static_cast<std::size_t>(i)];
      for (std::size_t v = 0; v < a.exponents.size(); ++v)
        expect += Rational(a.exponents[v]) *
                  *model.weights.real_weights[static_cast<std::size_t>(model.vertex_weights[v])].exponents;
      if (expect != *sw[static_cast<std::size_t>(found)].exponents)
        throw MathError("vertex " + label + " carries the wrong weight");
    }
    pair.vertex_sym_weight.push_back(found);
  }
  int boundary = 0;
  for (std::size_t r = 0; r < sw.size(); ++r)
    if (pair.sym_polytope.lattice.on_boundary(static_cast<int>(r))) ++boundary;
  if (boundary != n) throw MathError("boundary weights of the symmetric power do not match the monomials");

  // Each dual vertex kills every other weight space.
  for (int j = 0; j < n; ++j) {
    for (std::size_t r = 0; r < sw.size(); ++r) {
      if (static_cast<int>(r) == pair.vertex_sym_weight[static_cast<std::size_t>(j)]) continue;
      bool ok;
      if (pair.exact()) {
        ok = is_zero_matrix(MatQ((*pair.exact_dual)[static_cast<std::size_t>(j)].transpose() * sw[r].exact_space->basis()));
      } else {
        const VecD& w = pair.dual[static_cast<std::size_t>(j)];
        ok = (w.transpose() * sw[r].space.basis()).norm() <= kLineTol * w.norm() * sw[r].space.basis().norm();
      }
      if (!ok) throw MathError("dual vertex " + pair.dual_labels[j] + " does not contain the other weight spaces");
    }
  }

  // Invariance: each generator fixes each vertex line.
  if (pair.exact()) {
    for (const MatQ& g : pair.sym_rep.exact_generators())
      for (int i = 0; i < n; ++i) {
        const VecQ& x = (*pair.exact_primal)[static_cast<std::size_t>(i)];
        MatQ two(x.size(), 2);
        two.col(0) = x;
        two.col(1) = g * x;
        if (rank(two) != 1) throw MathError("vertex " + pair.primal_labels[i] + " is not invariant");
      }
  }
  return pair;
}

// ---------------------------------------------------------------------------
// Flag boundary

FlagBoundarySample sample_flag_boundary(const SimplexPair& pair, int count, std::uint64_t seed) {
  const int n = pair.size();
  const int dim = pair.ambient();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> coeff(1, 9);
  FlagBoundarySample out;
  for (int s = 0; s < count; ++s) {
    std::vector<int> face, co;
    do {
      face.clear();
      co.clear();
      for (int i = 0; i < n; ++i) (coin(rng) ? face : co).push_back(i);
    } while (face.empty() || co.empty());
    std::vector<int> dual_face;
    do {
      dual_face.clear();
      for (int i : co)
        if (coin(rng)) dual_face.push_back(i);
    } while (dual_face.empty());

    std::vector<Rational> pc(static_cast<std::size_t>(n), Rational(0)), hc(static_cast<std::size_t>(n), Rational(0));
    for (int i : face) pc[static_cast<std::size_t>(i)] = coeff(rng);
    for (int i : dual_face) hc[static_cast<std::size_t>(i)] = coeff(rng);
    if (pair.exact()) {
      VecQ x = VecQ::Constant(dim, Rational(0)), w = VecQ::Constant(dim, Rational(0));
      for (int i = 0; i < n; ++i) {
        x += pc[static_cast<std::size_t>(i)] * (*pair.exact_primal)[static_cast<std::size_t>(i)];
        w += hc[static_cast<std::size_t>(i)] * (*pair.exact_dual)[static_cast<std::size_t>(i)];
      }
      Flag<Rational> exact{ProjectivePoint<Rational>(x), DualPoint<Rational>(w)};
      Flag<double> approx(to_double(exact.point()), to_double(exact.hyperplane()));
      out.flags.push_back(BoundaryFlag{std::move(pc), std::move(hc), std::move(approx), std::move(exact)});
    } else {
      VecD x = VecD::Zero(dim), w = VecD::Zero(dim);
      for (int i = 0; i < n; ++i) {
        x += to_double(pc[static_cast<std::size_t>(i)]) * pair.primal[static_cast<std::size_t>(i)];
        w += to_double(hc[static_cast<std::size_t>(i)]) * pair.dual[static_cast<std::size_t>(i)];
      }
      Flag<double> approx(ProjectivePoint<double>(x), DualPoint<double>(w), 1e-9);
      out.flags.push_back(BoundaryFlag{std::move(pc), std::move(hc), std::move(approx), std::nullopt});
    }
  }
  return out;
}

bool verify_boundary_flag(const SimplexPair& pair, const BoundaryFlag& f, double tol) {
  const int n = pair.size();
  auto proper = [&](const std::vector<Rational>& c) {
    if (static_cast<int>(c.size()) != n) return false;
    bool zero = false, positive = false;
    for (const Rational& x : c) {
      if (x < 0) return false;
      (x == 0 ? zero : positive) = true;
    }
    return zero && positive;
  };
  if (!proper(f.point_coeffs) || !proper(f.hyperplane_coeffs)) return false;
  if (pair.exact() && f.exact) {
    VecQ x = VecQ::Constant(pair.ambient(), Rational(0)), w = x;
    for (int i = 0; i < n; ++i) {
      x += f.point_coeffs[static_cast<std::size_t>(i)] * (*pair.exact_primal)[static_cast<std::size_t>(i)];
      w += f.hyperplane_coeffs[static_cast<std::size_t>(i)] * (*pair.exact_dual)[static_cast<std::size_t>(i)];
    }
    return ProjectivePoint<Rational>(x) == f.exact->point() && DualPoint<Rational>(w) == f.exact->hyperplane() &&
           w.dot(x) == 0;
  }
  VecD x = VecD::Zero(pair.ambient()), w = x;
  for (int i = 0; i < n; ++i) {
    x += to_double(f.point_coeffs[static_cast<std::size_t>(i)]) * pair.primal[static_cast<std::size_t>(i)];
    w += to_double(f.hyperplane_coeffs[static_cast<std::size_t>(i)]) * pair.dual[static_cast<std::size_t>(i)];
  }
  return proj_distance(ProjectivePoint<double>(x), f.flag.point()) <= tol &&
         proj_distance(ProjectivePoint<double>(w), ProjectivePoint<double>(f.flag.hyperplane().coords())) <= tol &&
         std::abs(normalized_pairing(f.flag.hyperplane().coords(), f.flag.point().coords())) <= tol;
}

// ---------------------------------------------------------------------------
// Attraction region

AttractionRegion attraction_region(const SimplexPair& pair) {
  AttractionRegion r;
  r.dual_vertex_lifts = pair.dual;
  r.exact_dual_vertex_lifts = pair.exact_dual;
  r.primal_vertex_lifts = pair.primal;
  return r;
}

namespace {

Membership cone_membership(const std::vector<VecD>& walls, const VecD& x) {
  if (walls.empty()) throw MathError("empty cone description");
  if (walls.front().size() != x.size()) throw MathError("region membership: dimension mismatch");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const VecD& w : walls) {
    double p = normalized_pairing(w, x);
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  Membership out;
  if (lo > 0) {
    out = {true, lo, 1};
  } else if (hi < 0) {
    out = {true, -hi, -1};
  } else {
    out = {false, std::max(lo, -hi), 0};
  }
  return out;
}

}  // namespace

Membership region_membership(const AttractionRegion& region, const ProjectivePoint<double>& x) {
  return cone_membership(region.dual_vertex_lifts, x.coords());
}

Membership dual_region_membership(const AttractionRegion& region, const DualPoint<double>& w) {
  return cone_membership(region.primal_vertex_lifts, w.coords());
}

std::vector<VecD> sample_region(const AttractionRegion& region, int count, double margin, std::uint64_t seed,
                                int max_attempts) {
  const int dim = static_cast<int>(region.dual_vertex_lifts.front().size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<VecD> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++attempts > max_attempts) throw MathError("could not sample the attraction cone with the requested margin");
    VecD x(dim);
    for (int i = 0; i < dim; ++i) x(i) = gauss(rng);
    x.normalize();
    Membership mem = cone_membership(region.dual_vertex_lifts, x);
    if (mem.member && mem.margin >= margin) out.push_back(mem.sign * x);
  }
  return out;
}

double distance_to_face(const SimplexPair& pair, const std::vector<int>& vertices, const VecD& x) {
  if (vertices.empty()) throw MathError("empty face");
  auto p = pair.chart_point(x);
  if (!p) return std::numeric_limits<double>::infinity();
  MatD cols(pair.ambient(), static_cast<Eigen::Index>(vertices.size()));
  for (std::size_t i = 0; i < vertices.size(); ++i)
    cols.col(static_cast<Eigen::Index>(i)) = pair.primal[static_cast<std::size_t>(vertices[i])];
  return nearest_point_in_hull(cols, *p).distance;
}

double distance_to_boundary(const SimplexPair& pair, const VecD& x) {
  const int n = pair.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> facet;
  for (int skip = 0; skip < n; ++skip) {
    facet.clear();
    for (int i = 0; i < n; ++i)
      if (i != skip) facet.push_back(i);
    best = std::min(best, distance_to_face(pair, facet, x));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Attraction experiment

AttractionReport attraction_experiment(const SimplexPair& pair, const AttractionRegion& region,
                                       const std::vector<long>& direction, int n_max, const AttractionConfig& cfg) {
  const int k = pair.sym_rep.rank();
  if (static_cast<int>(direction.size()) != k) throw MathError("direction has the wrong length");
  if (std::all_of(direction.begin(), direction.end(), [](long v) { return v == 0; }))
    throw MathError("direction must be nonzero");
  if (n_max < 0) throw MathError("n_max must be nonnegative");

  AttractionReport rpt;
  rpt.direction = direction;
  rpt.n_max = n_max;
  rpt.samples = cfg.samples;

  VecQ hq(k);
  for (int i = 0; i < k; ++i) hq(i) = Rational(direction[static_cast<std::size_t>(i)]);
  const int face = face_for_direction(pair.sym_polytope, hq);
  const auto& fw = pair.sym_polytope.lattice.faces[static_cast<std::size_t>(face)];
  for (int i = 0; i < pair.size(); ++i)
    if (std::find(fw.begin(), fw.end(), pair.vertex_sym_weight[static_cast<std::size_t>(i)]) != fw.end())
      rpt.predicted_face.push_back(i);

  std::vector<VecD> xs = sample_region(region, cfg.samples, cfg.margin, cfg.seed);
  for (int n = 0; n <= n_max; ++n) {
    MatD g;
    if (n > 0) {
      std::vector<long> h(direction);
      for (long& v : h) v *= n;
      g = pair.sym_rep.element(h);
    }
    double bd = 0.0, fd = 0.0;
    for (VecD& x : xs) {
      VecD y = n > 0 ? VecD(g * x) : x;
      y.normalize();
      bd = std::max(bd, distance_to_boundary(pair, y));
      fd = std::max(fd, distance_to_face(pair, rpt.predicted_face, y));
      if (n == n_max) {
        std::vector<int> support;
        if (auto p = pair.chart_point(y)) {
          HullProjection hp = nearest_point_in_hull(pair.chart_vertices(), *p);
          for (int i = 0; i < pair.size(); ++i)
            if (hp.weights(i) > cfg.support_tol) support.push_back(i);
        }
        rpt.limiting_faces.push_back(std::move(support));
      }
    }
    rpt.boundary_distance.push_back(bd);
    rpt.face_distance.push_back(fd);
  }
  rpt.limits_match = std::all_of(rpt.limiting_faces.begin(), rpt.limiting_faces.end(),
                                 [&](const std::vector<int>& f) { return f == rpt.predicted_face; });

  if (n_max == 0) {
    rpt.verdict = Verdict::Inconclusive;
    rpt.note = "no steps taken";
    return rpt;
  }
  const int kk = static_cast<int>(rpt.predicted_face.size());
  rpt.contraction = detect_contraction(MatrixSequence::abelian_ray(pair.sym_rep, direction, n_max), kk, cfg.detection);
  if (!rpt.contraction->detected) {
    rpt.verdict = Verdict::Inconclusive;
    rpt.note = "contraction not detected within n_max";
    return rpt;
  }
  MatD span(pair.ambient(), kk);
  for (int i = 0; i < kk; ++i) span.col(i) = pair.primal[static_cast<std::size_t>(rpt.predicted_face[static_cast<std::size_t>(i)])];
  rpt.attracting_distance = containment_distance(*rpt.contraction->attracting, Subspace<double>(span));
  const bool pass = rpt.boundary_distance.back() <= cfg.tol && rpt.face_distance.back() <= cfg.tol &&
                    rpt.limits_match && rpt.attracting_distance <= cfg.tol;
  rpt.verdict = pass ? Verdict::Pass : Verdict::Fail;
  if (!pass) {
    if (!rpt.limits_match) rpt.note = "limiting face differs from the prediction";
    else if (rpt.attracting_distance > cfg.tol) rpt.note = "attracting subspace is not spanned by the predicted vertices";
    else rpt.note = "samples did not reach the boundary within tolerance";
  }
  return rpt;
}

// ---------------------------------------------------------------------------
// Perturbations

std::string_view to_string(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::Conjugation: return "conjugation";
    case PerturbationKind::EigenvalueScaling: return "eigenvalue-scaling";
    case PerturbationKind::Custom: return "custom";
  }
  return "?";
}

PerturbationFamily conjugation_family(const SimplexPair& pair, std::uint64_t seed) {
  const int n = pair.ambient();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  MatD x(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) x(i, j) = gauss(rng);
  x /= operator_norm_and_conorm(x).first;
  std::vector<MatD> gens = pair.sym_rep.generators();
  PerturbationFamily fam;
  fam.kind = PerturbationKind::Conjugation;
  fam.description = "exp(eps X) g exp(-eps X), X random with ||X|| = 1, seed " + std::to_string(seed);
  fam.generators = [x, gens](double eps) {
    MatD e = (eps * x).exp();
    MatD e_inv = (-eps * x).exp();
    std::vector<MatD> out;
    for (const MatD& g : gens) out.push_back(e * g * e_inv);
    return out;
  };
  return fam;
}

PerturbationFamily eigenvalue_scaling_family(const PeripheralModel& model, int m, int vertex, int generator) {
  if (vertex < 0 || vertex >= model.vertex_count()) throw MathError("vertex index out of range");
  if (generator < 0 || generator >= model.rank()) throw MathError("generator index out of range");
  MatD proj = model.lifts[static_cast<std::size_t>(vertex)] * model.dual_lifts[static_cast<std::size_t>(vertex)].transpose();
  std::vector<MatD> base = model.rep.generators();
  PerturbationFamily fam;
  fam.kind = PerturbationKind::EigenvalueScaling;
  fam.description = "generator " + std::to_string(generator + 1) + " eigenvalue on vertex v" +
                    std::to_string(vertex + 1) + " shifted by eps";
  fam.generators = [proj, base, m, generator](double eps) {
    std::vector<MatD> out;
    for (std::size_t i = 0; i < base.size(); ++i) {
      MatD g = static_cast<int>(i) == generator ? MatD(base[i] + eps * proj) : base[i];
      out.push_back(sym_power_matrix(g, m));
    }
    return out;
  };
  return fam;
}

PerturbationFamily custom_family(std::function<std::vector<MatD>(double)> generators, std::string description) {
  return {PerturbationKind::Custom, std::move(description), std::move(generators)};
}

namespace {

// All h in Z^k with |h|_inf == r, in lexicographic order.
std::vector<std::vector<long>> shell(int k, int r) {
  std::vector<std::vector<long>> out;
  std::vector<long> h(static_cast<std::size_t>(k), -r);
  while (true) {
    long mx = 0;
    for (long v : h) mx = std::max(mx, std::labs(v));
    if (mx == r) out.push_back(h);
    int i = k - 1;
    while (i >= 0 && h[static_cast<std::size_t>(i)] == r) h[static_cast<std::size_t>(i--)] = -r;
    if (i < 0) break;
    ++h[static_cast<std::size_t>(i)];
  }
  return out;
}

struct Containment {
  std::vector<bool> shell_ok;
  std::vector<std::vector<long>> first_failure;  ///< per shell, empty if none
};

Containment containment_grid(const std::vector<MatD>& gens, const MatD& vertices, const VecD& chart,
                             const std::vector<VecD>& samples, double u_margin, int t_max) {
  const int k = static_cast<int>(gens.size());
  const int n = static_cast<int>(gens.front().rows());
  // powers[i][e + t_max] = g_i^e
  std::vector<std::vector<MatD>> powers(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    auto& p = powers[static_cast<std::size_t>(i)];
    p.assign(static_cast<std::size_t>(2 * t_max + 1), MatD::Identity(n, n));
    MatD g = gens[static_cast<std::size_t>(i)], gi = inverse(g);
    for (int e = 1; e <= t_max; ++e) {
      p[static_cast<std::size_t>(t_max + e)] = g * p[static_cast<std::size_t>(t_max + e - 1)];
      p[static_cast<std::size_t>(t_max - e)] = gi * p[static_cast<std::size_t>(t_max - e + 1)];
    }
  }
  Containment out;
  for (int r = 1; r <= t_max; ++r) {
    bool ok = true;
    std::vector<long> fail;
    for (const auto& h : shell(k, r)) {
      MatD s = MatD::Identity(n, n);
      for (int i = 0; i < k; ++i) s = powers[static_cast<std::size_t>(i)][static_cast<std::size_t>(t_max + h[static_cast<std::size_t>(i)])] * s;
      for (const VecD& x : samples) {
        VecD y = s * x;
        y.normalize();
        double c = chart.dot(y);
        double dist = c > 0 ? nearest_point_in_hull(vertices, VecD(y / c)).distance
                            : std::numeric_limits<double>::infinity();
        if (!(dist <= u_margin)) {
          ok = false;
          break;
        }
      }
      if (!ok) {
        fail = h;
        break;
      }
    }
    out.shell_ok.push_back(ok);
    out.first_failure.push_back(fail);
  }
  return out;
}

int threshold_of(const std::vector<bool>& shell_ok) {
  int t = static_cast<int>(shell_ok.size());
  if (t == 0 || !shell_ok.back()) return -1;
  while (t > 1 && shell_ok[static_cast<std::size_t>(t - 2)]) --t;
  return t;
}

}  // namespace

PerturbationReport perturbation_experiment(const PeripheralModel& model, const SimplexPair& pair,
                                           const PerturbationFamily& family, const PerturbationConfig& cfg) {
  (void)model;
  if (cfg.t_max < 1) throw MathError("t_max must be positive");
  if (!family.generators) throw MathError("perturbation family has no generators");
  PerturbationReport rpt;
  rpt.kind = family.kind;
  rpt.description = family.description;

  AttractionRegion region = attraction_region(pair);
  std::vector<VecD> ks = sample_region(region, cfg.k_samples, cfg.k_margin, cfg.seed);
  const int n = pair.size();
  const int dim = pair.ambient();

  Containment base = containment_grid(pair.sym_rep.generators(), pair.chart_vertices(), pair.chart, ks, cfg.u_margin,
                                      cfg.t_max);
  rpt.base_t_min = threshold_of(base.shell_ok);

  NumericConfig ncfg = pair.sym_weights.cfg;
  ncfg.tol = std::max(ncfg.tol, cfg.commute_tol);
  bool all_ok = true;
  for (double eps : cfg.epsilons) {
    PerturbationStep step;
    step.epsilon = eps;
    try {
      std::vector<MatD> gens = family.generators(eps);
      if (static_cast<int>(gens.size()) != pair.sym_rep.rank()) throw MathError("family has the wrong rank");
      if (commutator_defect(gens) > cfg.commute_tol) throw MathError("commutativity violation");
      WeightSystem ws = decompose(AbelianRep::floating(gens, ncfg), std::nullopt, ncfg);
      std::vector<int> partner = match_weights(pair.sym_weights, ws);
      for (std::size_t r = 0; r < partner.size(); ++r)
        step.weight_displacement =
            std::max(step.weight_displacement,
                     (pair.sym_weights.real_weights[r].value - ws.real_weights[static_cast<std::size_t>(partner[r])].value)
                         .cwiseAbs()
                         .maxCoeff());

      std::vector<int> vert_weights;
      std::vector<VecD> verts;
      for (int i = 0; i < n; ++i) {
        const int r = partner[static_cast<std::size_t>(pair.vertex_sym_weight[static_cast<std::size_t>(i)])];
        const RealWeight& rw = ws.real_weights[static_cast<std::size_t>(r)];
        if (rw.multiplicity != 1) throw MathError("perturbed vertex weight space is not one-dimensional");
        VecD v = rw.space.basis().col(0);
        double c = pair.chart.dot(v);
        if (std::abs(c) < 1e-12 * v.norm()) throw MathError("perturbed vertex leaves the chart");
        v /= c;
        step.vertex_displacement = std::max(
            step.vertex_displacement,
            proj_distance(ProjectivePoint<double>(v), ProjectivePoint<double>(pair.primal[static_cast<std::size_t>(i)])));
        vert_weights.push_back(r);
        verts.push_back(v);
      }
      MatD inv = inverse(adapted_basis<double>(ws, vert_weights, verts));
      MatD vmat(dim, n);
      for (int i = 0; i < n; ++i) {
        vmat.col(i) = verts[static_cast<std::size_t>(i)];
        VecD w = inv.row(i).transpose();
        step.dual_vertex_displacement =
            std::max(step.dual_vertex_displacement,
                     proj_distance(ProjectivePoint<double>(w), ProjectivePoint<double>(pair.dual[static_cast<std::size_t>(i)])));
        for (int j = 0; j < n; ++j)
          if (j != i)
            step.incidence_defect =
                std::max(step.incidence_defect, std::abs(normalized_pairing(w, verts[static_cast<std::size_t>(j)])));
      }

      Containment grid = containment_grid(gens, vmat, pair.chart, ks, cfg.u_margin, cfg.t_max);
      step.shell_ok = grid.shell_ok;
      step.t_min = threshold_of(grid.shell_ok);
      const int from = rpt.base_t_min > 0 ? rpt.base_t_min : 1;
      step.contained_from_base_t_min = rpt.base_t_min > 0;
      for (int r = from; r <= cfg.t_max; ++r) {
        if (!grid.shell_ok[static_cast<std::size_t>(r - 1)]) {
          step.contained_from_base_t_min = false;
          if (!step.failing_h) step.failing_h = grid.first_failure[static_cast<std::size_t>(r - 1)];
        }
      }
    } catch (const MathError& e) {
      step.error = e.what();
      all_ok = false;
    }
    rpt.steps.push_back(std::move(step));
  }

  std::vector<std::pair<double, double>> by_eps;
  for (const auto& s : rpt.steps) {
    if (!s.error.empty()) continue;
    by_eps.emplace_back(s.epsilon, s.vertex_displacement);
    if (s.epsilon > 0) rpt.displacement_constant = std::max(rpt.displacement_constant, s.vertex_displacement / s.epsilon);
  }
  std::sort(by_eps.begin(), by_eps.end());
  rpt.monotone = true;
  for (std::size_t i = 1; i < by_eps.size(); ++i)
    if (by_eps[i].second < by_eps[i - 1].second) rpt.monotone = false;
  rpt.ok = all_ok;
  return rpt;
}

}  // namespace projdyn
