#include "projdyn/hilbert.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <limits>

namespace projdyn {

std::string_view to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::PolytopeV:
      return "polytope-v";
    case DomainKind::PolytopeH:
      return "polytope-h";
    case DomainKind::Ellipsoid:
      return "ellipsoid";
  }
  return "?";
}

namespace {

VecQ normalize_covector(const VecQ& w) {
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w(i) != 0) {
      Rational s = w(i) < 0 ? Rational(-w(i)) : w(i);
      return w / s;
    }
  throw MathError("zero covector");
}

MatQ columns(const std::vector<VecQ>& vs) {
  MatQ m(vs.front().size(), static_cast<Eigen::Index>(vs.size()));
  for (std::size_t i = 0; i < vs.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = vs[i];
  return m;
}

MatD columns(const std::vector<VecD>& vs) {
  MatD m(vs.front().size(), static_cast<Eigen::Index>(vs.size()));
  for (std::size_t i = 0; i < vs.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = vs[i];
  return m;
}

}  // namespace

ConvexDomain ConvexDomain::polytope_v(const std::vector<VecQ>& vertex_lifts, std::optional<VecQ> chart) {
  if (vertex_lifts.empty()) throw MathError("polytope needs vertices");
  const int d = static_cast<int>(vertex_lifts.front().size());
  for (const VecQ& v : vertex_lifts)
    if (v.size() != d) throw MathError("polytope: vertex dimension mismatch");
  if (static_cast<int>(vertex_lifts.size()) < d) throw MathError("polytope is degenerate (lower-dimensional)");
  if (rank(columns(vertex_lifts)) < d) throw MathError("polytope is degenerate (lower-dimensional)");

  auto facets = cone_facets(vertex_lifts, 0.0);
  std::vector<VecQ> normals;
  for (const auto& f : facets) normals.push_back(f.normal);
  if (normals.empty() || rank(columns(normals)) < d) throw MathError("vertex lifts do not bound a properly convex set");

  VecQ c;
  if (chart) {
    if (chart->size() != d) throw MathError("chart dimension mismatch");
    c = *chart;
  } else {
    c = VecQ::Zero(d);
    for (const VecQ& n : normals) c += normalize_covector(n);
    c = normalize_covector(c);
  }

  ConvexDomain dom;
  dom.kind_ = DomainKind::PolytopeV;
  dom.dim_ = d;
  dom.chart_ = c;
  for (std::size_t i = 0; i < vertex_lifts.size(); ++i) {
    // Keep extreme rays only: the facets through a ray must cut it out.
    std::vector<VecQ> through;
    for (const auto& f : facets)
      if (std::binary_search(f.incident.begin(), f.incident.end(), static_cast<int>(i))) through.push_back(f.normal);
    if (through.empty() || rank(columns(through).transpose().eval()) != d - 1) continue;
    Rational s = c.dot(vertex_lifts[i]);
    if (s <= 0) throw MathError("chart covector is not positive on the polytope");
    VecQ v = vertex_lifts[i] / s;
    bool dup = false;
    for (const VecQ& u : dom.vertices_)
      if (u == v) dup = true;
    if (!dup) dom.vertices_.push_back(v);
  }
  dom.finish_polytope();
  return dom;
}

ConvexDomain ConvexDomain::polytope_h(const std::vector<VecQ>& covectors, std::optional<VecQ> chart) {
  if (covectors.empty()) throw MathError("polytope needs half-spaces");
  const int d = static_cast<int>(covectors.front().size());
  for (const VecQ& w : covectors)
    if (w.size() != d) throw MathError("polytope: covector dimension mismatch");
  if (rank(columns(covectors)) < d) throw MathError("half-spaces do not bound the region in the chart");
  auto rays = cone_facets(covectors, 0.0);
  std::vector<VecQ> verts;
  for (const auto& r : rays) verts.push_back(r.normal);
  if (static_cast<int>(verts.size()) < d || rank(columns(verts)) < d)
    throw MathError("half-spaces cut out a degenerate region");
  ConvexDomain dom = polytope_v(verts, std::move(chart));
  dom.kind_ = DomainKind::PolytopeH;
  return dom;
}

ConvexDomain ConvexDomain::ellipsoid(const MatD& form) {
  if (form.rows() != form.cols() || form.rows() < 2) throw MathError("ellipsoid: square form of size >= 2 required");
  if ((form - form.transpose()).norm() > 1e-12 * std::max(1.0, form.norm()))
    throw MathError("ellipsoid: form is not symmetric");
  Eigen::SelfAdjointEigenSolver<MatD> es(form);
  const VecD& ev = es.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  int pos = 0, neg = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > 1e-12 * scale) ++pos;
    if (ev(i) < -1e-12 * scale) ++neg;
  }
  if (pos != 1 || neg != static_cast<int>(form.rows()) - 1)
    throw MathError("ellipsoid: form must have signature (1, d-1)");
  ConvexDomain dom;
  dom.kind_ = DomainKind::Ellipsoid;
  dom.dim_ = static_cast<int>(form.rows());
  dom.form_ = 0.5 * (form + form.transpose());
  VecD e = es.eigenvectors().col(ev.size() - 1);
  dom.chart_d_ = dom.form_ * e;
  dom.chart_d_ /= dom.chart_d_.norm();
  dom.vertices_d_ = {e};
  return dom;
}

void ConvexDomain::finish_polytope() {
  const int d = dim_;
  if (static_cast<int>(vertices_.size()) < d) throw MathError("polytope is degenerate (lower-dimensional)");
  auto facets = cone_facets(vertices_, 0.0);
  facets_.clear();
  facet_vertices_.clear();
  for (const auto& f : facets) {
    facets_.push_back(normalize_covector(f.normal));
    facet_vertices_.push_back(f.incident);
  }
  lattice_ = face_lattice(vertices_, 0.0);
  if (lattice_.dim != d - 1) throw MathError("polytope is degenerate (lower-dimensional)");
  chart_d_ = to_double(chart_);
  vertices_d_.clear();
  facets_d_.clear();
  for (const VecQ& v : vertices_) vertices_d_.push_back(to_double(v));
  for (const VecQ& f : facets_) facets_d_.push_back(to_double(f));
}

ProjectivePoint<double> ConvexDomain::interior_point() const {
  if (!is_polytope()) return ProjectivePoint<double>(vertices_d_.front());
  VecD sum = VecD::Zero(dim_);
  for (const VecD& v : vertices_d_) sum += v;
  return ProjectivePoint<double>(sum);
}

VecD ConvexDomain::chart_lift(const ProjectivePoint<double>& x) const {
  if (x.dim() != dim_) throw MathError("domain: dimension mismatch");
  double c = chart_d_.dot(x.coords());
  if (std::abs(c) <= 1e-14) throw MathError("point lies on the hyperplane at infinity of the chart");
  return x.coords() / c;
}

double ConvexDomain::margin(const ProjectivePoint<double>& x) const {
  VecD p = chart_lift(x);
  if (!is_polytope()) return p.dot(form_ * p) / form_.norm();
  double m = std::numeric_limits<double>::infinity();
  for (const VecD& f : facets_d_) m = std::min(m, f.dot(p) / f.norm());
  return m;
}

// ---------------------------------------------------------------------------
// Chords

namespace {

template <class T>
struct Chord {
  Vec<T> x, delta;
  T t_lo, t_hi;
};

Chord<Rational> polytope_chord(const ConvexDomain& dom, const VecQ& xc, const VecQ& yc) {
  Chord<Rational> ch;
  Rational cx = dom.chart().dot(xc), cy = dom.chart().dot(yc);
  if (cx == 0 || cy == 0) throw MathError("point lies on the hyperplane at infinity of the chart");
  ch.x = xc / cx;
  VecQ y = yc / cy;
  ch.delta = y - ch.x;
  if (is_zero_matrix(MatQ(ch.delta))) throw MathError("line_boundary_points: x = y");
  bool lo = false, hi = false;
  for (const VecQ& f : dom.facets()) {
    Rational a = f.dot(ch.x);
    if (a <= 0 || f.dot(y) <= 0) throw MathError("query point is not in the interior");
    Rational b = f.dot(ch.delta);
    if (b < 0) {
      Rational t = -a / b;
      if (!hi || t < ch.t_hi) ch.t_hi = t;
      hi = true;
    } else if (b > 0) {
      Rational t = -a / b;
      if (!lo || t > ch.t_lo) ch.t_lo = t;
      lo = true;
    }
  }
  if (!lo || !hi) throw MathError("chord is unbounded in the chart");
  return ch;
}

Chord<double> float_chord(const ConvexDomain& dom, const ProjectivePoint<double>& xp,
                          const ProjectivePoint<double>& yp) {
  const double tol = 1e-12;
  if (dom.margin(xp) <= tol || dom.margin(yp) <= tol) throw MathError("query point is not in the interior");
  Chord<double> ch;
  ch.x = dom.chart_lift(xp);
  VecD y = dom.chart_lift(yp);
  ch.delta = y - ch.x;
  if (ch.delta.norm() <= 1e-15 * std::max(1.0, ch.x.norm())) throw MathError("line_boundary_points: x = y");
  if (dom.is_polytope()) {
    ch.t_lo = -std::numeric_limits<double>::infinity();
    ch.t_hi = std::numeric_limits<double>::infinity();
    for (const VecQ& fq : dom.facets()) {
      VecD f = to_double(fq);
      double a = f.dot(ch.x), b = f.dot(ch.delta);
      if (b < 0) ch.t_hi = std::min(ch.t_hi, -a / b);
      if (b > 0) ch.t_lo = std::max(ch.t_lo, -a / b);
    }
    if (!std::isfinite(ch.t_lo) || !std::isfinite(ch.t_hi)) throw MathError("chord is unbounded in the chart");
  } else {
    const MatD& q = dom.form();
    double qa = ch.delta.dot(q * ch.delta);
    double qb = ch.x.dot(q * ch.delta);
    double qc = ch.x.dot(q * ch.x);
    double disc = qb * qb - qa * qc;
    if (!(qa < 0) || !(disc > 0)) throw MathError("chord does not meet the ellipsoid twice");
    double s = -(qb + std::copysign(std::sqrt(disc), qb));
    double t1 = s / qa, t2 = qc / s;
    ch.t_lo = std::min(t1, t2);
    ch.t_hi = std::max(t1, t2);
  }
  return ch;
}

template <class T>
T chord_cross_ratio(const Chord<T>& ch) {
  // [u, v; x, y] with affine parameters u = t_lo, v = t_hi, x = 0, y = 1.
  T num = (T(1) - ch.t_lo) * (T(0) - ch.t_hi);
  T den = (T(0) - ch.t_lo) * (T(1) - ch.t_hi);
  return num / den;
}

}  // namespace

std::pair<ProjectivePoint<double>, ProjectivePoint<double>> line_boundary_points(const ConvexDomain& dom,
                                                                                 const ProjectivePoint<double>& x,
                                                                                 const ProjectivePoint<double>& y) {
  Chord<double> ch = float_chord(dom, x, y);
  return {ProjectivePoint<double>(VecD(ch.x + ch.t_lo * ch.delta)),
          ProjectivePoint<double>(VecD(ch.x + ch.t_hi * ch.delta))};
}

std::pair<ProjectivePoint<Rational>, ProjectivePoint<Rational>> line_boundary_points(
    const ConvexDomain& dom, const ProjectivePoint<Rational>& x, const ProjectivePoint<Rational>& y) {
  if (!dom.is_polytope()) throw MathError("exact chords need a polytope domain");
  if (x.dim() != dom.dim() || y.dim() != dom.dim()) throw MathError("domain: dimension mismatch");
  Chord<Rational> ch = polytope_chord(dom, x.coords(), y.coords());
  return {ProjectivePoint<Rational>(VecQ(ch.x + ch.t_lo * ch.delta)),
          ProjectivePoint<Rational>(VecQ(ch.x + ch.t_hi * ch.delta))};
}

double hilbert_distance(const ConvexDomain& dom, const ProjectivePoint<double>& x, const ProjectivePoint<double>& y) {
  if (x.dim() != dom.dim() || y.dim() != dom.dim()) throw MathError("domain: dimension mismatch");
  if (proj_distance(x, y) <= 1e-15) {
    if (!dom.contains(x, 1e-12)) throw MathError("query point is not in the interior");
    return 0.0;
  }
  return 0.5 * std::log(chord_cross_ratio(float_chord(dom, x, y)));
}

double hilbert_distance(const ConvexDomain& dom, const ProjectivePoint<Rational>& x,
                        const ProjectivePoint<Rational>& y) {
  if (!dom.is_polytope()) throw MathError("exact distances need a polytope domain");
  if (x.dim() != dom.dim() || y.dim() != dom.dim()) throw MathError("domain: dimension mismatch");
  if (x == y) {
    VecQ xc = x.coords() / dom.chart().dot(x.coords());
    for (const VecQ& f : dom.facets())
      if (f.dot(xc) <= 0) throw MathError("query point is not in the interior");
    return 0.0;
  }
  Rational cr = chord_cross_ratio(polytope_chord(dom, x.coords(), y.coords()));
  return 0.5 * std::log(to_double(cr));
}

// ---------------------------------------------------------------------------
// Faces

namespace {

BoundaryFace face_from_active(const ConvexDomain& dom, std::vector<int> active) {
  BoundaryFace face;
  face.active_facets = std::move(active);
  std::vector<int> verts(dom.vertices().size());
  for (std::size_t i = 0; i < verts.size(); ++i) verts[i] = static_cast<int>(i);
  for (int f : face.active_facets) {
    const auto& on = dom.facet_vertices()[static_cast<std::size_t>(f)];
    std::vector<int> keep;
    std::set_intersection(verts.begin(), verts.end(), on.begin(), on.end(), std::back_inserter(keep));
    verts = keep;
  }
  face.vertices = verts;
  std::vector<VecQ> lifts;
  for (int v : verts) lifts.push_back(dom.vertices()[static_cast<std::size_t>(v)]);
  MatQ m = columns(lifts);
  face.dim = rank(m) - 1;
  face.support = Subspace<double>::span(to_double(m));
  return face;
}

}  // namespace

BoundaryFace boundary_face(const ConvexDomain& dom, const ProjectivePoint<double>& x, double tol) {
  if (!dom.is_polytope()) {
    VecD p = dom.chart_lift(x);
    double q = p.dot(dom.form() * p) / dom.form().norm();
    if (q > tol) throw MathError("boundary_face: point is interior");
    if (q < -tol) throw MathError("boundary_face: point is exterior");
    BoundaryFace face;
    face.dim = 0;
    face.support = line_of(x);
    return face;
  }
  VecD p = dom.chart_lift(x);
  double scale = std::max(1.0, p.cwiseAbs().maxCoeff());
  std::vector<int> active;
  for (std::size_t j = 0; j < dom.facets().size(); ++j) {
    VecD f = to_double(dom.facets()[j]);
    double v = f.dot(p) / (f.norm() * scale);
    if (v < -tol) throw MathError("boundary_face: point is exterior");
    if (v <= tol) active.push_back(static_cast<int>(j));
  }
  if (active.empty()) throw MathError("boundary_face: point is interior");
  return face_from_active(dom, active);
}

BoundaryFace boundary_face(const ConvexDomain& dom, const ProjectivePoint<Rational>& x) {
  if (!dom.is_polytope()) throw MathError("exact faces need a polytope domain");
  if (x.dim() != dom.dim()) throw MathError("domain: dimension mismatch");
  Rational c = dom.chart().dot(x.coords());
  if (c == 0) throw MathError("point lies on the hyperplane at infinity of the chart");
  VecQ p = x.coords() / c;
  std::vector<int> active;
  for (std::size_t j = 0; j < dom.facets().size(); ++j) {
    Rational v = dom.facets()[j].dot(p);
    if (v < 0) throw MathError("boundary_face: point is exterior");
    if (v == 0) active.push_back(static_cast<int>(j));
  }
  if (active.empty()) throw MathError("boundary_face: point is interior");
  return face_from_active(dom, active);
}

ConvexDomain dual_domain(const ConvexDomain& dom) {
  if (!dom.is_polytope()) throw MathError("dual_domain: polytope required");
  VecQ center = VecQ::Zero(dom.dim());
  for (const VecQ& v : dom.vertices()) center += v;
  return ConvexDomain::polytope_v(dom.facets(), center);
}

ConvexDomain transform(const ConvexDomain& dom, const MatQ& a) {
  if (a.rows() != dom.dim() || a.cols() != dom.dim()) throw MathError("transform: dimension mismatch");
  if (!dom.is_polytope()) return transform(dom, to_double(a));
  MatQ inv = inverse(a);
  std::vector<VecQ> lifts;
  for (const VecQ& v : dom.vertices()) lifts.push_back(a * v);
  VecQ chart = inv.transpose() * dom.chart();
  ConvexDomain out = ConvexDomain::polytope_v(lifts, chart);
  return out;
}

ConvexDomain transform(const ConvexDomain& dom, const MatD& a) {
  if (a.rows() != dom.dim() || a.cols() != dom.dim()) throw MathError("transform: dimension mismatch");
  if (dom.is_polytope()) return transform(dom, to_rational(a));
  MatD inv = inverse(a);
  MatD q = inv.transpose() * dom.form() * inv;
  return ConvexDomain::ellipsoid(0.5 * (q + q.transpose()));
}

std::pair<int, double> nearest_face(const ConvexDomain& dom, const ProjectivePoint<double>& x) {
  if (!dom.is_polytope()) throw MathError("nearest_face: polytope required");
  VecD p = dom.chart_lift(x);
  const FaceLattice& lat = dom.lattice();
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < lat.faces.size(); ++i) {
    std::vector<VecD> pts;
    for (int v : lat.faces[i]) pts.push_back(to_double(dom.vertices()[static_cast<std::size_t>(v)]));
    double dist = nearest_point_in_hull(columns(pts), p).distance;
    if (dist < best_d - 1e-15) {
      best_d = dist;
      best = static_cast<int>(i);
    }
  }
  return {best, best_d};
}

bool same_vertex_set(const ConvexDomain& a, const ConvexDomain& b) {
  if (a.dim() != b.dim() || a.vertices().size() != b.vertices().size()) return false;
  std::vector<ProjectivePoint<Rational>> pa, pb;
  for (const VecQ& v : a.vertices()) pa.emplace_back(v);
  for (const VecQ& v : b.vertices()) pb.emplace_back(v);
  for (const auto& p : pa)
    if (std::find(pb.begin(), pb.end(), p) == pb.end()) return false;
  for (const auto& p : pb)
    if (std::find(pa.begin(), pa.end(), p) == pa.end()) return false;
  return true;
}

MetricFacesReport metric_faces_probe(const ConvexDomain& dom, const std::vector<ProjectivePoint<double>>& xs,
                                     const std::vector<ProjectivePoint<double>>& ys, double bound, double face_tol,
                                     double tol) {
  if (!dom.is_polytope()) throw MathError("metric_faces_probe: polytope required");
  if (xs.empty() || xs.size() != ys.size()) throw MathError("metric_faces_probe: malformed sequences");
  for (std::size_t n = 0; n < xs.size(); ++n)
    if (hilbert_distance(dom, xs[n], ys[n]) > bound + tol)
      throw MathError("metric_faces_probe: malformed sequences (a pair exceeds the distance bound)");

  MetricFacesReport rpt;
  rpt.bound = bound;
  auto active_at = [&](const ProjectivePoint<double>& p) {
    VecD l = dom.chart_lift(p);
    std::vector<int> act;
    for (std::size_t j = 0; j < dom.facets().size(); ++j) {
      VecD f = to_double(dom.facets()[j]);
      if (f.dot(l) / f.norm() <= face_tol) act.push_back(static_cast<int>(j));
    }
    return act;
  };
  rpt.x_face = active_at(xs.back());
  rpt.y_face = active_at(ys.back());
  if (rpt.x_face.empty()) throw MathError("metric_faces_probe: x_n does not approach the frontier");
  rpt.same_face = rpt.x_face == rpt.y_face;
  if (!rpt.same_face) {
    rpt.face_distance = std::numeric_limits<double>::infinity();
    return rpt;
  }

  BoundaryFace face = face_from_active(dom, rpt.x_face);
  std::vector<VecD> verts;
  std::vector<VecQ> verts_q;
  for (int v : face.vertices) {
    verts_q.push_back(dom.vertices()[static_cast<std::size_t>(v)]);
    verts.push_back(to_double(verts_q.back()));
  }
  MatD vm = columns(verts);
  VecD x_lim = nearest_point_in_hull(vm, dom.chart_lift(xs.back())).point;
  VecD y_lim = nearest_point_in_hull(vm, dom.chart_lift(ys.back())).point;
  if (face.dim == 0 || (x_lim - y_lim).norm() <= 1e-12 * std::max(1.0, x_lim.norm())) {
    rpt.face_distance = 0.0;
  } else {
    // The face as a domain in coordinates of a basis of its span.
    MatQ vq = columns(verts_q);
    std::vector<int> basis_cols = independent_columns(vq);
    MatQ basis(vq.rows(), static_cast<Eigen::Index>(basis_cols.size()));
    for (std::size_t i = 0; i < basis_cols.size(); ++i) basis.col(static_cast<Eigen::Index>(i)) = vq.col(basis_cols[i]);
    MatQ coords = solve_exact(basis, vq);
    std::vector<VecQ> face_lifts;
    for (Eigen::Index i = 0; i < coords.cols(); ++i) face_lifts.push_back(coords.col(i));
    ConvexDomain face_dom = ConvexDomain::polytope_v(face_lifts);
    MatD bd = to_double(basis);
    auto qr = bd.colPivHouseholderQr();
    VecD xf = qr.solve(x_lim), yf = qr.solve(y_lim);
    rpt.face_distance = hilbert_distance(face_dom, ProjectivePoint<double>(xf), ProjectivePoint<double>(yf));
  }
  rpt.pass = rpt.face_distance <= bound + tol;
  return rpt;
}

}  // namespace projdyn
