#include "projdyn/projective.hpp"

#include <Eigen/SVD>
#include <algorithm>

namespace projdyn {

Subspace<double> to_double(const Subspace<Rational>& s) {
  if (s.dim() == 0) return Subspace<double>::zero(s.ambient());
  return Subspace<double>::span(to_double(s.basis()));
}

Subspace<double> line_of(const ProjectivePoint<double>& p) { return Subspace<double>(p.coords()); }

Subspace<double> hyperplane_of(const DualPoint<double>& w) {
  MatD row = w.coords().transpose();
  return Subspace<double>(nullspace(row, 1e-12));
}

namespace {

// Sines of principal angles between span(qa) and span(qb), dim qa <= dim qb,
// computed as singular values of the residual of qa off span(qb).
VecD residual_sines(const MatD& qa, const MatD& qb) {
  MatD resid = qa - qb * (qb.transpose() * qa);
  Eigen::JacobiSVD<MatD> svd(resid);
  VecD s = svd.singularValues();
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = std::clamp(s(i), 0.0, 1.0);
  return s;
}

MatD orthonormal(const Subspace<double>& s) {
  if (s.dim() == 0) return MatD(s.ambient(), 0);
  Eigen::HouseholderQR<MatD> qr(s.basis());
  return qr.householderQ() * MatD::Identity(s.ambient(), s.dim());
}

}  // namespace

std::vector<double> principal_angle_sines(const Subspace<double>& a, const Subspace<double>& b) {
  if (a.ambient() != b.ambient()) throw MathError("principal angles: dimension mismatch");
  if (a.dim() == 0 || b.dim() == 0) return {};
  MatD qa = orthonormal(a), qb = orthonormal(b);
  VecD s = a.dim() <= b.dim() ? residual_sines(qa, qb) : residual_sines(qb, qa);
  std::vector<double> out(s.data(), s.data() + s.size());
  std::sort(out.begin(), out.end());
  return out;
}

double proj_distance(const Subspace<double>& a, const Subspace<double>& b) {
  auto s = principal_angle_sines(a, b);
  if (s.empty()) throw MathError("proj_distance: zero subspace");
  return s.front();
}

double proj_distance(const ProjectivePoint<double>& a, const ProjectivePoint<double>& b) {
  if (a.dim() != b.dim()) throw MathError("proj_distance: dimension mismatch");
  const VecD& x = a.coords();
  const VecD& y = b.coords();
  VecD resid = x - y * y.dot(x);
  return std::clamp(resid.norm(), 0.0, 1.0);
}

double proj_distance(const ProjectivePoint<double>& a, const Subspace<double>& b) {
  return proj_distance(line_of(a), b);
}

double containment_distance(const Subspace<double>& a, const Subspace<double>& b) {
  if (a.ambient() != b.ambient()) throw MathError("containment_distance: dimension mismatch");
  if (a.dim() == 0) return 0.0;
  if (b.dim() == 0) return 1.0;
  MatD qa = orthonormal(a), qb = orthonormal(b);
  MatD resid = qa - qb * (qb.transpose() * qa);
  Eigen::JacobiSVD<MatD> svd(resid);
  return std::clamp(svd.singularValues()(0), 0.0, 1.0);
}

double subspace_gap(const Subspace<double>& a, const Subspace<double>& b) {
  if (a.dim() != b.dim()) throw MathError("subspace_gap: dimension mismatch");
  return std::max(containment_distance(a, b), containment_distance(b, a));
}

Subspace<double> SvdProfile::top_left(int k) const {
  if (k < 0 || k > u.cols()) throw MathError("top_left: k out of range");
  if (k == 0) return Subspace<double>::zero(static_cast<int>(u.rows()));
  return Subspace<double>(u.leftCols(k));
}

Subspace<double> SvdProfile::bottom_right(int k) const {
  if (k < 0 || k > v.cols()) throw MathError("bottom_right: k out of range");
  if (k == 0) return Subspace<double>::zero(static_cast<int>(v.rows()));
  return Subspace<double>(v.rightCols(k));
}

SvdProfile svd_profile(const MatD& g) {
  if (g.rows() != g.cols() || g.rows() == 0) throw MathError("svd_profile: square matrix required");
  if (!g.allFinite()) throw MathError("svd_profile: non-finite entries");
  Eigen::JacobiSVD<MatD> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SvdProfile out;
  out.sigma = svd.singularValues();
  out.u = svd.matrixU();
  out.v = svd.matrixV();
  if (!(out.sigma(out.sigma.size() - 1) > 0.0)) throw MathError("svd_profile: matrix is not invertible");
  return out;
}

SvdProfile svd_profile(const MatQ& g) {
  if (g.rows() != g.cols()) throw MathError("svd_profile: square matrix required");
  if (determinant(g) == 0) throw MathError("svd_profile: matrix is not invertible");
  SvdProfile out = svd_profile(to_double(g));
  out.approximate = true;
  return out;
}

std::pair<double, double> operator_norm_and_conorm(const MatD& g) {
  SvdProfile p = svd_profile(g);
  return {p.sigma(0), p.sigma(p.sigma.size() - 1)};
}

}  // namespace projdyn
