#include "projdyn/polytope.hpp"

#include <algorithm>

namespace projdyn {

int FaceLattice::find(const std::vector<int>& points) const {
  std::vector<int> key = points;
  std::sort(key.begin(), key.end());
  for (std::size_t i = 0; i < faces.size(); ++i)
    if (faces[i] == key) return static_cast<int>(i);
  return -1;
}

std::vector<int> FaceLattice::faces_of_dim(int k) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < faces.size(); ++i)
    if (face_dims[i] == k && !(k == dim && i + 1 == faces.size())) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> FaceLattice::facets() const {
  if (dim == 0) return {};
  return faces_of_dim(dim - 1);
}

bool FaceLattice::on_boundary(int point) const {
  for (std::size_t i = 0; i + 1 < faces.size(); ++i)
    if (std::binary_search(faces[i].begin(), faces[i].end(), point)) return true;
  return false;
}

HullProjection nearest_point_in_hull(const MatD& points, const VecD& query) {
  const Eigen::Index n = points.cols();
  if (n == 0) throw MathError("nearest_point_in_hull: empty point set");
  if (points.rows() != query.size()) throw MathError("nearest_point_in_hull: dimension mismatch");
  MatD p = points.colwise() - query;
  const double scale = std::max(1.0, p.colwise().squaredNorm().maxCoeff());
  const double eps = 1e-13;

  std::vector<Eigen::Index> active;
  VecD lambda;
  Eigen::Index start = 0;
  p.colwise().squaredNorm().minCoeff(&start);
  active.push_back(start);
  lambda = VecD::Ones(1);
  VecD x = p.col(start);

  auto affine_min = [&](const std::vector<Eigen::Index>& s, VecD& alpha) {
    const Eigen::Index m = static_cast<Eigen::Index>(s.size());
    MatD sys = MatD::Zero(m + 1, m + 1);
    VecD rhs = VecD::Zero(m + 1);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) sys(i, j) = p.col(s[static_cast<std::size_t>(i)]).dot(p.col(s[static_cast<std::size_t>(j)]));
      sys(i, m) = 1.0;
      sys(m, i) = 1.0;
    }
    rhs(m) = 1.0;
    VecD sol = sys.completeOrthogonalDecomposition().solve(rhs);
    alpha = sol.head(m);
  };

  for (int outer = 0; outer < 1000; ++outer) {
    Eigen::Index j = 0;
    VecD dots = p.transpose() * x;
    dots.minCoeff(&j);
    if (x.squaredNorm() - dots(j) <= eps * scale) break;
    if (std::find(active.begin(), active.end(), j) != active.end()) break;
    active.push_back(j);
    lambda.conservativeResize(static_cast<Eigen::Index>(active.size()));
    lambda(lambda.size() - 1) = 0.0;

    for (int inner = 0; inner < 1000; ++inner) {
      VecD alpha;
      affine_min(active, alpha);
      if ((alpha.array() > eps).all()) {
        lambda = alpha;
        break;
      }
      double theta = 1.0;
      for (Eigen::Index i = 0; i < alpha.size(); ++i)
        if (alpha(i) <= eps) theta = std::min(theta, lambda(i) / (lambda(i) - alpha(i)));
      lambda = theta * alpha + (1.0 - theta) * lambda;
      std::vector<Eigen::Index> keep_idx;
      std::vector<double> keep_w;
      for (Eigen::Index i = 0; i < lambda.size(); ++i)
        if (lambda(i) > eps) {
          keep_idx.push_back(active[static_cast<std::size_t>(i)]);
          keep_w.push_back(lambda(i));
        }
      active = keep_idx;
      lambda = Eigen::Map<VecD>(keep_w.data(), static_cast<Eigen::Index>(keep_w.size()));
      lambda /= lambda.sum();
    }
    x = VecD::Zero(p.rows());
    for (std::size_t i = 0; i < active.size(); ++i) x += lambda(static_cast<Eigen::Index>(i)) * p.col(active[i]);
  }

  HullProjection out;
  out.weights = VecD::Zero(n);
  for (std::size_t i = 0; i < active.size(); ++i) out.weights(active[i]) = lambda(static_cast<Eigen::Index>(i));
  out.point = x + query;
  out.distance = x.norm();
  return out;
}

}  // namespace projdyn
