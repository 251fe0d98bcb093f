#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include "lidarcmp/kdtree.hpp"
#include "lidarcmp/metrics.hpp"

namespace lidarcmp::metrics {
namespace {

/// Closed-form rigid transform minimizing sum ||R s + t - q||^2 over the
/// correspondence pairs (Umeyama without scale). A reflection in the SVD
/// solution is corrected by flipping the last singular direction.
Affine rigid_least_squares(const std::vector<Vec3>& src, const std::vector<Vec3>& dst) {
  const double n = static_cast<double>(src.size());
  Eigen::Vector3d cs = Eigen::Vector3d::Zero(), cd = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    cs += Eigen::Vector3d(src[i].x, src[i].y, src[i].z);
    cd += Eigen::Vector3d(dst[i].x, dst[i].y, dst[i].z);
  }
  cs /= n;
  cd /= n;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Eigen::Vector3d s(src[i].x, src[i].y, src[i].z);
    const Eigen::Vector3d d(dst[i].x, dst[i].y, dst[i].z);
    cov += (d - cd) * (s - cs).transpose();
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d um = svd.matrixU();
  const Eigen::Matrix3d vm = svd.matrixV();
  if ((um * vm.transpose()).determinant() < 0) um.col(2) *= -1.0;
  const Eigen::Matrix3d rot = um * vm.transpose();
  const Eigen::Vector3d trans = cd - rot * cs;

  Affine out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out.linear[i][j] = rot(i, j);
  }
  out.translation = {trans(0), trans(1), trans(2)};
  return out;
}

}  // namespace

IcpResult icp_align(const PointCloud& source, const PointCloud& target, const IcpParams& params) {
  params.validate();
  if (source.empty() || target.empty()) throw PreconditionError("icp: empty cloud");

  const SpatialIndex target_index(target);
  const double max_d2 = params.max_correspondence_dist * params.max_correspondence_dist;

  IcpResult result;
  result.transform = Affine::identity();
  std::vector<Vec3> moved = source.points;
  std::vector<Vec3> corr_src, corr_dst;

  auto measure = [&](int iter) {
    corr_src.clear();
    corr_dst.clear();
    double err_sq_sum = 0.0;
    for (const Vec3& p : moved) {
      const auto hit = target_index.nearest(p);
      if (hit.dist_sq <= max_d2) {
        corr_src.push_back(p);
        corr_dst.push_back(target_index.point(hit.index));
        err_sq_sum += hit.dist_sq;
      }
    }
    if (corr_src.empty()) {
      throw PreconditionError("icp diverged: zero inliers at iteration " + std::to_string(iter));
    }
    result.inliers = corr_src.size();
    result.rmse = std::sqrt(err_sq_sum / static_cast<double>(corr_src.size()));
  };

  double prev_rmse = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= params.max_iterations; ++iter) {
    measure(iter);
    result.iterations = iter;
    // A zero error cannot improve; stopping here keeps icp(a, a) exactly 0.
    if (result.rmse == 0.0 || std::abs(prev_rmse - result.rmse) < params.convergence_tol) {
      result.converged = true;
      return result;
    }
    prev_rmse = result.rmse;

    const Affine step = rigid_least_squares(corr_src, corr_dst);
    result.transform = step * result.transform;
    for (Vec3& p : moved) p = step.apply(p);
  }
  // Ran out of iterations: the reported error still reflects the last
  // transform that was applied.
  measure(params.max_iterations);
  return result;
}

MetricResult icp_rmse(const PointCloud& source, const PointCloud& target, const IcpParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  const IcpResult detail = icp_align(source, target, params);

  MetricSpec spec;
  spec.kind = MetricKind::icp;
  spec.icp = params;
  MetricResult r;
  r.value = detail.rmse;
  r.orientation = Orientation::distance;
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.spec = spec;
  r.extra = {{"iterations", detail.iterations},
             {"converged", detail.converged},
             {"inliers", detail.inliers}};
  return r;
}

}  // namespace lidarcmp::metrics
