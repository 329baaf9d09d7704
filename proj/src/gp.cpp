#include "sgap/gp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sgap/errors.hpp"

namespace sgap {

double median_pairwise_distance(const Eigen::MatrixXd& x) {
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(x.rows() * (x.rows() - 1) / 2));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < x.rows(); ++j) d.push_back((x.row(i) - x.row(j)).norm());
  }
  if (d.empty()) return 1.0;
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
  double median = d[mid];
  if (d.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return median > 0.0 ? median : 1.0;
}

GPSurrogate GPSurrogate::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() < 2) throw ValidationError("GP fit needs at least 2 points");
  if (y.size() != x.rows()) throw DimensionError("GP targets do not match inputs");
  if (!x.allFinite() || !y.allFinite()) throw ValidationError("GP data must be finite");

  GPSurrogate gp;
  gp.x_ = x;
  gp.y_mean_ = y.mean();
  const double var = (y.array() - gp.y_mean_).square().mean();
  gp.y_scale_ = var > 0.0 ? std::sqrt(var) : 1.0;
  const Eigen::VectorXd z = (y.array() - gp.y_mean_) / gp.y_scale_;
  gp.lengthscale_ = median_pairwise_distance(x);

  const Eigen::Index n = x.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) k(i, j) = k(j, i) = squared_exponential(x.row(i), x.row(j), gp.lengthscale_);
  }
  for (double jitter = kNoise; jitter <= kMaxJitter * 1.0000001; jitter *= 10.0) {
    Eigen::MatrixXd kn = k;
    kn.diagonal().array() += jitter;
    gp.llt_.compute(kn);
    if (gp.llt_.info() == Eigen::Success) {
      gp.noise_ = jitter;
      gp.alpha_ = gp.llt_.solve(z);
      return gp;
    }
  }
  throw NumericalError("GP kernel matrix not positive definite after jitter " + std::to_string(kMaxJitter));
}

GPPrediction GPSurrogate::predict(const Eigen::VectorXd& x) const {
  if (x.size() != x_.cols()) throw DimensionError("GP query dimension mismatch");
  Eigen::VectorXd ks(x_.rows());
  for (Eigen::Index i = 0; i < x_.rows(); ++i) ks[i] = squared_exponential(x_.row(i).transpose(), x, lengthscale_);
  const double mean = ks.dot(alpha_);
  const Eigen::VectorXd v = llt_.matrixL().solve(ks);
  const double var = std::max(0.0, 1.0 - v.squaredNorm());
  return {y_mean_ + y_scale_ * mean, y_scale_ * std::sqrt(var)};
}

}  // namespace sgap
