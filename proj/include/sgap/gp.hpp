#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "sgap/types.hpp"

namespace sgap {

/// exp(−‖a − b‖² / (2ℓ²))
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar squared_exponential(const Eigen::MatrixBase<DerivedA>& a,
                                              const Eigen::MatrixBase<DerivedB>& b,
                                              typename DerivedA::Scalar lengthscale) {
  using Scalar = typename DerivedA::Scalar;
  return std::exp(-(a - b).squaredNorm() / (Scalar(2) * lengthscale * lengthscale));
}

/// Median of all pairwise Euclidean distances between rows; 1 when it is 0.
double median_pairwise_distance(const Eigen::MatrixXd& x);

struct GPPrediction {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Zero-mean GP regression on standardized targets with a squared-exponential
/// kernel, unit signal variance and a fixed small noise term.
class GPSurrogate {
 public:
  static constexpr double kNoise = 1e-6;
  static constexpr double kMaxJitter = 1e-4;

  /// Rows of `x` are inputs. Needs at least two points.
  static GPSurrogate fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

  /// De-standardized posterior mean and standard deviation of the latent function.
  GPPrediction predict(const Eigen::VectorXd& x) const;

  double lengthscale() const { return lengthscale_; }
  double noise() const { return noise_; }
  double target_mean() const { return y_mean_; }
  double target_scale() const { return y_scale_; }

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd alpha_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double lengthscale_ = 1.0;
  double noise_ = kNoise;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
};

}  // namespace sgap
