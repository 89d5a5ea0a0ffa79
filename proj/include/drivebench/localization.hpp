#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "drivebench/dynamics.hpp"

namespace drivebench {

using Vector4 = Eigen::Matrix<double, 4, 1>;
using Matrix4 = Eigen::Matrix<double, 4, 4>;
using Vector2 = Eigen::Matrix<double, 2, 1>;
using Matrix2 = Eigen::Matrix<double, 2, 2>;

/// State index layout: x, y, yaw, speed.
enum UkfIndex : int { kX = 0, kY = 1, kYaw = 2, kSpeed = 3 };

struct UkfState {
  Vector4 mean{Vector4::Zero()};
  Matrix4 cov{Matrix4::Zero()};
};

struct UkfParams {
  double alpha{0.1};
  double beta{2.0};
  double kappa{0.0};
  Matrix4 Q{Matrix4::Zero()};
  Matrix2 R{Matrix2::Identity()};
  BicycleParams vehicle;

  /// Tuned defaults for 20 Hz GNSS at the default noise level.
  static UkfParams tuned(double gnss_sigma = 0.5585);
};

class UkfError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kUkfDim = 4;
inline constexpr int kNumSigma = 2 * kUkfDim + 1;

struct SigmaPoints {
  std::array<Vector4, kNumSigma> points;
  std::array<double, kNumSigma> wm;
  std::array<double, kNumSigma> wc;
};

/**
 * Cholesky factor of a symmetric PSD matrix. Zero pivots (within a relative
 * tolerance) yield zero columns. On a negative pivot, 1e-9·I is added once;
 * a second failure throws UkfError.
 */
Matrix4 psd_cholesky(const Matrix4& m);

/// Van der Merwe scaled sigma points; yaw offsets are re-wrapped.
SigmaPoints sigma_points(const Vector4& mean, const Matrix4& cov, const UkfParams& params);

/// Weighted mean with sine/cosine averaging for yaw.
Vector4 sigma_mean(const SigmaPoints& sp);

/// State difference with a wrapped yaw component.
Vector4 state_residual(const Vector4& a, const Vector4& b);

UkfState predict(const UkfState& ukf, const ControlCommand& cmd, double dt, const UkfParams& params);

struct UpdateDiagnostics {
  Vector2 innovation{Vector2::Zero()};
  Matrix2 innovation_cov{Matrix2::Zero()};
};

UkfState update(const UkfState& ukf, const Vector2& gnss, const UkfParams& params,
                UpdateDiagnostics* diagnostics = nullptr);

/// Throws UkfError unless cov is symmetric within 1e-12 and has eigenvalues ≥ −1e-12.
void check_covariance(const Matrix4& cov, const std::string& where);

struct FilterSample {
  double t{0.0};
  ControlCommand cmd;  ///< applied over the step that ends at this sample
  Vec2 gnss;
  VehicleState truth;
};

struct FilterRun {
  std::vector<UkfState> states;
  double raw_error_mean{0.0};
  double filtered_error_mean{0.0};
};

/**
 * Alternating predict/update over a sample stream at fixed dt. The first
 * sample initializes the filter from its GNSS fix and the true heading and
 * speed; errors are averaged over the remaining samples.
 */
FilterRun run_filter(const std::vector<FilterSample>& samples, double dt, const UkfParams& params,
                     bool check_every_step = true);

}  // namespace drivebench
