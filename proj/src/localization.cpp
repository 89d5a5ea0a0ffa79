#include "drivebench/localization.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace drivebench {

UkfParams UkfParams::tuned(double gnss_sigma) {
  UkfParams p;
  p.Q.diagonal() << 1e-6, 1e-6, 1e-7, 1e-4;
  p.R = Matrix2::Identity() * std::max(gnss_sigma * gnss_sigma, 1e-12);
  return p;
}

namespace {

std::optional<Matrix4> try_cholesky(const Matrix4& m) {
  const double scale = std::max(1.0, m.diagonal().cwiseAbs().maxCoeff());
  const double tol = 1e-12 * scale;
  Matrix4 L = Matrix4::Zero();
  for (int j = 0; j < kUkfDim; ++j) {
    double d = m(j, j);
    for (int k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    if (d < -tol) return std::nullopt;
    if (d <= tol) {
      for (int i = j + 1; i < kUkfDim; ++i) {
        double r = m(i, j);
        for (int k = 0; k < j; ++k) r -= L(i, k) * L(j, k);
        if (std::abs(r) > std::sqrt(tol) * std::sqrt(scale)) return std::nullopt;
      }
      continue;
    }
    L(j, j) = std::sqrt(d);
    for (int i = j + 1; i < kUkfDim; ++i) {
      double r = m(i, j);
      for (int k = 0; k < j; ++k) r -= L(i, k) * L(j, k);
      L(i, j) = r / L(j, j);
    }
  }
  return L;
}

}  // namespace

Matrix4 psd_cholesky(const Matrix4& m) {
  if (!m.allFinite()) throw UkfError("cholesky: non-finite matrix");
  if (auto L = try_cholesky(m)) return *L;
  if (auto L = try_cholesky(m + 1e-9 * Matrix4::Identity())) return *L;
  throw UkfError("cholesky: matrix is not positive semi-definite (after 1e-9 jitter)");
}

SigmaPoints sigma_points(const Vector4& mean, const Matrix4& cov, const UkfParams& params) {
  constexpr double n = kUkfDim;
  const double lambda = params.alpha * params.alpha * (n + params.kappa) - n;
  const double c = n + lambda;
  const Matrix4 S = psd_cholesky(c * cov);

  SigmaPoints sp;
  sp.points[0] = mean;
  sp.wm[0] = lambda / c;
  sp.wc[0] = lambda / c + (1.0 - params.alpha * params.alpha + params.beta);
  for (int i = 0; i < kUkfDim; ++i) {
    sp.points[1 + i] = mean + S.col(i);
    sp.points[1 + kUkfDim + i] = mean - S.col(i);
  }
  for (int i = 1; i < kNumSigma; ++i) {
    sp.points[i](kYaw) = wrap_angle(sp.points[i](kYaw));
    sp.wm[i] = sp.wc[i] = 0.5 / c;
  }
  return sp;
}

Vector4 sigma_mean(const SigmaPoints& sp) {
  Vector4 m = Vector4::Zero();
  double s = 0.0;
  double co = 0.0;
  for (int i = 0; i < kNumSigma; ++i) {
    m(kX) += sp.wm[i] * sp.points[i](kX);
    m(kY) += sp.wm[i] * sp.points[i](kY);
    m(kSpeed) += sp.wm[i] * sp.points[i](kSpeed);
    s += sp.wm[i] * std::sin(sp.points[i](kYaw));
    co += sp.wm[i] * std::cos(sp.points[i](kYaw));
  }
  m(kYaw) = std::atan2(s, co);
  return m;
}

Vector4 state_residual(const Vector4& a, const Vector4& b) {
  Vector4 r = a - b;
  r(kYaw) = wrap_angle(r(kYaw));
  return r;
}

namespace {

Matrix4 symmetrized(const Matrix4& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

UkfState predict(const UkfState& ukf, const ControlCommand& cmd, double dt, const UkfParams& params) {
  SigmaPoints sp = sigma_points(ukf.mean, ukf.cov, params);
  for (auto& p : sp.points) {
    const VehicleState next = step_bicycle({{p(kX), p(kY), p(kYaw)}, p(kSpeed)}, cmd, params.vehicle, dt);
    p << next.pose.x, next.pose.y, next.pose.yaw, next.speed;
  }
  UkfState out;
  out.mean = sigma_mean(sp);
  out.cov = params.Q;
  for (int i = 0; i < kNumSigma; ++i) {
    const Vector4 r = state_residual(sp.points[i], out.mean);
    out.cov += sp.wc[i] * r * r.transpose();
  }
  out.cov = symmetrized(out.cov);
  return out;
}

UkfState update(const UkfState& ukf, const Vector2& gnss, const UkfParams& params, UpdateDiagnostics* diagnostics) {
  const SigmaPoints sp = sigma_points(ukf.mean, ukf.cov, params);
  Vector2 z_mean = Vector2::Zero();
  for (int i = 0; i < kNumSigma; ++i) z_mean += sp.wm[i] * sp.points[i].head<2>();

  Matrix2 S = params.R;
  Eigen::Matrix<double, 4, 2> Pxz = Eigen::Matrix<double, 4, 2>::Zero();
  for (int i = 0; i < kNumSigma; ++i) {
    const Vector2 dz = sp.points[i].head<2>() - z_mean;
    S += sp.wc[i] * dz * dz.transpose();
    Pxz += sp.wc[i] * state_residual(sp.points[i], ukf.mean) * dz.transpose();
  }
  S = 0.5 * (S + S.transpose());
  const Eigen::LLT<Matrix2> llt(S);
  if (llt.info() != Eigen::Success || !(S.determinant() > 1e-300)) {
    throw UkfError("update: singular innovation covariance");
  }
  const Eigen::Matrix<double, 4, 2> K = llt.solve(Pxz.transpose()).transpose();
  const Vector2 innovation = gnss - z_mean;

  UkfState out;
  out.mean = ukf.mean + K * innovation;
  out.mean(kYaw) = wrap_angle(out.mean(kYaw));
  out.cov = symmetrized(ukf.cov - K * S * K.transpose());
  if (diagnostics) {
    diagnostics->innovation = innovation;
    diagnostics->innovation_cov = S;
  }
  return out;
}

void check_covariance(const Matrix4& cov, const std::string& where) {
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw UkfError(where + ": covariance not symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Matrix4> eig(cov, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12 * scale) throw UkfError(where + ": covariance not PSD");
}

FilterRun run_filter(const std::vector<FilterSample>& samples, double dt, const UkfParams& params,
                     bool check_every_step) {
  FilterRun run;
  if (samples.empty()) return run;
  UkfState ukf;
  const FilterSample& first = samples.front();
  ukf.mean << first.gnss.x, first.gnss.y, first.truth.pose.yaw, first.truth.speed;
  ukf.cov.diagonal() << params.R(0, 0), params.R(1, 1), 1e-4, 1e-2;
  run.states.push_back(ukf);

  double raw = 0.0;
  double filtered = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const FilterSample& s = samples[i];
    ukf = predict(ukf, s.cmd, dt, params);
    if (check_every_step) check_covariance(ukf.cov, "predict");
    ukf = update(ukf, Vector2(s.gnss.x, s.gnss.y), params);
    if (check_every_step) check_covariance(ukf.cov, "update");
    run.states.push_back(ukf);
    raw += distance(s.gnss, s.truth.pose.position());
    filtered += std::hypot(ukf.mean(kX) - s.truth.pose.x, ukf.mean(kY) - s.truth.pose.y);
  }
  const double n = static_cast<double>(samples.size() - 1);
  if (n > 0) {
    run.raw_error_mean = raw / n;
    run.filtered_error_mean = filtered / n;
  }
  return run;
}

}  // namespace drivebench
