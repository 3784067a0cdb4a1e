#include "siv/regression.hpp"

#include "siv/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace siv {

namespace {

using Qr = Eigen::ColPivHouseholderQR<Mat>;

void check_rows(Eigen::Index n, Eigen::Index p) {
  if (n <= p) {
    throw Error(ErrorKind::TooFewRows, "need more rows than coefficients (n=" + std::to_string(n) +
                                           ", p=" + std::to_string(p) + ")");
  }
}

Qr factor(const Mat& X) {
  check_rows(X.rows(), X.cols());
  Qr qr(X);
  const Eigen::Index p = X.cols();
  if (p == 0) return qr;
  const auto diag = qr.matrixQR().diagonal().cwiseAbs();
  const double largest = diag.maxCoeff();
  if (!(largest > 0.0) || diag.minCoeff() < kRankTolerance * largest) {
    throw Error(ErrorKind::RankDeficient, "design matrix is rank deficient");
  }
  return qr;
}

RegressionFit finish_fit(const Mat& X, const Vec& y, Vec beta) {
  RegressionFit fit;
  fit.fitted = X * beta;
  fit.residuals = y - fit.fitted;
  fit.coefficients = std::move(beta);
  fit.sse = fit.residuals.squaredNorm();
  const double ybar = y.mean();
  fit.ssr = (fit.fitted.array() - ybar).matrix().squaredNorm();
  fit.dof = static_cast<int>(X.rows() - X.cols());
  return fit;
}

}  // namespace

double mean(const Vec& v) { return v.mean(); }

double variance(const Vec& v) {
  return (v.array() - v.mean()).square().mean();
}

double covariance(const Vec& a, const Vec& b) {
  return ((a.array() - a.mean()) * (b.array() - b.mean())).mean();
}

double correlation(const Vec& a, const Vec& b) {
  return covariance(a, b) / std::sqrt(variance(a) * variance(b));
}

RegressionFit ols(const Mat& X, const Vec& y) {
  const Qr qr = factor(X);
  return finish_fit(X, y, qr.solve(y));
}

Mat with_intercept(const Mat& controls) {
  Mat V(controls.rows(), controls.cols() + 1);
  V.col(0).setOnes();
  V.rightCols(controls.cols()) = controls;
  return V;
}

Mat partial_out(const Mat& controls, const Mat& targets) {
  const Mat V = with_intercept(controls);
  const Qr qr = factor(V);
  return targets - V * qr.solve(targets);
}

Vec partial_out(const Mat& controls, const Vec& target) {
  return partial_out(controls, Mat(target)).col(0);
}

double variance_floor(const Vec& squared_residuals) {
  return std::max(1e-8, 1e-6 * squared_residuals.mean());
}

VarianceModel estimate_variance_model(const Vec& squared_residuals, const Mat& regressors) {
  const Mat Z = with_intercept(regressors);
  const RegressionFit fit = ols(Z, squared_residuals);
  VarianceModel vm;
  vm.intercept_b = fit.coefficients(0);
  vm.slope_coeffs = fit.coefficients.tail(regressors.cols());
  vm.floor = variance_floor(squared_residuals);
  vm.fitted_variances = fit.fitted.cwiseMax(vm.floor);
  return vm;
}

RegressionFit fgls(const Mat& X, const Vec& y, const VarianceModel& weights) {
  const Vec& v = weights.fitted_variances;
  if (v.size() != X.rows() || !(v.minCoeff() > 0.0)) {
    throw Error(ErrorKind::NonPositiveVariance, "FGLS weights require positive fitted variances");
  }
  const Vec w = v.cwiseSqrt().cwiseInverse();
  const Mat Xw = w.asDiagonal() * X;
  const Vec yw = w.cwiseProduct(y);
  const Qr qr = factor(Xw);
  return finish_fit(X, y, qr.solve(yw));
}

FirstStage first_stage_F(const Vec& x, const Mat& instruments, const Mat& controls) {
  const Eigen::Index n = x.size();
  const Eigen::Index q = instruments.cols();
  Mat full(n, 1 + controls.cols() + q);
  full.col(0).setOnes();
  full.middleCols(1, controls.cols()) = controls;
  full.rightCols(q) = instruments;
  const RegressionFit restricted = ols(with_intercept(controls), x);
  const double tiny = 1e-24 * std::max(x.squaredNorm(), 1.0);
  if (!(restricted.sse > tiny)) {
    throw Error(ErrorKind::DegenerateVariance, "regressor has no variation beyond the controls");
  }
  const RegressionFit unrestricted = ols(full, x);
  FirstStage out;
  const double gain = std::max(restricted.sse - unrestricted.sse, 0.0) / static_cast<double>(q);
  const double noise = unrestricted.sse / static_cast<double>(unrestricted.dof);
  if (noise <= 0.0 || gain >= kFirstStageFCap * noise) {
    out.F = kFirstStageFCap;
  } else {
    out.F = gain / noise;
  }
  out.weak = out.F < 10.0;
  return out;
}

}  // namespace siv
