// Least squares primitives: OLS, partialling out, FGLS with a fitted
// variance model, and first-stage strength diagnostics.
#pragma once

#include "siv/dataset.hpp"

namespace siv {

struct RegressionFit {
  Vec coefficients;
  Vec residuals;
  Vec fitted;
  double sse = 0.0;  // sum of squared residuals
  double ssr = 0.0;  // explained sum of squares around the outcome mean
  int dof = 0;       // rows minus coefficients
};

// Diagonal of a QR factor smaller than this times the largest entry marks
// the design as rank deficient.
inline constexpr double kRankTolerance = 1e-10;

// Least squares of y on the columns of X exactly as given (no implicit
// intercept). Solved by column-pivoted Householder QR.
// Throws TooFewRows if rows <= columns, RankDeficient on collinear columns.
RegressionFit ols(const Mat& X, const Vec& y);

// [1, controls]
Mat with_intercept(const Mat& controls);

// (I - P_V) target with V = [1, controls]. Throws TooFewRows when
// n <= #controls + 1 and RankDeficient on collinear controls.
Vec partial_out(const Mat& controls, const Vec& target);
// Same for every column of targets, sharing one factorisation.
Mat partial_out(const Mat& controls, const Mat& targets);

struct VarianceModel {
  double intercept_b = 0.0;
  Vec slope_coeffs;
  Vec fitted_variances;  // linear predictions clamped below at floor
  double floor = 0.0;
};

// Floor applied to fitted variances: max(1e-8, 1e-6 * mean(e^2)).
double variance_floor(const Vec& squared_residuals);

// Regresses squared residuals on [1, regressors] and clamps the
// predictions at variance_floor. Throws TooFewRows / RankDeficient.
VarianceModel estimate_variance_model(const Vec& squared_residuals, const Mat& regressors);

// OLS on rows rescaled by 1/sqrt(fitted variance). Residuals and fitted
// values are reported on the original (untransformed) scale.
// Throws NonPositiveVariance if any fitted variance is not positive.
RegressionFit fgls(const Mat& X, const Vec& y, const VarianceModel& weights);

// Upper bound reported for the first-stage F when the instruments explain
// the regressor exactly.
inline constexpr double kFirstStageFCap = 1e12;

struct FirstStage {
  double F = 0.0;
  bool weak = true;  // F < 10
};

// Joint F for the instrument columns in x ~ [1, controls, instruments]
// against x ~ [1, controls]. Throws DegenerateVariance if x is constant.
FirstStage first_stage_F(const Vec& x, const Mat& instruments, const Mat& controls);

// Population moments (divisor n).
double mean(const Vec& v);
double variance(const Vec& v);
double covariance(const Vec& a, const Vec& b);
double correlation(const Vec& a, const Vec& b);

}  // namespace siv
