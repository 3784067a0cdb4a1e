// Heteroscedasticity-robust loci: variance-model statistics from OLS and
// FGLS first stages, chi-square probabilities, and the two-sample
// Anderson-Darling distance.
#pragma once

#include "siv/regression.hpp"
#include "siv/search.hpp"

#include <optional>
#include <vector>

namespace siv {

// Breusch-Pagan form (SSR/2) / (SSE/n)^2, where SSR is the explained sum
// of squares of e^2 regressed on [1, regressor] and SSE = sum(e^2).
// Invariant to rescaling e^2. Throws DegenerateVariance when the regressor
// is constant or every e^2 is zero; TooFewRows when n < 3.
double chi_square_stat(const Vec& squared_residuals, const Vec& regressor);

// P[chi2(dof) < x] via the regularised lower incomplete gamma function.
double chi2_cdf(double x, double dof = 1.0);

struct RobustPoint {
  double delta = 0.0;
  double x2_ols = 0.0;
  double x2_fgls = 0.0;
  double distance = 0.0;  // P[chi2(1) < X^2] - P[chi2(1) < X_g^2]
  double ratio = 0.0;     // P[chi2(1) < X^2] / P[chi2(1) < X_g^2]
  double trace = 0.0;     // mean((fitted variance / mean(e^2) - 1)^2)
  double ad = 0.0;        // A^2 between e^2 / mean(e^2) and squared GLS residuals
  int pooled_size = 0;
};

// All robust statistics for the first stage x = a + g s + e. When
// `weights` is given it replaces the variance model fitted on e^2.
RobustPoint robust_point(const Vec& x, const Vec& s, const VarianceModel* weights = nullptr,
                         bool with_ad = true);
RobustPoint robust_point(const SivContext& ctx, int k, double delta, bool with_ad = true);

// Difference of chi-square probabilities at s(delta).
double parametric_distance(const SivContext& ctx, int k, double delta);

struct AdInput {
  std::vector<double> sample_f;
  std::vector<double> sample_g;
};

// Two-sample Anderson-Darling statistic evaluated at distinct pooled
// values with right-continuous ECDFs, each weighted by its pooled
// multiplicity, excluding the pooled maximum where H = 1.
// Throws DegenerateSample when either sample has fewer than 2 points.
double ad_two_sample(const std::vector<double>& f, const std::vector<double>& g);
double ad_two_sample(const AdInput& input);

enum class RobustMode { parametric, nonparametric };

struct RobustResult {
  Delta0 delta0;
  DeltaLocus locus;
};

// Global grid argmin of the robust locus refined by golden section.
// Throws EmptyGrid.
RobustResult robust_delta0(const SivContext& ctx, int k, const SearchOptions& options,
                           RobustMode mode);

}  // namespace siv
