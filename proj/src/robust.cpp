#include "siv/robust.hpp"

#include "siv/error.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace siv {

double chi_square_stat(const Vec& squared_residuals, const Vec& regressor) {
  const Eigen::Index n = squared_residuals.size();
  if (n < 3 || regressor.size() != n) {
    throw Error(ErrorKind::TooFewRows, "chi-square statistic needs at least 3 matching rows");
  }
  const Eigen::ArrayXd sc = regressor.array() - regressor.mean();
  const double sxx = sc.square().sum();
  const double total = squared_residuals.sum();
  if (!(sxx > 0.0) || !(total > 0.0)) {
    throw Error(ErrorKind::DegenerateVariance, "chi-square statistic needs variation in both inputs");
  }
  const Eigen::ArrayXd ec = squared_residuals.array() - squared_residuals.mean();
  const double slope = (sc * ec).sum() / sxx;
  const double ssr = slope * slope * sxx;
  const double scale = total / static_cast<double>(n);
  return (ssr / 2.0) / (scale * scale);
}

double chi2_cdf(double x, double dof) {
  if (!(x > 0.0)) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(dof / 2.0, x / 2.0);
}

RobustPoint robust_point(const Vec& x, const Vec& s, const VarianceModel* weights, bool with_ad) {
  const Eigen::Index n = x.size();
  Mat X(n, 2);
  X.col(0).setOnes();
  X.col(1) = s;
  const RegressionFit first = ols(X, x);
  const Vec e2 = first.residuals.array().square().matrix();

  VarianceModel fitted_model;
  if (weights == nullptr) {
    fitted_model = estimate_variance_model(e2, Mat(s));
    weights = &fitted_model;
  }
  const Vec& fv = weights->fitted_variances;
  const RegressionFit gls = fgls(X, x, *weights);
  const Vec eg2 = (gls.residuals.array().square() / fv.array()).matrix();

  RobustPoint p;
  p.x2_ols = chi_square_stat(e2, s);
  p.x2_fgls = chi_square_stat(eg2, s);
  const double p_ols = chi2_cdf(p.x2_ols);
  const double p_gls = chi2_cdf(p.x2_fgls);
  p.distance = p_ols - p_gls;
  p.ratio = p_gls > 0.0 ? p_ols / p_gls : (p_ols > 0.0 ? std::numeric_limits<double>::max() : 1.0);
  const double e2_mean = e2.mean();
  p.trace = (fv.array() / e2_mean - 1.0).square().mean();
  p.pooled_size = static_cast<int>(2 * n);
  if (with_ad) {
    std::vector<double> f(static_cast<std::size_t>(n));
    std::vector<double> g(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      f[static_cast<std::size_t>(i)] = e2(i) / e2_mean;
      g[static_cast<std::size_t>(i)] = eg2(i);
    }
    p.ad = ad_two_sample(f, g);
  }
  return p;
}

RobustPoint robust_point(const SivContext& ctx, int k, double delta, bool with_ad) {
  RobustPoint p = robust_point(ctx.x, candidate(ctx, k, delta), nullptr, with_ad);
  p.delta = delta;
  return p;
}

double parametric_distance(const SivContext& ctx, int k, double delta) {
  return robust_point(ctx, k, delta, false).distance;
}

double ad_two_sample(const std::vector<double>& f, const std::vector<double>& g) {
  if (f.size() < 2 || g.size() < 2) {
    throw Error(ErrorKind::DegenerateSample, "Anderson-Darling needs at least 2 points per sample");
  }
  std::vector<double> a(f);
  std::vector<double> b(g);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  const double total = n + m;

  std::size_t i = 0;
  std::size_t j = 0;
  double sum = 0.0;
  while (i < a.size() || j < b.size()) {
    double v;
    if (j == b.size() || (i < a.size() && a[i] <= b[j])) {
      v = a[i];
    } else {
      v = b[j];
    }
    std::size_t count = 0;
    while (i < a.size() && a[i] == v) {
      ++i;
      ++count;
    }
    while (j < b.size() && b[j] == v) {
      ++j;
      ++count;
    }
    const double h = static_cast<double>(i + j) / total;
    if (h >= 1.0) break;
    const double diff = static_cast<double>(i) / n - static_cast<double>(j) / m;
    sum += static_cast<double>(count) * diff * diff / (h * (1.0 - h));
  }
  return n * m / (total * total) * sum;
}

double ad_two_sample(const AdInput& input) { return ad_two_sample(input.sample_f, input.sample_g); }

RobustResult robust_delta0(const SivContext& ctx, int k, const SearchOptions& options,
                           RobustMode mode) {
  const CriterionKind kind = mode == RobustMode::parametric ? CriterionKind::robust_parametric
                                                            : CriterionKind::robust_nonparametric;
  RobustResult out;
  out.locus = scan_locus(ctx, k, options, kind);
  const ParametricForm form = options.parametric_form;
  auto best = find_delta0(
      out.locus,
      [&ctx, k, kind, form](double d) { return locus_criterion(ctx, k, d, kind, form); },
      FindOptions{0.0, options.grid.refine_rounds});
  out.delta0 = *best;
  return out;
}

}  // namespace siv
