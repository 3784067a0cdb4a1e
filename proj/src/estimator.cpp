#include "siv/estimator.hpp"

#include "siv/error.hpp"
#include "siv/parallel.hpp"
#include "siv/regression.hpp"
#include "siv/rng.hpp"
#include "siv/robust.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace siv {

namespace {

constexpr double kZ975 = 1.959963984540054;

Mat hcat(const Mat& a, const Mat& b) {
  Mat out(a.rows(), a.cols() + b.cols());
  out.leftCols(a.cols()) = a;
  out.rightCols(b.cols()) = b;
  return out;
}

Mat drop_column(const Mat& m, Eigen::Index j) {
  Mat out(m.rows(), m.cols() - 1);
  for (Eigen::Index c = 0, o = 0; c < m.cols(); ++c) {
    if (c != j) out.col(o++) = m.col(c);
  }
  return out;
}

double adjusted_r2(const Vec& y, const Vec& residuals, int n_coef) {
  const double n = static_cast<double>(y.size());
  const double sst = (y.array() - y.mean()).square().sum();
  const double sse = residuals.squaredNorm();
  return 1.0 - (sse / (n - n_coef)) / (sst / (n - 1.0));
}

void fill_normal_ci(SivEstimate& est) {
  est.ci_low = est.beta_hat - kZ975 * est.se;
  est.ci_high = est.beta_hat + kZ975 * est.se;
  est.ci_kind = "normal";
}

double sargan_p(const TwoSlsResult& fit, const Mat& controls, const Mat& instruments, int n_endog) {
  const int overid = static_cast<int>(instruments.cols()) - n_endog;
  const RegressionFit aux = ols(with_intercept(hcat(controls, instruments)), fit.residuals);
  const double tss = (fit.residuals.array() - fit.residuals.mean()).square().sum();
  const double stat = static_cast<double>(fit.residuals.size()) * (1.0 - aux.sse / tss);
  return 1.0 - chi2_cdf(stat, overid);
}

struct Variables {
  Vec y;
  Vec x;
  Mat controls;
};

Variables variables(const Dataset& data, const ModelSpec& spec) {
  if (spec.endogenous.empty()) throw Error(ErrorKind::InvalidInput, "no endogenous regressor given");
  return {data.column_vec(spec.outcome), data.column_vec(spec.endogenous.front()),
          data.columns_mat(spec.controls)};
}

// Estimate for one method with the synthetic instrument (or x itself for
// OLS, or the external instruments) already decided.
SivEstimate finish(const Variables& v, const ModelSpec& spec, Method method, const Mat& instruments) {
  const TwoSlsResult fit = two_sls(v.y, Mat(v.x), v.controls, instruments);
  SivEstimate est;
  est.method = method;
  est.regressor = spec.endogenous.front();
  est.beta_hat = fit.coefficients(0);
  est.se = fit.se(0);
  est.n_used = static_cast<int>(v.y.size());
  est.adj_r2 = adjusted_r2(v.y, fit.residuals, 2 + static_cast<int>(v.controls.cols()));
  fill_normal_ci(est);
  if (method != Method::OLS) {
    const FirstStage fs = first_stage_F(v.x, instruments, v.controls);
    est.first_stage_F = fs.F;
    est.weak_instrument = fs.weak;
    const WuHausman wh = wu_hausman(v.y, v.x, v.controls, instruments);
    est.wu_hausman_p = wh.p_value;
    est.wu_hausman_degenerate = wh.degenerate;
  }
  if (method == Method::ExternalIV && instruments.cols() > 1) {
    est.sargan_p = sargan_p(fit, v.controls, instruments, 1);
  }
  return est;
}

[[noreturn]] void throw_for_verdict(SignVerdict verdict) {
  if (verdict == SignVerdict::ambiguous) {
    throw Error(ErrorKind::AmbiguousSign,
                "DT crossings exist under both signs; supply an explicit sign override");
  }
  throw Error(ErrorKind::NoEndogeneityDetected,
              "no DT crossing under either sign; the regressor looks exogenous, use OLS");
}

// delta0 for a synthetic-instrument method under a decided sign.
double choose_delta0(const SivContext& ctx, const SignDecision& decision, Method method,
                     const ModelSpec& spec) {
  const int k = *decision.k;
  if (method == Method::SIV) {
    const auto& root = k > 0 ? decision.delta0_plus : decision.delta0_minus;
    if (!root) {
      throw Error(ErrorKind::NoEndogeneityDetected, "no DT crossing under the requested sign");
    }
    return *root;
  }
  const RobustMode mode = method == Method::RSIV_p ? RobustMode::parametric : RobustMode::nonparametric;
  return robust_delta0(ctx, k, spec.search, mode).delta0.delta;
}

}  // namespace

TwoSlsResult two_sls(const Vec& y, const Mat& endogenous, const Mat& controls, const Mat& instruments) {
  const Eigen::Index p = endogenous.cols();
  const Eigen::Index q = instruments.cols();
  if (q < p) {
    throw Error(ErrorKind::UnderIdentified, "fewer instruments than endogenous regressors");
  }
  const Eigen::Index n = y.size();
  Mat all(n, 1 + p + q);
  all.col(0) = y;
  all.middleCols(1, p) = endogenous;
  all.rightCols(q) = instruments;
  const Mat part = partial_out(controls, all);
  const Vec yp = part.col(0);
  const Mat Xp = part.middleCols(1, p);
  const Mat Zp = part.rightCols(q);

  Mat Xhat(n, p);
  for (Eigen::Index j = 0; j < p; ++j) Xhat.col(j) = ols(Zp, Xp.col(j)).fitted;
  const RegressionFit second = ols(Xhat, yp);

  TwoSlsResult out;
  out.coefficients = second.coefficients;
  out.residuals = yp - Xp * out.coefficients;
  out.dof = static_cast<int>(n - p - controls.cols() - 1);
  if (out.dof <= 0) throw Error(ErrorKind::TooFewRows, "no residual degrees of freedom left");
  out.sigma2 = out.residuals.squaredNorm() / out.dof;
  const Mat cov = (Xhat.transpose() * Xhat).ldlt().solve(Mat::Identity(p, p)) * out.sigma2;
  out.se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

WuHausman wu_hausman(const Vec& y, const Vec& x, const Mat& controls, const Mat& instruments) {
  WuHausman out;
  const RegressionFit first = ols(with_intercept(hcat(controls, instruments)), x);
  const double scale = std::sqrt((x.array() - x.mean()).square().sum());
  if (!(first.residuals.norm() > 1e-10 * scale)) {
    out.degenerate = true;
    return out;
  }
  Mat design = with_intercept(controls);
  design.conservativeResize(Eigen::NoChange, design.cols() + 2);
  design.col(design.cols() - 2) = x;
  design.col(design.cols() - 1) = first.residuals;
  RegressionFit structural;
  try {
    structural = ols(design, y);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::RankDeficient) throw;
    out.degenerate = true;
    return out;
  }
  const Eigen::Index last = design.cols() - 1;
  const double sigma2 = structural.sse / structural.dof;
  const Mat xtx_inv = (design.transpose() * design).ldlt().solve(Mat::Identity(design.cols(), design.cols()));
  const double se = std::sqrt(std::max(sigma2 * xtx_inv(last, last), 0.0));
  if (!(se > 0.0)) {
    out.degenerate = true;
    return out;
  }
  out.t_stat = structural.coefficients(last) / se;
  const boost::math::students_t dist(static_cast<double>(structural.dof));
  out.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.t_stat)));
  return out;
}

WuHausman wu_hausman(const Dataset& data, const ModelSpec& spec, const Vec& instrument) {
  const Variables v = variables(data, spec);
  return wu_hausman(v.y, v.x, v.controls, Mat(instrument));
}

std::vector<MethodOutcome> estimate_methods(const Dataset& data, const ModelSpec& spec,
                                            const std::vector<Method>& methods) {
  std::vector<MethodOutcome> out(methods.size());
  const Variables v = variables(data, spec);

  std::optional<SivContext> ctx;
  std::optional<SignDecision> decision;
  std::optional<Error> shared_error;
  const bool synthetic = std::any_of(methods.begin(), methods.end(), [](Method m) {
    return m == Method::SIV || m == Method::RSIV_p || m == Method::RSIV_n;
  });
  if (synthetic) {
    try {
      ctx = build_context(v.y, v.x, v.controls);
      decision = determine_sign(*ctx, spec.search, spec.sign);
    } catch (const Error& e) {
      shared_error = e;
    }
  }

  for (std::size_t i = 0; i < methods.size(); ++i) {
    const Method m = methods[i];
    try {
      if (m == Method::OLS) {
        out[i].estimate = finish(v, spec, m, Mat(v.x));
        out[i].estimate->k = 0;
        continue;
      }
      if (m == Method::ExternalIV) {
        if (spec.external_instruments.empty()) {
          throw Error(ErrorKind::UnderIdentified, "external IV needs at least one instrument column");
        }
        out[i].estimate = finish(v, spec, m, data.columns_mat(spec.external_instruments));
        continue;
      }
      if (shared_error) throw *shared_error;
      if (!decision->k) throw_for_verdict(decision->verdict);
      const double d0 = choose_delta0(*ctx, *decision, m, spec);
      const Vec s = candidate(*ctx, *decision->k, d0);
      SivEstimate est = finish(v, spec, m, Mat(s));
      est.delta0 = d0;
      est.k = *decision->k;
      est.verdict = decision->verdict;
      out[i].estimate = std::move(est);
    } catch (const Error& e) {
      out[i].error = e.kind();
      out[i].message = e.what();
    }
  }
  return out;
}

SivEstimate estimate(const Dataset& data, const ModelSpec& spec) {
  MethodOutcome r = estimate_methods(data, spec, {spec.method}).front();
  if (r.error) throw Error(*r.error, r.message);
  return std::move(*r.estimate);
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

BootstrapResult bootstrap(const Dataset& data, const ModelSpec& spec, int B, std::uint64_t seed,
                          int threads) {
  if (B < 2) throw Error(ErrorKind::InvalidInput, "bootstrap needs B >= 2");
  ModelSpec fixed = spec;
  fixed.search.threads = 1;
  if (spec.sign == SignPolicy::automatic && spec.method != Method::OLS &&
      spec.method != Method::ExternalIV) {
    const Variables v = variables(data, spec);
    const SignDecision d = determine_sign(build_context(v.y, v.x, v.controls), fixed.search);
    if (!d.k) throw_for_verdict(d.verdict);
    fixed.sign = *d.k < 0 ? SignPolicy::positive : SignPolicy::negative;
  }

  struct Rep {
    std::optional<double> beta;
    std::optional<double> delta0;
  };
  std::vector<Rep> reps(static_cast<std::size_t>(B));
  const std::size_t n = data.n_rows();
  parallel_for(reps.size(), threads, [&](std::size_t b) {
    Rng rng = make_stream(seed, b);
    const Dataset sample = data.select_rows(sample_with_replacement(rng, n, n));
    try {
      const SivEstimate est = estimate(sample, fixed);
      reps[b].beta = est.beta_hat;
      reps[b].delta0 = est.delta0;
    } catch (const Error&) {
    }
  });

  BootstrapResult out;
  out.B = B;
  out.seed = seed;
  out.sign_used = fixed.sign;
  for (std::size_t b = 0; b < reps.size(); ++b) {
    if (!reps[b].beta) {
      ++out.failures;
      continue;
    }
    out.estimates.push_back(*reps[b].beta);
    out.replication.push_back(static_cast<int>(b));
    if (reps[b].delta0) out.delta0s.push_back(*reps[b].delta0);
  }
  if (out.estimates.empty()) {
    throw Error(ErrorKind::AllReplicationsFailed, "every bootstrap replication failed");
  }
  const double m = static_cast<double>(out.estimates.size());
  out.mean_beta = std::accumulate(out.estimates.begin(), out.estimates.end(), 0.0) / m;
  double ss = 0.0;
  for (double e : out.estimates) ss += (e - out.mean_beta) * (e - out.mean_beta);
  out.se = out.estimates.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
  out.ci_low = percentile(out.estimates, 0.025);
  out.ci_high = percentile(out.estimates, 0.975);
  out.normal_ci_low = out.mean_beta - kZ975 * out.se;
  out.normal_ci_high = out.mean_beta + kZ975 * out.se;
  if (!out.delta0s.empty()) {
    out.mean_delta0 = std::accumulate(out.delta0s.begin(), out.delta0s.end(), 0.0) /
                      static_cast<double>(out.delta0s.size());
  }
  return out;
}

std::vector<SivEstimate> multi_endogenous_estimate(const Dataset& data, const ModelSpec& spec) {
  if (spec.endogenous.empty()) throw Error(ErrorKind::InvalidInput, "no endogenous regressor given");
  if (spec.method == Method::ExternalIV) {
    throw Error(ErrorKind::InvalidInput, "the multi-regressor path builds synthetic instruments only");
  }
  const Vec y = data.column_vec(spec.outcome);
  const Mat X = data.columns_mat(spec.endogenous);
  const Mat W = data.columns_mat(spec.controls);
  const Eigen::Index J = X.cols();
  // Surfaces collinear endogenous regressors before any search.
  partial_out(W, X);
  (void)ols(with_intercept(hcat(W, X)), y);

  Mat Z(X.rows(), J);
  std::vector<SivEstimate> out(static_cast<std::size_t>(J));
  for (Eigen::Index j = 0; j < J; ++j) {
    const Mat others = hcat(W, drop_column(X, j));
    const SivContext ctx = build_context(y, X.col(j), others);
    SivEstimate& est = out[static_cast<std::size_t>(j)];
    est.method = spec.method;
    est.regressor = spec.endogenous[static_cast<std::size_t>(j)];
    if (spec.method == Method::OLS) {
      Z.col(j) = X.col(j);
      continue;
    }
    const SignDecision decision = determine_sign(ctx, spec.search, spec.sign);
    if (!decision.k) throw_for_verdict(decision.verdict);
    const double d0 = choose_delta0(ctx, decision, spec.method, spec);
    Z.col(j) = candidate(ctx, *decision.k, d0);
    est.delta0 = d0;
    est.k = *decision.k;
    est.verdict = decision.verdict;
  }

  const TwoSlsResult fit = two_sls(y, X, W, Z);
  for (Eigen::Index j = 0; j < J; ++j) {
    SivEstimate& est = out[static_cast<std::size_t>(j)];
    est.beta_hat = fit.coefficients(j);
    est.se = fit.se(j);
    est.n_used = static_cast<int>(y.size());
    est.adj_r2 = adjusted_r2(y, fit.residuals, static_cast<int>(1 + J + W.cols()));
    fill_normal_ci(est);
    if (spec.method != Method::OLS) {
      const FirstStage fs = first_stage_F(X.col(j), Z, W);
      est.first_stage_F = fs.F;
      est.weak_instrument = fs.weak;
      const WuHausman wh = wu_hausman(y, X.col(j), hcat(W, drop_column(X, j)), Z);
      est.wu_hausman_p = wh.p_value;
      est.wu_hausman_degenerate = wh.degenerate;
    }
  }
  return out;
}

}  // namespace siv
