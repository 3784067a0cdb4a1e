#include "siv/search.hpp"

#include "siv/error.hpp"
#include "siv/parallel.hpp"
#include "siv/regression.hpp"
#include "siv/robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace siv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sign_of(double v) { return (v > 0.0) - (v < 0.0); }

Vec standardise(const Vec& v, double sd) { return (v.array() - v.mean()).matrix() / sd; }

double checked_sd(const Vec& partialled, const Vec& raw, const char* what) {
  const double sd = std::sqrt(variance(partialled));
  const double raw_sd = std::sqrt(variance(raw));
  if (!(sd > 1e-10 * raw_sd) || !(sd > 0.0)) {
    throw Error(ErrorKind::DegenerateVariance,
                std::string(what) + " has no variation after partialling out the controls");
  }
  return sd;
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double mlo, double mhi) {
  if (!f) return lo - mlo * (hi - lo) / (mhi - mlo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double mm = f(mid);
    if (std::abs(mm) <= 1e-10 || (hi - lo) <= 1e-8) return mid;
    if (sign_of(mm) == sign_of(mlo)) {
      lo = mid;
      mlo = mm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::optional<Delta0> crossing_in(const DeltaLocus& locus, std::size_t from, std::size_t to,
                                  const std::function<double(double)>& f) {
  const auto& p = locus.points;
  for (std::size_t j = from; j < to && j + 1 < p.size(); ++j) {
    if (p[j].criterion == 0.0) return Delta0{p[j].delta, p[j].delta, p[j].delta};
    if (sign_of(p[j].criterion) * sign_of(p[j + 1].criterion) < 0.0) {
      const double d = bisect(f, p[j].delta, p[j + 1].delta, p[j].criterion, p[j + 1].criterion);
      return Delta0{d, p[j].delta, p[j + 1].delta};
    }
  }
  return std::nullopt;
}

std::optional<Delta0> find_crossing(const DeltaLocus& locus, const std::function<double(double)>& f,
                                    double z) {
  const auto& p = locus.points;
  bool screened = z > 0.0;
  for (const auto& pt : p) screened = screened && std::isfinite(pt.std_error);
  if (!screened) return crossing_in(locus, 0, p.size(), f);

  std::optional<std::size_t> last;
  double last_sign = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double se = p[i].std_error;
    const bool significant = se > 0.0 ? std::abs(p[i].criterion) > z * se : p[i].criterion != 0.0;
    if (!significant) continue;
    const double sg = sign_of(p[i].criterion);
    if (last && sg != last_sign) {
      if (auto hit = crossing_in(locus, *last, i, f)) return hit;
    }
    last = i;
    last_sign = sg;
  }
  return std::nullopt;
}

std::optional<Delta0> find_minimum(const DeltaLocus& locus, const std::function<double(double)>& f,
                                   int rounds) {
  const auto& p = locus.points;
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i].criterion < p[best].criterion) best = i;
  }
  double a = p[best == 0 ? 0 : best - 1].delta;
  double b = p[std::min(best + 1, p.size() - 1)].delta;
  Delta0 out{p[best].delta, a, b};
  if (!f || rounds <= 0 || !(b > a)) return out;

  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < rounds; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  const double mid = 0.5 * (a + b);
  if (f(mid) <= p[best].criterion) out.delta = mid;
  return out;
}

}  // namespace

SivContext build_context(const Vec& y, const Vec& x, const Mat& controls) {
  if (y.size() != x.size() || controls.rows() != y.size()) {
    throw Error(ErrorKind::InvalidInput, "outcome, regressor and controls differ in length");
  }
  Mat targets(y.size(), 2);
  targets.col(0) = y;
  targets.col(1) = x;
  const Mat partialled = partial_out(controls, targets);
  const Vec yp = partialled.col(0);
  const Vec xp = partialled.col(1);

  SivContext ctx;
  ctx.n = static_cast<int>(y.size());
  ctx.n_controls = static_cast<int>(controls.cols());
  ctx.sd_y = checked_sd(yp, y, "outcome");
  ctx.sd_x = checked_sd(xp, x, "endogenous regressor");
  ctx.y = standardise(yp, ctx.sd_y);
  ctx.x = standardise(xp, ctx.sd_x);

  const Vec yc = (ctx.y.array() - ctx.y.mean()).matrix();
  const Vec xc = (ctx.x.array() - ctx.x.mean()).matrix();
  Vec r = yc - (xc.dot(yc) / xc.dot(xc)) * xc;
  const double sd_r = std::sqrt(variance(r));
  if (!(sd_r > 1e-10)) {
    throw Error(ErrorKind::DegenerateDirection,
                "outcome and regressor are collinear; no direction orthogonal to x exists");
  }
  r = standardise(r, sd_r);
  if (std::abs(r.dot(ctx.x)) > 1e-8 * r.norm() * ctx.x.norm()) {
    r -= (ctx.x.dot(r) / ctx.x.dot(ctx.x)) * ctx.x;
    r = standardise(r, std::sqrt(variance(r)));
  }
  if (covariance(ctx.y, r) < 0.0) r = -r;
  ctx.r = std::move(r);
  return ctx;
}

SivContext build_context(const Dataset& data, const ModelSpec& spec) {
  if (spec.endogenous.empty()) {
    throw Error(ErrorKind::InvalidInput, "no endogenous regressor given");
  }
  return build_context(data.column_vec(spec.outcome), data.column_vec(spec.endogenous.front()),
                       data.columns_mat(spec.controls));
}

Vec candidate(const SivContext& ctx, int k, double delta) {
  if (delta == 0.0) return ctx.x;
  return ctx.x + (static_cast<double>(k) * delta) * ctx.r;
}

MomentValue dt_moment_detail(const Vec& x, const Vec& s) {
  const Eigen::Index n = s.size();
  const Eigen::ArrayXd sc = s.array() - s.mean();
  const double sxx = sc.square().sum();
  if (!(sxx > 0.0)) {
    throw Error(ErrorKind::DegenerateVariance, "instrument has zero variance");
  }
  const Eigen::ArrayXd xc = x.array() - x.mean();
  const double gamma = (sc * xc).sum() / sxx;
  const Eigen::ArrayXd e2 = (xc - gamma * sc).square();
  const double sigma2 = e2.mean();
  const Eigen::ArrayXd terms = (e2 - sigma2) * sc;
  MomentValue out;
  out.value = terms.mean();
  const double var_terms = (terms - out.value).square().mean();
  out.std_error = std::sqrt(var_terms / static_cast<double>(n));
  return out;
}

double dt_moment(const SivContext& ctx, const Vec& s) { return dt_moment_detail(ctx.x, s).value; }

double delta_upper(const SivContext& ctx, double min_corr) {
  if (!(min_corr > 0.0 && min_corr < 1.0)) {
    throw Error(ErrorKind::InvalidInput, "minimum correlation must lie in (0, 1)");
  }
  return std::sqrt((1.0 / (min_corr * min_corr) - 1.0) * variance(ctx.x) / variance(ctx.r));
}

std::vector<double> delta_grid(const SivContext& ctx, const GridConfig& grid) {
  if (!(grid.delta_min > 0.0) || grid.n_points < 10) {
    throw Error(ErrorKind::InvalidInput, "grid needs delta_min > 0 and at least 10 points");
  }
  const double hi = delta_upper(ctx, grid.min_corr);
  if (hi < grid.delta_min) {
    throw Error(ErrorKind::EmptyGrid, "upper delta bound lies below delta_min");
  }
  std::vector<double> out(static_cast<std::size_t>(grid.n_points));
  const double la = std::log(grid.delta_min);
  const double lb = std::log(hi);
  const double step = (lb - la) / static_cast<double>(grid.n_points - 1);
  for (int i = 0; i < grid.n_points; ++i) out[static_cast<std::size_t>(i)] = std::exp(la + step * i);
  out.front() = grid.delta_min;
  out.back() = hi;
  return out;
}

double locus_criterion(const SivContext& ctx, int k, double delta, CriterionKind kind,
                       ParametricForm form) {
  switch (kind) {
    case CriterionKind::dt_moment:
      return dt_moment(ctx, candidate(ctx, k, delta));
    case CriterionKind::robust_parametric: {
      const RobustPoint p = robust_point(ctx, k, delta, false);
      switch (form) {
        case ParametricForm::trace: return p.trace;
        case ParametricForm::difference: return std::abs(p.distance);
        case ParametricForm::ratio: return p.ratio;
      }
      return p.trace;
    }
    case CriterionKind::robust_nonparametric:
      return robust_point(ctx, k, delta, true).ad;
  }
  return kNaN;
}

DeltaLocus scan_locus(const SivContext& ctx, int k, const SearchOptions& options,
                      CriterionKind kind) {
  const std::vector<double> deltas = delta_grid(ctx, options.grid);
  DeltaLocus locus;
  locus.k = k;
  locus.kind = kind;
  locus.points.resize(deltas.size());
  const double dof = static_cast<double>(ctx.n - 2 - ctx.n_controls);
  parallel_for(deltas.size(), options.threads, [&](std::size_t i) {
    LocusPoint& pt = locus.points[i];
    pt.delta = deltas[i];
    const Vec s = candidate(ctx, k, pt.delta);
    pt.corr_s_x = correlation(s, ctx.x);
    const double rho2 = pt.corr_s_x * pt.corr_s_x;
    pt.first_stage_F = rho2 >= 1.0 ? kFirstStageFCap
                                   : std::min(kFirstStageFCap, dof * rho2 / (1.0 - rho2));
    if (kind == CriterionKind::dt_moment) {
      const MomentValue m = dt_moment_detail(ctx.x, s);
      pt.criterion = m.value;
      pt.std_error = m.std_error;
    } else {
      pt.criterion = locus_criterion(ctx, k, pt.delta, kind, options.parametric_form);
      pt.std_error = kNaN;
    }
  });
  return locus;
}

std::optional<Delta0> find_delta0(const DeltaLocus& locus,
                                  const std::function<double(double)>& criterion,
                                  const FindOptions& options) {
  if (locus.points.empty()) return std::nullopt;
  if (locus.kind == CriterionKind::dt_moment) {
    return find_crossing(locus, criterion, options.significance_z);
  }
  return find_minimum(locus, criterion, options.refine_rounds);
}

std::string_view verdict_name(SignVerdict v) noexcept {
  switch (v) {
    case SignVerdict::positive_cov_xu: return "positive_cov_xu";
    case SignVerdict::negative_cov_xu: return "negative_cov_xu";
    case SignVerdict::no_endogeneity: return "no_endogeneity";
    case SignVerdict::ambiguous: return "ambiguous";
  }
  return "unknown";
}

SignDecision determine_sign(const SivContext& ctx, const SearchOptions& options,
                            SignPolicy policy) {
  const FindOptions find{options.significance_z, options.grid.refine_rounds};
  auto root = [&](const DeltaLocus& locus) {
    const int k = locus.k;
    return find_delta0(locus, [&ctx, k](double d) { return dt_moment(ctx, candidate(ctx, k, d)); },
                       find);
  };
  auto locate = [&](int k, DeltaLocus& locus) -> std::optional<double> {
    locus = scan_locus(ctx, k, options, CriterionKind::dt_moment);
    if (auto r = root(locus)) return r->delta;
    return std::nullopt;
  };

  SignDecision out;
  out.locus_plus.k = 1;
  out.locus_minus.k = -1;
  if (policy == SignPolicy::positive) {
    out.delta0_minus = locate(-1, out.locus_minus);
    out.verdict = SignVerdict::positive_cov_xu;
    out.k = -1;
    return out;
  }
  if (policy == SignPolicy::negative) {
    out.delta0_plus = locate(1, out.locus_plus);
    out.verdict = SignVerdict::negative_cov_xu;
    out.k = 1;
    return out;
  }
  out.delta0_plus = locate(1, out.locus_plus);
  out.delta0_minus = locate(-1, out.locus_minus);
  if (out.delta0_plus && out.delta0_minus) {
    out.verdict = SignVerdict::ambiguous;
  } else if (out.delta0_minus) {
    out.verdict = SignVerdict::positive_cov_xu;
    out.k = -1;
  } else if (out.delta0_plus) {
    out.verdict = SignVerdict::negative_cov_xu;
    out.k = 1;
  } else {
    out.verdict = SignVerdict::no_endogeneity;
  }
  return out;
}

}  // namespace siv
