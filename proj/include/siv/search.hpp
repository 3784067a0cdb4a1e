// Synthetic instrument family s(delta) = x + k * delta * r, the DT moment
// along it, and the zero-crossing search that picks delta0 and the sign k.
#pragma once

#include "siv/dataset.hpp"
#include "siv/model.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace siv {

struct SivContext {
  Vec y;  // partialled, standardised outcome
  Vec x;  // partialled, standardised endogenous regressor
  Vec r;  // unit-variance direction orthogonal to x with corr(y, r) > 0
  int n = 0;
  double sd_y = 1.0;  // sd of the partialled outcome before standardising
  double sd_x = 1.0;
  int n_controls = 0;
};

// From raw vectors: partials y and x on [1, controls], standardises both,
// and builds r from the residual of y on [1, x].
// Throws DegenerateDirection when y and x are collinear, DegenerateVariance
// when a partialled variable is constant, plus partial_out errors.
SivContext build_context(const Vec& y, const Vec& x, const Mat& controls);
// Uses spec.outcome, spec.endogenous[0] and spec.controls.
SivContext build_context(const Dataset& data, const ModelSpec& spec);

// x + k * delta * r; delta = 0 returns x unchanged.
Vec candidate(const SivContext& ctx, int k, double delta);

struct MomentValue {
  double value = 0.0;      // n^-1 sum (e_i^2 - sigma^2)(s_i - mean s)
  double std_error = 0.0;  // sd of the summands / sqrt(n)
};

// First stage x = a + g s + e by OLS, sigma^2 = SSE / n.
// Throws DegenerateVariance when s is constant.
MomentValue dt_moment_detail(const Vec& x, const Vec& s);
double dt_moment(const SivContext& ctx, const Vec& s);

struct LocusPoint {
  double delta = 0.0;
  double criterion = 0.0;
  double corr_s_x = 0.0;
  double first_stage_F = 0.0;
  double std_error = 0.0;  // DT moment only; NaN for robust criteria
};

struct DeltaLocus {
  int k = 1;
  CriterionKind kind = CriterionKind::dt_moment;
  std::vector<LocusPoint> points;
};

// Largest delta with corr(s, x) >= c.
double delta_upper(const SivContext& ctx, double min_corr);
// Log-spaced grid on [delta_min, delta_upper]. Throws EmptyGrid.
std::vector<double> delta_grid(const SivContext& ctx, const GridConfig& grid);

// Evaluates the chosen criterion over the grid. Points are computed
// independently and may be spread over options.threads workers.
DeltaLocus scan_locus(const SivContext& ctx, int k, const SearchOptions& options,
                      CriterionKind kind);

// Criterion value at a single delta, matching what scan_locus records.
double locus_criterion(const SivContext& ctx, int k, double delta, CriterionKind kind,
                       ParametricForm form = ParametricForm::trace);

struct Delta0 {
  double delta = 0.0;
  double lo = 0.0;  // bracket used for the refinement
  double hi = 0.0;
};

struct FindOptions {
  double significance_z = 0.0;
  int refine_rounds = 30;
};

// dt_moment loci: smallest sign change between consecutive grid points,
// refined by bisection on `criterion` (linear interpolation when empty) to
// |m| <= 1e-10 or width <= 1e-8. With significance_z > 0 a change only
// counts when it lies between two consecutive significant points of
// opposite sign. Robust loci: grid argmin refined by golden section.
std::optional<Delta0> find_delta0(const DeltaLocus& locus,
                                  const std::function<double(double)>& criterion,
                                  const FindOptions& options);

enum class SignVerdict { positive_cov_xu, negative_cov_xu, no_endogeneity, ambiguous };

struct SignDecision {
  SignVerdict verdict = SignVerdict::no_endogeneity;
  std::optional<int> k;
  std::optional<double> delta0_plus;   // root found under k = +1
  std::optional<double> delta0_minus;  // root found under k = -1
  DeltaLocus locus_plus;
  DeltaLocus locus_minus;
};

std::string_view verdict_name(SignVerdict v) noexcept;

// Scans the DT moment under both signs. A sign override scans only the
// chosen sign; its verdict follows from the override and the root may be
// absent.
SignDecision determine_sign(const SivContext& ctx, const SearchOptions& options,
                            SignPolicy policy = SignPolicy::automatic);

}  // namespace siv
