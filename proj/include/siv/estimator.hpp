// Final estimates: 2SLS with the synthesised instrument, diagnostics,
// bootstrap inference and the multi-regressor extension.
#pragma once

#include "siv/dataset.hpp"
#include "siv/error.hpp"
#include "siv/model.hpp"
#include "siv/search.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace siv {

struct TwoSlsResult {
  Vec coefficients;  // one per endogenous column
  Vec se;            // homoscedastic analytic standard errors
  Vec residuals;     // structural residuals on the partialled data
  double sigma2 = 0.0;
  int dof = 0;
};

// 2SLS of y on the endogenous columns with [1, controls] partialled out of
// every variable. Throws UnderIdentified when there are fewer instruments
// than endogenous columns, RankDeficient on a degenerate first stage.
TwoSlsResult two_sls(const Vec& y, const Mat& endogenous, const Mat& controls,
                     const Mat& instruments);

struct WuHausman {
  double p_value = 1.0;
  double t_stat = 0.0;
  bool degenerate = false;  // first-stage residual is identically zero
};

// Control-function test: t-test on the first-stage residual added to the
// structural OLS of y on [1, controls, x].
WuHausman wu_hausman(const Vec& y, const Vec& x, const Mat& controls, const Mat& instruments);
WuHausman wu_hausman(const Dataset& data, const ModelSpec& spec, const Vec& instrument);

struct SivEstimate {
  Method method = Method::SIV;
  std::string regressor;
  double beta_hat = 0.0;  // original units
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::string ci_kind = "normal";
  std::optional<double> delta0;
  int k = 0;  // 0 for methods without a synthetic instrument
  std::optional<SignVerdict> verdict;
  std::optional<double> first_stage_F;
  std::optional<bool> weak_instrument;
  std::optional<double> wu_hausman_p;
  bool wu_hausman_degenerate = false;
  std::optional<double> sargan_p;  // over-identified external IV only
  double adj_r2 = 0.0;
  int n_used = 0;
};

// Full pipeline for spec.method on the first endogenous regressor.
// Throws NoEndogeneityDetected, AmbiguousSign, DegenerateDirection and
// regression errors.
SivEstimate estimate(const Dataset& data, const ModelSpec& spec);

struct MethodOutcome {
  std::optional<SivEstimate> estimate;
  std::optional<ErrorKind> error;
  std::string message;
};

// Runs several methods on the same data, sharing the context and the sign
// decision. Errors are captured per method. Each entry equals what
// estimate() returns for that method.
std::vector<MethodOutcome> estimate_methods(const Dataset& data, const ModelSpec& spec,
                                            const std::vector<Method>& methods);

struct BootstrapResult {
  std::vector<double> estimates;
  std::vector<double> delta0s;
  std::vector<int> replication;  // index of each successful replication
  int failures = 0;
  double mean_beta = 0.0;
  double se = 0.0;  // sample sd (divisor B - 1)
  double ci_low = 0.0;   // percentile 2.5
  double ci_high = 0.0;  // percentile 97.5
  double normal_ci_low = 0.0;
  double normal_ci_high = 0.0;
  std::optional<double> mean_delta0;
  int B = 0;
  std::uint64_t seed = 0;
  SignPolicy sign_used = SignPolicy::automatic;
};

// B row resamples with replacement; every replication reruns the whole
// pipeline. Under an automatic sign policy the sign is decided once on
// the full data and held fixed across replications.
// Throws AllReplicationsFailed, and InvalidInput when B < 2.
BootstrapResult bootstrap(const Dataset& data, const ModelSpec& spec, int B, std::uint64_t seed,
                          int threads = 1);

// One estimate per endogenous regressor. Each coordinate's instrument is
// searched after partialling the other endogenous regressors and the
// controls; the coefficients come from one joint 2SLS.
std::vector<SivEstimate> multi_endogenous_estimate(const Dataset& data, const ModelSpec& spec);

// Linear-interpolation percentile (type 7) of unsorted values, q in [0, 1].
double percentile(std::vector<double> values, double q);

}  // namespace siv
