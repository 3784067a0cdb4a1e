// Monte Carlo data-generating process with a known causal effect of 2 and
// the nested population / subsample experiment built on it.
#pragma once

#include "siv/dataset.hpp"
#include "siv/estimator.hpp"
#include "siv/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace siv {

// sinh(kappa * asinh(x) - epsilon)
double sinh_arcsinh(double x, double epsilon, double kappa);
Vec sinh_arcsinh(const Vec& x, double epsilon, double kappa);
// Inverse map: sinh((asinh(z) + epsilon) / kappa). Applied to standard
// normal draws it samples the sinh-arcsinh distribution.
double sinh_arcsinh_inverse(double z, double epsilon, double kappa);

enum class EndogeneitySign { positive, negative };

// latent: x = z + lambda * v, u = +/- v, with z a sinh-arcsinh regressor
//         and v the skewed error residualised on z and w.
// literal: x = 7 H(nu) + noise, u = +/- (x - mean x + N(0, var x)) + v
//          with v rescaled by mean(x) / 2. Not identified by the DT
//          condition; kept for comparison runs.
enum class DgpConstruction { latent, literal };

struct DgpConfig {
  std::size_t population_size = 20000;
  std::size_t sample_size = 1000;
  int n_generations = 10;
  int n_draws = 5;
  EndogeneitySign sign = EndogeneitySign::positive;
  std::uint64_t seed = 20240601;
  bool exogenous = false;
  // Multiplies the structural error by 1 + h |z| / sd(z).
  double heteroscedasticity = 0.0;
  double nu_low = -2.0;
  double nu_high = 2.0;
  double skew_epsilon = 5.0;
  double skew_kappa = 1.2;
  double target_bias = 1.0;  // OLS bias magnitude on the population
  DgpConstruction construction = DgpConstruction::latent;
};

struct Population {
  Dataset data;  // columns y, x, w
  double beta_true = 2.0;
  Vec u;           // structural error
  Vec instrument;  // latent exogenous part of x (empty for literal)
  Vec v;           // skewed error component before signing
};

// Deterministic in (config.seed, generation).
Population generate_population(const DgpConfig& config, int generation = 0);

struct McRow {
  Method method = Method::OLS;
  double mean_beta = 0.0;
  double std_error = 0.0;  // sd of estimates, divisor = successes
  double ci_low = 0.0;     // percentile 2.5
  double ci_high = 0.0;    // percentile 97.5
  double bias = 0.0;
  double rmse = 0.0;
  int n_success = 0;
  int n_failed = 0;
};

struct McReplication {
  int generation = 0;
  int draw = 0;
  Method method = Method::OLS;
  std::optional<double> beta;
  std::optional<double> delta0;
  int k = 0;
  std::string error;
};

struct McSummary {
  DgpConfig config;
  std::vector<McRow> rows;
  std::vector<McReplication> replications;  // sorted by (generation, draw, method)
};

// Each generation builds a new population; each draw samples sample_size
// rows without replacement and runs every method with an automatic sign.
McSummary run_monte_carlo(const DgpConfig& config, const std::vector<Method>& methods,
                          int threads = 1, const SearchOptions& search = {});

// Summary row over pooled estimates against beta_true.
McRow summarise(Method method, const std::vector<double>& estimates, int failed, double beta_true);

}  // namespace siv
