#include "siv/dgp.hpp"

#include "siv/error.hpp"
#include "siv/parallel.hpp"
#include "siv/regression.hpp"
#include "siv/rng.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace siv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vec uniform_draws(Rng& rng, std::size_t n, double lo, double hi) {
  boost::random::uniform_real_distribution<double> dist(lo, hi);
  Vec out(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = dist(rng);
  return out;
}

Vec normal_draws(Rng& rng, std::size_t n, double mu, double sd) {
  boost::random::normal_distribution<double> dist(mu, sd);
  Vec out(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = dist(rng);
  return out;
}

Vec nu_sequence(const DgpConfig& c) {
  const auto N = static_cast<Eigen::Index>(c.population_size);
  return Vec::LinSpaced(N, c.nu_low, c.nu_high);
}

double sd_of(const Vec& v) { return std::sqrt(variance(v)); }

// Uniform(-0.5, 0.5) plus a sinh-arcsinh draw with the configured skew.
Vec skewed_component(Rng& rng, const DgpConfig& c) {
  const Vec base = uniform_draws(rng, c.population_size, -0.5, 0.5);
  Vec skew = normal_draws(rng, c.population_size, 0.0, 1.0);
  for (Eigen::Index i = 0; i < skew.size(); ++i) {
    skew(i) = sinh_arcsinh_inverse(skew(i), c.skew_epsilon, c.skew_kappa);
  }
  return base + skew;
}

Population latent_population(const DgpConfig& c, Rng& rng) {
  Vec z = 7.0 * sinh_arcsinh(nu_sequence(c), 0.0, 0.5) +
          1.1 * uniform_draws(rng, c.population_size, -1.01, 1.01);
  z.array() -= z.mean();
  const Vec w = normal_draws(rng, c.population_size, 20.0, 10.0);
  const Vec u1 = skewed_component(rng, c);

  Mat controls(z.size(), 2);
  controls.col(0) = z;
  controls.col(1) = w;
  Vec v = partial_out(controls, u1);
  const double sd_z = sd_of(z);
  if (c.heteroscedasticity > 0.0) {
    v.array() *= 1.0 + c.heteroscedasticity * z.array().abs() / sd_z;
  }
  v.array() -= v.mean();
  v *= 2.0 * c.target_bias * sd_z / sd_of(v);

  // With sd(v) = 2 b sd(z) and lambda = 1 / (2 b), cov(x, v) / var(x) = b.
  const double lambda = c.exogenous ? 0.0 : 1.0 / (2.0 * c.target_bias);
  const double sign = c.sign == EndogeneitySign::positive ? 1.0 : -1.0;
  Population pop;
  const Vec x = z + lambda * v;
  pop.u = sign * v;
  pop.v = v;
  pop.instrument = z;
  const Vec y = (1.0 + (2.0 * x + 0.5 * w + pop.u).array()).matrix();
  pop.data.add_column("y", y);
  pop.data.add_column("x", x);
  pop.data.add_column("w", w);
  return pop;
}

Population literal_population(const DgpConfig& c, Rng& rng) {
  const Vec x = 7.0 * sinh_arcsinh(nu_sequence(c), 0.0, 0.5) +
                1.1 * uniform_draws(rng, c.population_size, -1.01, 1.01);
  const Vec w = normal_draws(rng, c.population_size, 20.0, 10.0);
  const Vec noise = normal_draws(rng, c.population_size, 0.0, sd_of(x));
  const Vec e = (x.array() - x.mean()).matrix() + noise;
  const Vec u1 = skewed_component(rng, c);
  Mat controls(x.size(), 2);
  controls.col(0) = x;
  controls.col(1) = w;
  const Vec v = partial_out(controls, u1) * (x.mean() / 2.0);
  const double sign = c.sign == EndogeneitySign::positive ? 1.0 : -1.0;
  Population pop;
  pop.u = c.exogenous ? v : Vec(sign * e + v);
  pop.v = v;
  const Vec y = (1.0 + (2.0 * x + 0.5 * w + pop.u).array()).matrix();
  pop.data.add_column("y", y);
  pop.data.add_column("x", x);
  pop.data.add_column("w", w);
  return pop;
}

}  // namespace

double sinh_arcsinh(double x, double epsilon, double kappa) {
  return std::sinh(kappa * std::asinh(x) - epsilon);
}

Vec sinh_arcsinh(const Vec& x, double epsilon, double kappa) {
  Vec out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = sinh_arcsinh(x(i), epsilon, kappa);
  return out;
}

double sinh_arcsinh_inverse(double z, double epsilon, double kappa) {
  return std::sinh((std::asinh(z) + epsilon) / kappa);
}

Population generate_population(const DgpConfig& config, int generation) {
  if (config.population_size < 10 || !(config.skew_kappa > 0.0) || !(config.target_bias > 0.0)) {
    throw Error(ErrorKind::InvalidInput, "invalid population configuration");
  }
  Rng rng = make_stream(config.seed, static_cast<std::uint64_t>(generation), 0);
  return config.construction == DgpConstruction::latent ? latent_population(config, rng)
                                                        : literal_population(config, rng);
}

McRow summarise(Method method, const std::vector<double>& estimates, int failed, double beta_true) {
  McRow row;
  row.method = method;
  row.n_success = static_cast<int>(estimates.size());
  row.n_failed = failed;
  if (estimates.empty()) {
    row.mean_beta = row.std_error = row.ci_low = row.ci_high = row.bias = row.rmse = kNaN;
    return row;
  }
  const double m = static_cast<double>(estimates.size());
  double sum = 0.0;
  for (double e : estimates) sum += e;
  row.mean_beta = sum / m;
  double ss = 0.0;
  double sq_err = 0.0;
  for (double e : estimates) {
    ss += (e - row.mean_beta) * (e - row.mean_beta);
    sq_err += (e - beta_true) * (e - beta_true);
  }
  row.std_error = std::sqrt(ss / m);
  row.bias = row.mean_beta - beta_true;
  row.rmse = std::sqrt(sq_err / m);
  row.ci_low = percentile(estimates, 0.025);
  row.ci_high = percentile(estimates, 0.975);
  return row;
}

McSummary run_monte_carlo(const DgpConfig& config, const std::vector<Method>& methods, int threads,
                          const SearchOptions& search) {
  if (config.sample_size < 1 || config.sample_size > config.population_size ||
      config.n_generations < 1 || config.n_draws < 1) {
    throw Error(ErrorKind::InvalidInput, "invalid Monte Carlo configuration");
  }
  McSummary out;
  out.config = config;
  const std::size_t G = static_cast<std::size_t>(config.n_generations);
  const std::size_t D = static_cast<std::size_t>(config.n_draws);
  const std::size_t M = methods.size();
  out.replications.resize(G * D * M);

  ModelSpec spec;
  spec.outcome = "y";
  spec.endogenous = {"x"};
  spec.controls = {"w"};
  spec.sign = SignPolicy::automatic;
  spec.search = search;
  spec.search.threads = 1;

  parallel_for(G, threads, [&](std::size_t g) {
    const Population pop = generate_population(config, static_cast<int>(g));
    for (std::size_t d = 0; d < D; ++d) {
      Rng rng = make_stream(config.seed, g, d + 1);
      const Dataset sample = pop.data.select_rows(
          sample_without_replacement(rng, config.population_size, config.sample_size));
      const std::vector<MethodOutcome> res = estimate_methods(sample, spec, methods);
      for (std::size_t m = 0; m < M; ++m) {
        McReplication& rep = out.replications[(g * D + d) * M + m];
        rep.generation = static_cast<int>(g);
        rep.draw = static_cast<int>(d);
        rep.method = methods[m];
        if (res[m].estimate) {
          rep.beta = res[m].estimate->beta_hat;
          rep.delta0 = res[m].estimate->delta0;
          rep.k = res[m].estimate->k;
        } else {
          rep.error = std::string(error_name(*res[m].error));
        }
      }
    }
  });

  for (std::size_t m = 0; m < M; ++m) {
    std::vector<double> est;
    int failed = 0;
    for (std::size_t i = m; i < out.replications.size(); i += M) {
      if (out.replications[i].beta) {
        est.push_back(*out.replications[i].beta);
      } else {
        ++failed;
      }
    }
    out.rows.push_back(summarise(methods[m], est, failed, 2.0));
  }
  return out;
}

}  // namespace siv
