#include "fixtures.hpp"
#include "oracles.hpp"
#include "siv/error.hpp"
#include "siv/estimator.hpp"
#include "siv/regression.hpp"
#include "siv/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace siv;

namespace {

double ols_slope(const Dataset& d) {
  const Mat W = d.columns_mat({"w"});
  const Vec y = partial_out(W, d.column_vec("y"));
  const Vec x = partial_out(W, d.column_vec("x"));
  return x.dot(y) / x.dot(x);
}

// Two endogenous regressors sharing one skewed error.
Dataset two_regressor_data(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);
  Vec z1(n), z2(n), w(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    z1(k) = z(rng);
    z2(k) = z(rng);
    w(k) = 20.0 + std::sqrt(10.0) * z(rng);
    v(k) = jitter(rng) + sinh_arcsinh_inverse(z(rng), 5.0, 1.2);
  }
  v = (v.array() - v.mean()).matrix();
  v *= 1.0 / std::sqrt(variance(v));
  const Vec x1 = z1 + 0.5 * v;
  const Vec x2 = z2 + 0.5 * v;
  const Vec y = (1.0 + 2.0 * x1.array() - x2.array() + 0.5 * w.array() + v.array()).matrix();
  Dataset d;
  d.add_column("y", y);
  d.add_column("x1", x1);
  d.add_column("x2", x2);
  d.add_column("w", w);
  return d;
}

}  // namespace

TEST_CASE("2SLS with x as its own instrument is OLS") {
  const Population pop = fixture::population(3, 500);
  const Mat W = pop.data.columns_mat({"w"});
  const Vec x = pop.data.column_vec("x");
  const TwoSlsResult r = two_sls(pop.data.column_vec("y"), Mat(x), W, Mat(x));
  CHECK(r.coefficients(0) == doctest::Approx(ols_slope(pop.data)).epsilon(1e-12));
}

TEST_CASE("2SLS on five rows equals the covariance ratio") {
  const std::vector<double> y = {1.0, 3.0, 2.0, 5.0, 4.0};
  const std::vector<double> x = {0.5, 1.0, 2.5, 3.0, 2.0};
  const std::vector<double> z = {1.0, 0.0, 2.0, 3.0, 1.5};
  double mz = oracle::mean(z), mx = oracle::mean(x), my = oracle::mean(y), czy = 0, czx = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    czy += (z[i] - mz) * (y[i] - my);
    czx += (z[i] - mz) * (x[i] - mx);
  }
  const TwoSlsResult r = two_sls(oracle::to_vec(y), Mat(oracle::to_vec(x)), Mat(5, 0), Mat(oracle::to_vec(z)));
  CHECK(r.coefficients(0) == doctest::Approx(czy / czx).epsilon(1e-12));
  CHECK(r.dof == 3);
}

TEST_CASE("2SLS is linear in the outcome") {
  std::mt19937_64 rng(59);
  const Vec x = oracle::to_vec(oracle::random_vector(rng, 60));
  const Vec z = x + oracle::to_vec(oracle::random_vector(rng, 60));
  const Vec y1 = oracle::to_vec(oracle::random_vector(rng, 60));
  const Vec y2 = oracle::to_vec(oracle::random_vector(rng, 60));
  const Mat none(60, 0);
  const double b1 = two_sls(y1, Mat(x), none, Mat(z)).coefficients(0);
  const double b2 = two_sls(y2, Mat(x), none, Mat(z)).coefficients(0);
  const double b = two_sls(Vec(2.0 * y1 - 3.0 * y2), Mat(x), none, Mat(z)).coefficients(0);
  CHECK(b == doctest::Approx(2.0 * b1 - 3.0 * b2).epsilon(1e-10));
}

TEST_CASE("2SLS needs as many instruments as regressors") {
  try {
    two_sls(Vec::LinSpaced(10, 0, 1), Mat::Random(10, 2), Mat(10, 0), Mat::Random(10, 1));
    FAIL("expected UnderIdentified");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnderIdentified);
  }
}

TEST_CASE("Wu-Hausman is flagged degenerate when the instrument is x") {
  const Population pop = fixture::population(4, 300);
  const Vec x = pop.data.column_vec("x");
  const WuHausman wh = wu_hausman(pop.data.column_vec("y"), x, pop.data.columns_mat({"w"}), Mat(x));
  CHECK(wh.degenerate);
}

TEST_CASE("Wu-Hausman detects endogeneity with the latent instrument and stays quiet without it") {
  int detected = 0;
  int false_alarms = 0;
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const Population endo = fixture::population(seed, 1000);
    const Population exo = fixture::population(seed, 1000, EndogeneitySign::positive, true);
    detected += wu_hausman(endo.data, fixture::spec(), endo.instrument).p_value < 0.01;
    false_alarms += wu_hausman(exo.data, fixture::spec(), exo.instrument).p_value < 0.05;
  }
  CHECK(detected >= 18);
  CHECK(false_alarms <= 3);
}

TEST_CASE("SIV recovers the effect where OLS is biased") {
  const Population pop = fixture::population(7, 5000);
  const SivEstimate siv = estimate(pop.data, fixture::spec());
  const SivEstimate ols = estimate(pop.data, fixture::spec(Method::OLS));
  CHECK(siv.beta_hat > 1.8);
  CHECK(siv.beta_hat < 2.2);
  CHECK(ols.beta_hat == doctest::Approx(3.0).epsilon(0.05));
  CHECK(siv.k == -1);
  REQUIRE(siv.delta0.has_value());
  CHECK(*siv.delta0 > 0.0);
  CHECK(siv.ci_low < siv.beta_hat);
  CHECK(siv.ci_high > siv.beta_hat);
  CHECK(siv.n_used == 5000);
}

TEST_CASE("SIV lands closer to the truth than OLS in nearly every draw") {
  int closer = 0;
  for (std::uint64_t seed = 200; seed < 220; ++seed) {
    const Population pop = fixture::population(seed, 1000);
    try {
      const double b = estimate(pop.data, fixture::spec()).beta_hat;
      closer += std::abs(b - 2.0) < std::abs(ols_slope(pop.data) - 2.0);
    } catch (const Error&) {
    }
  }
  CHECK(closer >= 18);
}

TEST_CASE("estimate reports missing endogeneity instead of returning OLS") {
  int checked = 0;
  for (std::uint64_t seed = 50; seed < 60; ++seed) {
    const Population pop = fixture::population(seed, 1000, EndogeneitySign::positive, true);
    const SivContext ctx = build_context(pop.data, fixture::spec());
    if (determine_sign(ctx, {}).verdict != SignVerdict::no_endogeneity) continue;
    ++checked;
    try {
      estimate(pop.data, fixture::spec());
      FAIL("expected NoEndogeneityDetected");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NoEndogeneityDetected);
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("the synthetic instrument at delta zero reproduces OLS") {
  const Population pop = fixture::population(8, 800);
  const SivContext ctx = build_context(pop.data, fixture::spec());
  const Vec s = candidate(ctx, -1, 0.0);
  const double b = two_sls(ctx.y, Mat(ctx.x), Mat(ctx.n, 0), Mat(s)).coefficients(0);
  CHECK(b * ctx.sd_y / ctx.sd_x == doctest::Approx(ols_slope(pop.data)).epsilon(1e-10));
}

TEST_CASE("estimates rescale with the units of y and x") {
  const Population pop = fixture::population(9, 2000);
  Dataset scaled;
  scaled.add_column("y", Vec(3.0 * pop.data.column_vec("y")));
  scaled.add_column("x", Vec((2.0 * pop.data.column_vec("x")).array() + 5.0));
  scaled.add_column("w", Vec(-0.5 * pop.data.column_vec("w")));
  for (Method m : {Method::SIV, Method::RSIV_p, Method::RSIV_n, Method::OLS}) {
    const SivEstimate a = estimate(pop.data, fixture::spec(m));
    const SivEstimate b = estimate(scaled, fixture::spec(m));
    CHECK(b.beta_hat == doctest::Approx(1.5 * a.beta_hat).epsilon(1e-9));
    if (a.delta0) CHECK(*b.delta0 == doctest::Approx(*a.delta0).epsilon(1e-9));
  }
}

TEST_CASE("estimate_methods matches separate estimate calls") {
  const Population pop = fixture::population(10, 1500);
  const std::vector<Method> methods = {Method::OLS, Method::SIV, Method::RSIV_p, Method::RSIV_n};
  const auto outcomes = estimate_methods(pop.data, fixture::spec(), methods);
  REQUIRE(outcomes.size() == methods.size());
  for (std::size_t i = 0; i < methods.size(); ++i) {
    REQUIRE(outcomes[i].estimate.has_value());
    CHECK(outcomes[i].estimate->beta_hat == estimate(pop.data, fixture::spec(methods[i])).beta_hat);
  }
}

TEST_CASE("bootstrap is reproducible across runs and thread counts") {
  const Population pop = fixture::population(11, 600);
  const BootstrapResult a = bootstrap(pop.data, fixture::spec(), 20, 5, 1);
  const BootstrapResult b = bootstrap(pop.data, fixture::spec(), 20, 5, 1);
  const BootstrapResult c = bootstrap(pop.data, fixture::spec(), 20, 5, 4);
  CHECK(a.estimates == b.estimates);
  CHECK(a.estimates == c.estimates);
  CHECK(a.replication == c.replication);
  CHECK(a.se == c.se);
  CHECK(a.ci_low <= a.ci_high);
  CHECK(static_cast<int>(a.estimates.size()) + a.failures == 20);
}

TEST_CASE("each bootstrap replication can be rebuilt from its own stream") {
  const Population pop = fixture::population(12, 500);
  const BootstrapResult boot = bootstrap(pop.data, fixture::spec(), 6, 77, 1);
  REQUIRE_FALSE(boot.replication.empty());
  ModelSpec fixed = fixture::spec();
  fixed.sign = boot.sign_used;
  for (std::size_t i = 0; i < boot.replication.size(); ++i) {
    Rng rng = make_stream(77, static_cast<std::uint64_t>(boot.replication[i]));
    const Dataset sample = pop.data.select_rows(sample_with_replacement(rng, 500, 500));
    CHECK(estimate(sample, fixed).beta_hat == boot.estimates[i]);
  }
}

TEST_CASE("bootstrap summary statistics follow from the replications") {
  const Population pop = fixture::population(13, 500);
  const BootstrapResult boot = bootstrap(pop.data, fixture::spec(), 30, 3, 1);
  const double m = static_cast<double>(boot.estimates.size());
  double mean = 0.0, ss = 0.0;
  for (double e : boot.estimates) mean += e / m;
  for (double e : boot.estimates) ss += (e - mean) * (e - mean);
  CHECK(boot.mean_beta == doctest::Approx(mean).epsilon(1e-12));
  CHECK(boot.se == doctest::Approx(std::sqrt(ss / (m - 1))).epsilon(1e-12));
  std::vector<double> sorted = boot.estimates;
  std::sort(sorted.begin(), sorted.end());
  CHECK(boot.ci_low >= sorted.front());
  CHECK(boot.ci_high <= sorted.back());
  const double full = estimate(pop.data, fixture::spec()).beta_hat;
  CHECK(boot.ci_low <= full);
  CHECK(full <= boot.ci_high);
}

TEST_CASE("type-7 percentile on a small sample") {
  CHECK(percentile({4, 1, 3, 2}, 0.5) == doctest::Approx(2.5));
  CHECK(percentile({4, 1, 3, 2}, 0.0) == 1.0);
  CHECK(percentile({4, 1, 3, 2}, 1.0) == 4.0);
  CHECK(percentile({10, 20}, 0.25) == doctest::Approx(12.5));
}

TEST_CASE("multiple regressors: duplicated columns are rank deficient") {
  Dataset d = fixture::population(14, 500).data;
  d.add_column("x_copy", d.column_vec("x"));
  ModelSpec spec = fixture::spec();
  spec.endogenous = {"x", "x_copy"};
  try {
    multi_endogenous_estimate(d, spec);
    FAIL("expected RankDeficient");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RankDeficient);
  }
}

TEST_CASE("multiple regressors with one column equals the single-regressor estimate") {
  const Population pop = fixture::population(15, 1500);
  const auto multi = multi_endogenous_estimate(pop.data, fixture::spec());
  REQUIRE(multi.size() == 1);
  CHECK(multi[0].beta_hat == doctest::Approx(estimate(pop.data, fixture::spec()).beta_hat).epsilon(1e-10));
}

TEST_CASE("two endogenous regressors are recovered jointly") {
  ModelSpec spec = fixture::spec();
  spec.endogenous = {"x1", "x2"};
  int good = 0;
  for (std::uint64_t seed = 300; seed < 310; ++seed) {
    try {
      const auto est = multi_endogenous_estimate(two_regressor_data(seed, 2000), spec);
      good += std::abs(est[0].beta_hat - 2.0) < 0.25 && std::abs(est[1].beta_hat + 1.0) < 0.25;
    } catch (const Error&) {
    }
  }
  CHECK(good >= 8);
}
