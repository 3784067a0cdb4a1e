#include "fixtures.hpp"
#include "siv/dgp.hpp"
#include "siv/regression.hpp"
#include "siv/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace siv;

namespace {

double ols_slope(const Dataset& d) {
  const Mat W = d.columns_mat({"w"});
  const Vec y = partial_out(W, d.column_vec("y"));
  const Vec x = partial_out(W, d.column_vec("x"));
  return x.dot(y) / x.dot(x);
}

}  // namespace

TEST_CASE("sinh-arcsinh map and its inverse undo each other") {
  for (double x : {-30.0, -2.0, -0.3, 0.0, 0.7, 4.0, 55.0}) {
    for (double eps : {-1.0, 0.0, 5.0}) {
      for (double kap : {0.5, 1.0, 1.2}) {
        CHECK(sinh_arcsinh_inverse(sinh_arcsinh(x, eps, kap), eps, kap) ==
              doctest::Approx(x).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("sinh-arcsinh values") {
  const long double ref = std::sinh(0.5L * std::asinh(1.0L));
  CHECK(sinh_arcsinh(1.0, 0.0, 0.5) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-15));
  for (double x : {-3.0, 0.0, 2.5}) CHECK(sinh_arcsinh(x, 0.0, 1.0) == doctest::Approx(x).epsilon(1e-15));
  const Vec v = sinh_arcsinh(Vec::LinSpaced(5, -2, 2), 0.0, 0.5);
  CHECK(v(4) == doctest::Approx(std::sinh(0.5 * std::asinh(2.0))).epsilon(1e-15));
}

TEST_CASE("population columns, true effect and the sign of endogeneity") {
  const Population pos = fixture::population(1, 20000, EndogeneitySign::positive);
  const Population neg = fixture::population(1, 20000, EndogeneitySign::negative);
  CHECK(pos.data.names() == std::vector<std::string>{"y", "x", "w"});
  CHECK(pos.data.n_rows() == 20000);
  CHECK(pos.beta_true == 2.0);
  const Vec xp = pos.data.column_vec("x");
  const Vec xn = neg.data.column_vec("x");
  CHECK(correlation(xp, pos.u) > 0.3);
  CHECK(correlation(xn, neg.u) < -0.3);
  CHECK(ols_slope(pos.data) == doctest::Approx(3.0).epsilon(0.03));
  CHECK(ols_slope(neg.data) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(ols_slope(pos.data) - 2.0 == doctest::Approx(2.0 - ols_slope(neg.data)).epsilon(1e-9));
}

TEST_CASE("the skewed error is unrelated to the instrument and the control") {
  for (double het : {0.0, 1.0}) {
    const Population p = fixture::population(2, 20000, EndogeneitySign::positive, false, het);
    CHECK(std::abs(correlation(p.v, p.instrument)) < 0.02);
    CHECK(std::abs(correlation(p.v, p.data.column_vec("w"))) < 0.02);
  }
}

TEST_CASE("exogenous populations have no OLS bias") {
  const Population p = fixture::population(3, 20000, EndogeneitySign::positive, true);
  CHECK(std::abs(correlation(p.data.column_vec("x"), p.u)) < 0.02);
  CHECK(ols_slope(p.data) == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("populations are deterministic in seed and generation") {
  DgpConfig cfg;
  cfg.population_size = 3000;
  const Population a = generate_population(cfg, 2);
  const Population b = generate_population(cfg, 2);
  const Population c = generate_population(cfg, 3);
  CHECK(a.data.column("y") == b.data.column("y"));
  CHECK(a.data.column("x") == b.data.column("x"));
  CHECK(a.data.column("y") != c.data.column("y"));
}

TEST_CASE("summary row of a single estimate") {
  const McRow r = summarise(Method::OLS, {2.5}, 1, 2.0);
  CHECK(r.mean_beta == 2.5);
  CHECK(r.bias == doctest::Approx(0.5));
  CHECK(r.rmse == doctest::Approx(0.5));
  CHECK(r.std_error == 0.0);
  CHECK(r.n_success == 1);
  CHECK(r.n_failed == 1);
}

TEST_CASE("summary rows satisfy rmse^2 = bias^2 + sd^2") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(2.1, 0.3);
  std::vector<double> est(37);
  for (auto& e : est) e = z(rng);
  const McRow r = summarise(Method::SIV, est, 0, 2.0);
  CHECK(r.rmse * r.rmse == doctest::Approx(r.bias * r.bias + r.std_error * r.std_error).epsilon(1e-10));
  CHECK(r.ci_low < r.mean_beta);
  CHECK(r.ci_high > r.mean_beta);
}

TEST_CASE("Monte Carlo runs are reproducible and independent of thread count") {
  DgpConfig cfg;
  cfg.population_size = 3000;
  cfg.sample_size = 400;
  cfg.n_generations = 3;
  cfg.n_draws = 2;
  cfg.seed = 99;
  const std::vector<Method> methods = {Method::OLS, Method::SIV};
  const McSummary a = run_monte_carlo(cfg, methods, 1);
  const McSummary b = run_monte_carlo(cfg, methods, 3);
  REQUIRE(a.rows.size() == 2);
  REQUIRE(a.replications.size() == 12);
  for (std::size_t i = 0; i < a.replications.size(); ++i) {
    CHECK(a.replications[i].beta == b.replications[i].beta);
    CHECK(a.replications[i].generation == b.replications[i].generation);
  }
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].mean_beta == b.rows[i].mean_beta);
    CHECK(a.rows[i].n_success + a.rows[i].n_failed == 6);
    CHECK(a.rows[i].rmse * a.rows[i].rmse ==
          doctest::Approx(a.rows[i].bias * a.rows[i].bias + a.rows[i].std_error * a.rows[i].std_error).epsilon(1e-10));
  }
  for (std::size_t i = 1; i < a.replications.size(); ++i) {
    const auto& p = a.replications[i - 1];
    const auto& q = a.replications[i];
    CHECK(std::make_tuple(p.generation, p.draw, static_cast<int>(p.method)) <
          std::make_tuple(q.generation, q.draw, static_cast<int>(q.method)));
  }
  CHECK(a.rows[0].mean_beta > 2.5);  // OLS bias survives subsampling
}

TEST_CASE("sampling without replacement yields distinct indices in range") {
  Rng rng = make_stream(1, 2, 3);
  const auto idx = sample_without_replacement(rng, 50, 20);
  CHECK(idx.size() == 20);
  CHECK(std::set<std::size_t>(idx.begin(), idx.end()).size() == 20);
  for (auto i : idx) CHECK(i < 50);
  Rng again = make_stream(1, 2, 3);
  CHECK(sample_without_replacement(again, 50, 20) == idx);
  CHECK(stream_seed(1, 2, 3) != stream_seed(1, 3, 2));
}
