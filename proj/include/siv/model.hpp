// Configuration shared by the search, robust and estimator modules.
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace siv {

enum class Method { OLS, SIV, RSIV_p, RSIV_n, ExternalIV };

// Sign of cov(x, u). "positive" selects k = -1, "negative" selects k = +1.
enum class SignPolicy { automatic, positive, negative };

enum class CriterionKind { dt_moment, robust_parametric, robust_nonparametric };

// Which parametric locus the RSIV-p method minimises.
//   trace:      mean over rows of (fitted variance / mean(e^2) - 1)^2
//   difference: |P[chi2(1) < X^2] - P[chi2(1) < X_g^2]|
//   ratio:      P[chi2(1) < X^2] / P[chi2(1) < X_g^2]
enum class ParametricForm { trace, difference, ratio };

struct GridConfig {
  double delta_min = 1e-3;
  double min_corr = 0.10;  // lower bound c on corr(s, x)
  int n_points = 200;
  int refine_rounds = 30;
};

struct SearchOptions {
  GridConfig grid;
  // Crossings of the DT moment only count between grid points whose
  // |moment / std error| exceeds this value; 0 accepts every raw crossing.
  double significance_z = 1.959963984540054;
  ParametricForm parametric_form = ParametricForm::trace;
  int threads = 1;
};

struct ModelSpec {
  std::string outcome;
  std::vector<std::string> endogenous;
  std::vector<std::string> controls;
  Method method = Method::SIV;
  SignPolicy sign = SignPolicy::automatic;
  SearchOptions search;
  // Only used by Method::ExternalIV.
  std::vector<std::string> external_instruments;
};

std::string_view method_name(Method m) noexcept;
std::optional<Method> parse_method(std::string_view s) noexcept;
std::string_view criterion_name(CriterionKind c) noexcept;
std::optional<CriterionKind> parse_criterion(std::string_view s) noexcept;
std::optional<SignPolicy> parse_sign_policy(std::string_view s) noexcept;
std::optional<ParametricForm> parse_parametric_form(std::string_view s) noexcept;

}  // namespace siv
