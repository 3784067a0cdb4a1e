#include "siv/model.hpp"

namespace siv {

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::OLS: return "OLS";
    case Method::SIV: return "SIV";
    case Method::RSIV_p: return "RSIV_p";
    case Method::RSIV_n: return "RSIV_n";
    case Method::ExternalIV: return "ExternalIV";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view s) noexcept {
  for (Method m : {Method::OLS, Method::SIV, Method::RSIV_p, Method::RSIV_n, Method::ExternalIV}) {
    if (s == method_name(m)) return m;
  }
  if (s == "RSIV-p") return Method::RSIV_p;
  if (s == "RSIV-n") return Method::RSIV_n;
  return std::nullopt;
}

std::string_view criterion_name(CriterionKind c) noexcept {
  switch (c) {
    case CriterionKind::dt_moment: return "dt_moment";
    case CriterionKind::robust_parametric: return "robust_parametric";
    case CriterionKind::robust_nonparametric: return "robust_nonparametric";
  }
  return "unknown";
}

std::optional<CriterionKind> parse_criterion(std::string_view s) noexcept {
  for (CriterionKind c : {CriterionKind::dt_moment, CriterionKind::robust_parametric,
                          CriterionKind::robust_nonparametric}) {
    if (s == criterion_name(c)) return c;
  }
  return std::nullopt;
}

std::optional<SignPolicy> parse_sign_policy(std::string_view s) noexcept {
  if (s == "auto") return SignPolicy::automatic;
  if (s == "positive") return SignPolicy::positive;
  if (s == "negative") return SignPolicy::negative;
  return std::nullopt;
}

std::optional<ParametricForm> parse_parametric_form(std::string_view s) noexcept {
  if (s == "trace") return ParametricForm::trace;
  if (s == "difference") return ParametricForm::difference;
  if (s == "ratio") return ParametricForm::ratio;
  return std::nullopt;
}

}  // namespace siv
