// Small data builders shared by the test files.
#pragma once

#include "siv/dgp.hpp"
#include "siv/model.hpp"

#include <cstdint>

namespace fixture {

// A whole population of size n drawn from the simulation process.
inline siv::Population population(std::uint64_t seed, std::size_t n,
                                  siv::EndogeneitySign sign = siv::EndogeneitySign::positive,
                                  bool exogenous = false, double het = 0.0) {
  siv::DgpConfig cfg;
  cfg.population_size = n;
  cfg.sample_size = n;
  cfg.seed = seed;
  cfg.sign = sign;
  cfg.exogenous = exogenous;
  cfg.heteroscedasticity = het;
  return siv::generate_population(cfg, 0);
}

inline siv::ModelSpec spec(siv::Method method = siv::Method::SIV) {
  siv::ModelSpec s;
  s.outcome = "y";
  s.endogenous = {"x"};
  s.controls = {"w"};
  s.method = method;
  return s;
}

}  // namespace fixture
