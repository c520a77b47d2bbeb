#pragma once

// Synthetic data with known confounding and a known true exposure-response
// curve. Six covariates drive both exposure and outcome, so the naive
// regression slope is biased by a closed-form amount while the true causal
// slope stays 0.5 — the backbone every end-to-end check measures against.

#include <cstdint>
#include <string>

#include "gpsinfer/dataset.hpp"

namespace gpsinfer {

enum class ErfShape { linear, curved };

const char* erf_shape_name(ErfShape s);
ErfShape parse_erf_shape(const std::string& s);  // invalid_argument

struct SimConfig {
  std::size_t n = 1000;      // >= 10
  ErfShape erf_shape = ErfShape::linear;
  bool heteroskedastic = false;
  std::uint64_t seed = 0;
};

// Closed-form population quantities implied by the generator coefficients.
struct SimTruth {
  ErfShape erf_shape = ErfShape::linear;
  bool heteroskedastic = false;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double var_exposure = 0.0;       // population Var(E)
  double confounding_cov = 0.0;    // population Cov(E, confounded part of Y)
  double naive_slope = 0.0;        // population OLS slope of Y on E: 0.5 + bias
  double causal_slope = 0.5;       // coefficient on E in the outcome model
};

struct SimResult {
  Dataset data;   // covariates c1..c6, exposure, outcome; ids 0..n-1
  SimTruth truth;
};

// Deterministic for a fixed config: a single PRNG stream drawn row by row in a
// fixed order. Exposure E = 0.8 c1 + 0.4 c2 - 0.6 c3 + 0.3 c4 + 0.5 c5 +
// 0.4 c6 + eta with eta ~ N(0,1), or N(0, (0.5 + 0.25|c1|)^2) when
// heteroskedastic. Outcome Y = 1 + 0.5 E [+ 0.1 E^2 when curved] + 0.3 c1 +
// 0.3 c2 + 0.2 c3 - 0.2 c4 + 0.2 c5 - 0.1 c6 + N(0,1).
SimResult simulate_dataset(const SimConfig& cfg);

// True average exposure-response: 1 + 0.5 e, plus 0.1 e^2 when curved.
double true_erf(ErfShape shape, double e);

// JSON descriptor written next to the simulated CSV.
std::string truth_to_json(const SimTruth& truth);

}  // namespace gpsinfer
