#include "gpsinfer/simulate.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace gpsinfer {

namespace {

// Exposure model coefficients on c1..c6.
constexpr double kExpoCoef[6] = {0.8, 0.4, -0.6, 0.3, 0.5, 0.4};
// Outcome model coefficients on c1..c6 (the confounded part).
constexpr double kOutCoef[6] = {0.3, 0.3, 0.2, -0.2, 0.2, -0.1};
// Population variances of c1..c6.
constexpr double kCovVar[6] = {1.0, 1.0, 1.0, 1.0, 0.25, 1.0 / 3.0};

double exposure_noise_variance(bool heteroskedastic) {
  if (!heteroskedastic) return 1.0;
  // eta ~ N(0, (0.5 + 0.25|c1|)^2) with c1 standard normal:
  // E[(0.5 + 0.25|c1|)^2] = 0.25 + 0.25 E|c1| + 0.0625 E[c1^2].
  const double mean_abs_normal = std::sqrt(2.0 / std::acos(-1.0));
  return 0.25 + 0.25 * mean_abs_normal + 0.0625;
}

}  // namespace

const char* erf_shape_name(ErfShape s) {
  return s == ErfShape::linear ? "linear" : "curved";
}

ErfShape parse_erf_shape(const std::string& s) {
  if (s == "linear") return ErfShape::linear;
  if (s == "curved") return ErfShape::curved;
  throw std::invalid_argument("unknown erf shape '" + s + "' (expected linear or curved)");
}

double true_erf(ErfShape shape, double e) {
  double v = 1.0 + 0.5 * e;
  if (shape == ErfShape::curved) v += 0.1 * e * e;
  return v;
}

SimResult simulate_dataset(const SimConfig& cfg) {
  if (cfg.n < 10) throw std::invalid_argument("simulation needs n >= 10");

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> std_normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> symmetric(-1.0, 1.0);

  std::vector<ObservationId> ids(cfg.n);
  std::vector<double> exposure(cfg.n), outcome(cfg.n);
  std::vector<CovariateColumn> covs(6);
  for (int j = 0; j < 6; ++j) {
    covs[j].name = "c" + std::to_string(j + 1);
    covs[j].kind = CovariateKind::numeric;
    covs[j].numeric.resize(cfg.n);
  }

  for (std::size_t i = 0; i < cfg.n; ++i) {
    ids[i] = ObservationId{static_cast<std::int64_t>(i)};
    double c[6];
    c[0] = std_normal(rng);
    c[1] = std_normal(rng);
    c[2] = std_normal(rng);
    c[3] = std_normal(rng);
    c[4] = unit(rng) < 0.5 ? -0.5 : 0.5;
    c[5] = symmetric(rng);
    double eta = std_normal(rng);
    if (cfg.heteroskedastic) eta *= 0.5 + 0.25 * std::abs(c[0]);
    double e = eta;
    for (int j = 0; j < 6; ++j) e += kExpoCoef[j] * c[j];
    double y = true_erf(cfg.erf_shape, e) + std_normal(rng);
    for (int j = 0; j < 6; ++j) y += kOutCoef[j] * c[j];
    exposure[i] = e;
    outcome[i] = y;
    for (int j = 0; j < 6; ++j) covs[j].numeric[i] = c[j];
  }

  SimResult result{Dataset(std::move(ids), std::move(exposure), std::move(covs),
                           std::move(outcome)),
                   SimTruth{}};
  result.truth.erf_shape = cfg.erf_shape;
  result.truth.heteroskedastic = cfg.heteroskedastic;
  result.truth.n = cfg.n;
  result.truth.seed = cfg.seed;
  double var_e = exposure_noise_variance(cfg.heteroskedastic);
  double cov_conf = 0.0;
  for (int j = 0; j < 6; ++j) {
    var_e += kExpoCoef[j] * kExpoCoef[j] * kCovVar[j];
    cov_conf += kExpoCoef[j] * kOutCoef[j] * kCovVar[j];
  }
  result.truth.var_exposure = var_e;
  result.truth.confounding_cov = cov_conf;
  // E is symmetric about 0, so the curved shape's E^2 term adds nothing to
  // Cov(Y, E) and the naive slope is the same closed form for both shapes.
  result.truth.naive_slope = 0.5 + cov_conf / var_e;
  return result;
}

std::string truth_to_json(const SimTruth& truth) {
  nlohmann::json j;
  j["erf_shape"] = erf_shape_name(truth.erf_shape);
  j["heteroskedastic"] = truth.heteroskedastic;
  j["n"] = truth.n;
  j["seed"] = truth.seed;
  j["var_exposure"] = truth.var_exposure;
  j["confounding_cov"] = truth.confounding_cov;
  j["naive_slope"] = truth.naive_slope;
  j["causal_slope"] = truth.causal_slope;
  nlohmann::json coef;
  for (int k = 0; k < 6; ++k) coef["c" + std::to_string(k + 1)] = kExpoCoef[k];
  j["exposure_coefficients"] = coef;
  nlohmann::json out;
  out["intercept"] = 1.0;
  out["exposure"] = 0.5;
  out["exposure_sq"] = truth.erf_shape == ErfShape::curved ? 0.1 : 0.0;
  for (int k = 0; k < 6; ++k) out["c" + std::to_string(k + 1)] = kOutCoef[k];
  j["outcome_coefficients"] = out;
  return j.dump(2) + "\n";
}

}  // namespace gpsinfer
