// Tests for the synthetic-data generator: deterministic stream layout, the
// documented exposure/outcome formulas, closed-form population truths checked
// against large-sample moments, and the truth JSON descriptor.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "gpsinfer/dataset.hpp"
#include "gpsinfer/simulate.hpp"
#include "test_support.hpp"

using namespace gpsinfer;

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double var_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

double cov_of(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean_of(a), mb = mean_of(b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<double>(a.size());
}

// Independently written closed forms from the documented generator model.
constexpr double kSumExpoVar =
    0.8 * 0.8 + 0.4 * 0.4 + 0.6 * 0.6 + 0.3 * 0.3 + 0.5 * 0.5 * 0.25 + 0.4 * 0.4 / 3.0;
constexpr double kCovConf = 0.8 * 0.3 + 0.4 * 0.3 - 0.6 * 0.2 - 0.3 * 0.2 +
                            0.5 * 0.2 * 0.25 - 0.4 * 0.1 / 3.0;

}  // namespace

TEST_SUITE("simulate") {

TEST_CASE("shape names print and parse") {
  CHECK(std::string(erf_shape_name(ErfShape::linear)) == "linear");
  CHECK(std::string(erf_shape_name(ErfShape::curved)) == "curved");
  CHECK(parse_erf_shape("linear") == ErfShape::linear);
  CHECK(parse_erf_shape("curved") == ErfShape::curved);
  CHECK_THROWS_WITH_AS(parse_erf_shape("wavy"), doctest::Contains("unknown erf shape"),
                       std::invalid_argument);
}

TEST_CASE("the true curve is linear or quadratic in the exposure") {
  CHECK(true_erf(ErfShape::linear, 0.0) == 1.0);
  CHECK(true_erf(ErfShape::linear, 2.0) == 2.0);
  CHECK(true_erf(ErfShape::linear, -4.0) == -1.0);
  CHECK(true_erf(ErfShape::curved, 0.0) == 1.0);
  CHECK(true_erf(ErfShape::curved, 2.0) == doctest::Approx(2.4).epsilon(1e-12));
  CHECK(true_erf(ErfShape::curved, -2.0) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("generation is deterministic per seed and differs across seeds") {
  SimConfig cfg;
  cfg.n = 200;
  cfg.seed = 31;
  const SimResult a = simulate_dataset(cfg);
  const SimResult b = simulate_dataset(cfg);
  REQUIRE(a.data.n_rows() == 200);
  for (std::size_t i = 0; i < 200; ++i) {
    CHECK(a.data.ids()[i].value == static_cast<std::int64_t>(i));
    CHECK(a.data.exposure()[i] == b.data.exposure()[i]);
    CHECK(a.data.outcome()[i] == b.data.outcome()[i]);
  }
  for (int j = 1; j <= 6; ++j) {
    const std::string name = "c" + std::to_string(j);
    CHECK(a.data.covariate(name).kind == CovariateKind::numeric);
    CHECK(a.data.covariate(name).numeric == b.data.covariate(name).numeric);
  }

  cfg.seed = 32;
  const SimResult c = simulate_dataset(cfg);
  bool any_diff = false;
  for (std::size_t i = 0; i < 200 && !any_diff; ++i)
    any_diff = c.data.exposure()[i] != a.data.exposure()[i];
  CHECK(any_diff);
}

TEST_CASE("rows follow the documented single-stream draw order and formulas") {
  SimConfig cfg;
  cfg.n = 10;
  cfg.seed = 99;
  const SimResult sim = simulate_dataset(cfg);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> std_normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> symmetric(-1.0, 1.0);
  const double expo_coef[6] = {0.8, 0.4, -0.6, 0.3, 0.5, 0.4};
  const double out_coef[6] = {0.3, 0.3, 0.2, -0.2, 0.2, -0.1};

  for (std::size_t i = 0; i < cfg.n; ++i) {
    double c[6];
    c[0] = std_normal(rng);
    c[1] = std_normal(rng);
    c[2] = std_normal(rng);
    c[3] = std_normal(rng);
    c[4] = unit(rng) < 0.5 ? -0.5 : 0.5;
    c[5] = symmetric(rng);
    const double eta = std_normal(rng);
    double e = eta;
    for (int j = 0; j < 6; ++j) e += expo_coef[j] * c[j];
    double y = true_erf(cfg.erf_shape, e) + std_normal(rng);
    for (int j = 0; j < 6; ++j) y += out_coef[j] * c[j];

    for (int j = 0; j < 6; ++j) {
      CHECK(sim.data.covariate("c" + std::to_string(j + 1)).numeric[i] == c[j]);
    }
    CHECK(sim.data.exposure()[i] == e);
    CHECK(sim.data.outcome()[i] == y);
  }
}

TEST_CASE("the heteroskedastic noise scales by the first covariate") {
  SimConfig cfg;
  cfg.n = 10;
  cfg.seed = 7;
  cfg.heteroskedastic = true;
  const SimResult sim = simulate_dataset(cfg);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> std_normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> symmetric(-1.0, 1.0);
  const double expo_coef[6] = {0.8, 0.4, -0.6, 0.3, 0.5, 0.4};

  double c[6];
  c[0] = std_normal(rng);
  c[1] = std_normal(rng);
  c[2] = std_normal(rng);
  c[3] = std_normal(rng);
  c[4] = unit(rng) < 0.5 ? -0.5 : 0.5;
  c[5] = symmetric(rng);
  double eta = std_normal(rng);
  eta *= 0.5 + 0.25 * std::abs(c[0]);
  double e = eta;
  for (int j = 0; j < 6; ++j) e += expo_coef[j] * c[j];
  CHECK(sim.data.exposure()[0] == e);
}

TEST_CASE("closed-form truths match an independent derivation") {
  SimConfig cfg;
  cfg.n = 100;
  const SimTruth truth = simulate_dataset(cfg).truth;

  CHECK(truth.causal_slope == 0.5);
  CHECK(truth.var_exposure == doctest::Approx(1.0 + kSumExpoVar).epsilon(1e-12));
  CHECK(truth.confounding_cov == doctest::Approx(kCovConf).epsilon(1e-12));
  CHECK(truth.naive_slope ==
        doctest::Approx(0.5 + kCovConf / (1.0 + kSumExpoVar)).epsilon(1e-12));
  // Pinned decimal values of those closed forms.
  CHECK(truth.var_exposure == doctest::Approx(2.3658333333333332).epsilon(1e-12));
  CHECK(truth.confounding_cov == doctest::Approx(0.19166666666666668).epsilon(1e-12));
  CHECK(truth.naive_slope == doctest::Approx(0.5810144417048256).epsilon(1e-12));
  CHECK(truth.n == 100);
  CHECK(truth.erf_shape == ErfShape::linear);

  cfg.heteroskedastic = true;
  const SimTruth het = simulate_dataset(cfg).truth;
  const double pi = std::acos(-1.0);
  const double noise_var = 0.25 + 0.25 * std::sqrt(2.0 / pi) + 0.0625;
  CHECK(het.var_exposure == doctest::Approx(noise_var + kSumExpoVar).epsilon(1e-12));
  CHECK(het.naive_slope ==
        doctest::Approx(0.5 + het.confounding_cov / het.var_exposure).epsilon(1e-15));
  CHECK(het.var_exposure < truth.var_exposure);  // less exposure noise
}

TEST_CASE("large-sample moments agree with the declared truths") {
  SimConfig cfg;
  cfg.n = 20000;
  cfg.seed = 123;
  const SimResult sim = simulate_dataset(cfg);
  const auto& e = sim.data.exposure();
  const auto& y = sim.data.outcome();

  // Covariate marginals.
  const auto& c1 = sim.data.covariate("c1").numeric;
  const auto& c5 = sim.data.covariate("c5").numeric;
  const auto& c6 = sim.data.covariate("c6").numeric;
  CHECK(std::abs(mean_of(c1)) < 0.03);
  CHECK(var_of(c1) == doctest::Approx(1.0).epsilon(0.05));
  for (double v : c5) CHECK((v == 0.5 || v == -0.5));
  CHECK(std::abs(mean_of(c5)) < 0.03);
  for (double v : c6) {
    CHECK(v <= 1.0);
    CHECK(v >= -1.0);
  }
  CHECK(var_of(c6) == doctest::Approx(1.0 / 3.0).epsilon(0.06));

  // Exposure variance and the naive regression slope.
  CHECK(var_of(e) == doctest::Approx(sim.truth.var_exposure).epsilon(0.05));
  const double naive_slope = cov_of(e, y) / var_of(e);
  CHECK(naive_slope == doctest::Approx(sim.truth.naive_slope).epsilon(0.05));
  CHECK(std::abs(naive_slope - sim.truth.causal_slope) > 0.05);  // bias is real

  // The confounded part of the outcome covaries with the exposure as declared.
  std::vector<double> confounded(cfg.n, 0.0);
  const double out_coef[6] = {0.3, 0.3, 0.2, -0.2, 0.2, -0.1};
  for (int j = 0; j < 6; ++j) {
    const auto& col = sim.data.covariate("c" + std::to_string(j + 1)).numeric;
    for (std::size_t i = 0; i < cfg.n; ++i) confounded[i] += out_coef[j] * col[i];
  }
  CHECK(cov_of(e, confounded) == doctest::Approx(sim.truth.confounding_cov).epsilon(0.15));
}

TEST_CASE("the curved shape adds exactly the quadratic term") {
  SimConfig lin_cfg;
  lin_cfg.n = 500;
  lin_cfg.seed = 4;
  SimConfig cur_cfg = lin_cfg;
  cur_cfg.erf_shape = ErfShape::curved;

  const SimResult lin = simulate_dataset(lin_cfg);
  const SimResult cur = simulate_dataset(cur_cfg);

  for (std::size_t i = 0; i < 500; ++i) {
    CHECK(cur.data.exposure()[i] == lin.data.exposure()[i]);  // same stream
    const double e = lin.data.exposure()[i];
    const double diff = cur.data.outcome()[i] - lin.data.outcome()[i];
    CHECK(std::abs(diff - 0.1 * e * e) <= 1e-10);  // absolute: e may sit near 0
  }
  // The quadratic term is symmetric in E, so the naive slope closed form is
  // shared between shapes.
  CHECK(cur.truth.naive_slope == lin.truth.naive_slope);
  CHECK(cur.truth.causal_slope == 0.5);
}

TEST_CASE("tiny requests are rejected and the minimum size works") {
  SimConfig cfg;
  cfg.n = 9;
  CHECK_THROWS_WITH_AS(simulate_dataset(cfg), doctest::Contains("n >= 10"),
                       std::invalid_argument);
  cfg.n = 10;
  const SimResult sim = simulate_dataset(cfg);
  CHECK(sim.data.n_rows() == 10);
  CHECK(sim.data.has_outcome());
  CHECK(sim.data.covariates().size() == 6);
}

TEST_CASE("the truth descriptor serializes every declared quantity") {
  SimConfig cfg;
  cfg.n = 50;
  cfg.seed = 8;
  cfg.erf_shape = ErfShape::curved;
  cfg.heteroskedastic = true;
  const SimTruth truth = simulate_dataset(cfg).truth;

  const std::string text = truth_to_json(truth);
  REQUIRE_FALSE(text.empty());
  CHECK(text.back() == '\n');
  const auto j = nlohmann::json::parse(text);
  CHECK(j.at("erf_shape").get<std::string>() == "curved");
  CHECK(j.at("heteroskedastic").get<bool>() == true);
  CHECK(j.at("n").get<std::size_t>() == 50);
  CHECK(j.at("seed").get<std::uint64_t>() == 8);
  CHECK(j.at("var_exposure").get<double>() == truth.var_exposure);
  CHECK(j.at("confounding_cov").get<double>() == truth.confounding_cov);
  CHECK(j.at("naive_slope").get<double>() == truth.naive_slope);
  CHECK(j.at("causal_slope").get<double>() == 0.5);
  CHECK(j.at("exposure_coefficients").at("c1").get<double>() == 0.8);
  CHECK(j.at("exposure_coefficients").at("c6").get<double>() == 0.4);
  CHECK(j.at("outcome_coefficients").at("intercept").get<double>() == 1.0);
  CHECK(j.at("outcome_coefficients").at("exposure").get<double>() == 0.5);
  CHECK(j.at("outcome_coefficients").at("exposure_sq").get<double>() == 0.1);
  CHECK(j.at("outcome_coefficients").at("c4").get<double>() == -0.2);

  // The linear shape zeroes the quadratic coefficient.
  SimTruth lin = truth;
  lin.erf_shape = ErfShape::linear;
  const auto j2 = nlohmann::json::parse(truth_to_json(lin));
  CHECK(j2.at("outcome_coefficients").at("exposure_sq").get<double>() == 0.0);
}

}  // TEST_SUITE("simulate")
