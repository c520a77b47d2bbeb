// Tests for stabilized inverse-density weighting and the covariate-balance
// diagnostics built on the weighted Pearson correlation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "gpsinfer/balance.hpp"
#include "gpsinfer/errors.hpp"
#include "gpsinfer/gps.hpp"
#include "gpsinfer/weighting.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace gpsinfer;

namespace {

GpsEstimate raw_estimate(std::vector<double> gps, std::vector<double> marginal) {
  GpsEstimate est;
  est.ids = tsup::default_ids(gps.size());
  est.gps = std::move(gps);
  est.marginal = std::move(marginal);
  return est;
}

PseudoPopulation weighted_pp(Dataset ds, std::vector<double> weight) {
  PseudoPopulation pp;
  pp.data = std::move(ds);
  pp.weight = std::move(weight);
  pp.approach = Approach::weighting;
  return pp;
}

LearnerSpec linear_spec() {
  LearnerSpec s;
  s.kind = LearnerKind::linear;
  return s;
}

}  // namespace

TEST_SUITE("weighting_balance") {

// ---------------------------------------------------------------------------
// stabilized_weights
// ---------------------------------------------------------------------------

TEST_CASE("identical marginal and conditional densities give weight exactly one") {
  const GpsEstimate est = raw_estimate({0.3, 0.12, 0.7}, {0.3, 0.12, 0.7});
  const std::vector<double> w = stabilized_weights(est, WeightConfig{});
  REQUIRE(w.size() == 3);
  for (double v : w) CHECK(v == 1.0);
}

TEST_CASE("the cap truncates large ratios and leaves small ones untouched") {
  // Ratios: 2.0/0.1 = 20 (capped to 10), 0.2/0.05 = 4 (exact, kept).
  const GpsEstimate est = raw_estimate({0.1, 0.05}, {2.0, 0.2});
  const std::vector<double> w = stabilized_weights(est, WeightConfig{});
  CHECK(w[0] == 10.0);
  CHECK(w[1] == 4.0);
}

TEST_CASE("an infinite cap disables truncation") {
  // Power-of-two ratio keeps the division exact: 2.0 / 0.125 = 16.
  const GpsEstimate est = raw_estimate({0.125}, {2.0});
  WeightConfig cfg;
  cfg.cap = std::numeric_limits<double>::infinity();
  CHECK(stabilized_weights(est, cfg)[0] == 16.0);
  cfg.cap = 10.0;
  CHECK(stabilized_weights(est, cfg)[0] == 10.0);
}

TEST_CASE("stabilized_weights validates the cap and alignment") {
  const GpsEstimate est = raw_estimate({0.1}, {0.2});
  WeightConfig cfg;
  cfg.cap = 0.0;
  CHECK_THROWS_AS(stabilized_weights(est, cfg), std::invalid_argument);
  cfg.cap = -1.0;
  CHECK_THROWS_AS(stabilized_weights(est, cfg), std::invalid_argument);
  GpsEstimate misaligned = raw_estimate({0.1, 0.2}, {0.2});
  CHECK_THROWS_AS(stabilized_weights(misaligned, WeightConfig{}), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// generate_weighted_pseudopop
// ---------------------------------------------------------------------------

TEST_CASE("weighted pseudo-population carries rows verbatim with ratio weights") {
  const Dataset ds = tsup::simple_dataset({1.0, 2.0, 3.0}, {0.5, -0.5, 0.0});
  const GpsEstimate est = raw_estimate({0.2, 0.1, 0.4}, {0.2, 0.2, 0.2});
  const PseudoPopulation pp = generate_weighted_pseudopop(ds, est, WeightConfig{});
  CHECK(pp.approach == Approach::weighting);
  CHECK(pp.data.ids() == ds.ids());
  CHECK(pp.data.exposure() == ds.exposure());
  CHECK(pp.data.covariate("x").numeric == ds.covariate("x").numeric);
  REQUIRE(pp.weight.size() == 3);
  CHECK(pp.weight[0] == 1.0);
  CHECK(pp.weight[1] == 2.0);
  CHECK(pp.weight[2] == 0.5);
  REQUIRE(pp.provenance.size() == 2);
  CHECK(pp.provenance[0] == std::pair<std::string, std::string>{"approach", "weighting"});
  CHECK(pp.provenance[1] == std::pair<std::string, std::string>{"cap", "10"});
}

TEST_CASE("generate_weighted_pseudopop rejects misaligned estimates") {
  const Dataset ds = tsup::simple_dataset({1.0, 2.0, 3.0}, {0.5, -0.5, 0.0});
  const GpsEstimate est = raw_estimate({0.2, 0.1}, {0.2, 0.2});
  CHECK_THROWS_AS(generate_weighted_pseudopop(ds, est, WeightConfig{}),
                  std::invalid_argument);
}

TEST_CASE("stabilized weights from a fitted model average near one") {
  tsup::Rng rng(314);
  const std::size_t n = 2000;
  const std::vector<double> x = rng.uniform_vec(n, -1.0, 1.0);
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = x[i] + rng.normal(0.0, 1.0);
  const Dataset ds = tsup::simple_dataset(e, x);
  const GpsEstimate est = estimate_gps(ds, DensityKind::normal, linear_spec(), 7);
  const PseudoPopulation pp = generate_weighted_pseudopop(ds, est, WeightConfig{});
  double sum = 0.0;
  for (double w : pp.weight) {
    CHECK(w > 0.0);
    CHECK(w <= 10.0);
    sum += w;
  }
  CHECK(sum / static_cast<double>(n) == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("stabilized weighting removes most of a linear confounding correlation") {
  tsup::Rng rng(17);
  const std::size_t n = 2000;
  const std::vector<double> x = rng.uniform_vec(n, -1.0, 1.0);
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = x[i] + rng.normal(0.0, 1.0);
  const Dataset ds = tsup::simple_dataset(e, x);
  const GpsEstimate est = estimate_gps(ds, DensityKind::normal, linear_spec(), 7);
  const PseudoPopulation pp = generate_weighted_pseudopop(ds, est, WeightConfig{});

  const PseudoPopulation unweighted = weighted_pp(ds, std::vector<double>(n, 1.0));
  const double orig = absolute_correlations(unweighted).summary.mean_ac;
  const double adjusted = absolute_correlations(pp).summary.mean_ac;
  CHECK(orig > 0.3);
  CHECK(adjusted < 0.1);
  CHECK(adjusted < 0.5 * orig);
}

// ---------------------------------------------------------------------------
// weighted_pearson
// ---------------------------------------------------------------------------

TEST_CASE("weighted_pearson matches the high-precision oracle on a pinned triple") {
  const std::vector<double> x = {0.0, 1.0, 2.0};
  const std::vector<double> y = {0.0, 1.0, 0.0};
  const std::vector<double> w = {1.0, 1.0, 2.0};
  const double r = weighted_pearson(x, y, w);
  CHECK(r == doctest::Approx(-0.17407765595569785).epsilon(1e-12));
  CHECK(r == doctest::Approx(testoracle::weighted_pearson_mp(x, y, w)).epsilon(1e-14));
}

TEST_CASE("weighted_pearson is exactly zero for a symmetric tent") {
  // With unit weights the cross moments cancel term for term.
  CHECK(weighted_pearson({0.0, 1.0, 2.0}, {0.0, 1.0, 0.0}, {1.0, 1.0, 1.0}) == 0.0);
}

TEST_CASE("weighted_pearson reaches +/-1 on exact linear relationships") {
  const std::vector<double> x = {0.0, 1.0, 2.0, 5.0};
  const std::vector<double> w = {1.0, 2.0, 1.0, 0.5};
  std::vector<double> up(x.size()), down(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    up[i] = 2.0 * x[i] + 1.0;
    down[i] = 5.0 - x[i];
  }
  CHECK(weighted_pearson(x, up, w) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(weighted_pearson(x, down, w) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("integer weights behave exactly like frequency expansion") {
  // Duplicate the third row instead of weighting it twice: with these exact
  // dyadic values every moment matches bit for bit.
  const double r_weighted =
      weighted_pearson({0.0, 1.0, 2.0}, {0.0, 1.0, 0.0}, {1.0, 1.0, 2.0});
  const double r_expanded = weighted_pearson({0.0, 1.0, 2.0, 2.0},
                                             {0.0, 1.0, 0.0, 0.0},
                                             {1.0, 1.0, 1.0, 1.0});
  CHECK(r_weighted == r_expanded);
}

TEST_CASE("weighted_pearson is invariant under affine rescaling of either side") {
  const std::vector<double> x = {0.5, 1.5, -2.0, 3.25};
  const std::vector<double> y = {1.0, -1.0, 0.5, 2.0};
  const std::vector<double> w = {1.0, 2.0, 0.5, 1.5};
  const double base = weighted_pearson(x, y, w);
  // Power-of-two scaling is exact arithmetic: bitwise equality.
  std::vector<double> x2(x);
  for (double& v : x2) v *= 2.0;
  CHECK(weighted_pearson(x2, y, w) == base);
  // Arbitrary affine maps agree to rounding.
  std::vector<double> x3(x);
  for (double& v : x3) v = 3.0 * v - 7.0;
  CHECK(weighted_pearson(x3, y, w) == doctest::Approx(base).epsilon(1e-14));
  // Weight rescaling by a power of two is also exact.
  std::vector<double> w4(w);
  for (double& v : w4) v *= 4.0;
  CHECK(weighted_pearson(x, y, w4) == base);
}

TEST_CASE("weighted_pearson agrees with the high-precision oracle on random data") {
  tsup::Rng rng(2711);
  for (int rep = 0; rep < 20; ++rep) {
    const auto n = static_cast<std::size_t>(rng.integer(3, 50));
    const std::vector<double> x = rng.normal_vec(n, 0.0, 2.0);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = 0.5 * x[i] + rng.normal(0.0, 1.0);
    const std::vector<double> w = rng.uniform_vec(n, 0.1, 5.0);
    const double lib = weighted_pearson(x, y, w);
    CHECK(lib == doctest::Approx(testoracle::weighted_pearson_mp(x, y, w)).epsilon(1e-13));
    CHECK(std::abs(lib) <= 1.0 + 1e-12);
  }
}

TEST_CASE("weighted_pearson validates inputs and degeneracy") {
  CHECK_THROWS_AS(weighted_pearson({1.0}, {1.0, 2.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(weighted_pearson({}, {}, {}), std::invalid_argument);
  CHECK_THROWS_AS(weighted_pearson({1.0, 2.0}, {1.0, 2.0}, {1.0, -1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(weighted_pearson({1.0, 2.0}, {1.0, 2.0}, {0.0, 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(weighted_pearson({1.0, 2.0}, {1.0, 2.0}, {1.0, INFINITY}),
                  std::invalid_argument);
  // Constant sides are degenerate.
  CHECK_THROWS_AS(weighted_pearson({1.0, 1.0}, {1.0, 2.0}, {1.0, 1.0}), DegenerateVariance);
  CHECK_THROWS_AS(weighted_pearson({1.0, 2.0}, {3.0, 3.0}, {1.0, 1.0}), DegenerateVariance);
  // A positive-weight subset that is constant is degenerate too: zero-weight
  // rows contribute nothing to the moments.
  CHECK_THROWS_AS(weighted_pearson({1.0, 1.0, 99.0}, {1.0, 2.0, 3.0}, {1.0, 1.0, 0.0}),
                  DegenerateVariance);
}

// ---------------------------------------------------------------------------
// absolute_correlations
// ---------------------------------------------------------------------------

TEST_CASE("absolute correlations report |r| per numeric covariate in column order") {
  const Dataset ds({{0}, {1}, {2}, {3}}, {0.0, 1.0, 2.0, 3.0},
                   {tsup::numeric_col("a", {0.0, 1.0, 2.0, 3.0}),
                    tsup::numeric_col("b", {3.0, 2.0, 1.0, 0.0})});
  const PseudoPopulation pp = weighted_pp(ds, {1.0, 1.0, 1.0, 1.0});
  const AcResult res = absolute_correlations(pp);
  REQUIRE(res.acs.size() == 2);
  CHECK(res.acs[0].first == "a");
  CHECK(res.acs[1].first == "b");
  // Both are perfectly (anti)correlated with the exposure.
  CHECK(res.acs[0].second == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(res.acs[1].second == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(res.summary.mean_ac == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(res.summary.max_ac == res.summary.mean_ac);
}

TEST_CASE("zero-weight rows are excluded before correlating") {
  // The outlier row would flip the correlation, but its weight is zero.
  const Dataset ds({{0}, {1}, {2}, {3}}, {0.0, 1.0, 2.0, 100.0},
                   {tsup::numeric_col("a", {0.5, 1.0, 1.5, -500.0})});
  const PseudoPopulation pp = weighted_pp(ds, {1.0, 2.0, 1.0, 0.0});
  const AcResult res = absolute_correlations(pp);

  const double expect = std::abs(weighted_pearson({0.0, 1.0, 2.0}, {0.5, 1.0, 1.5},
                                                  {1.0, 2.0, 1.0}));
  CHECK(res.acs[0].second == expect);
}

TEST_CASE("categorical covariates take the maximum over all level indicators") {
  const std::vector<double> e = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
  const std::vector<int> codes = {0, 0, 1, 1, 2, 2};
  const Dataset ds({{0}, {1}, {2}, {3}, {4}, {5}}, e,
                   {tsup::categorical_col("g", codes, {"lo", "mid", "hi"})});
  const std::vector<double> w = {1.0, 1.0, 2.0, 1.0, 1.0, 1.0};
  const PseudoPopulation pp = weighted_pp(ds, w);
  const AcResult res = absolute_correlations(pp);
  REQUIRE(res.acs.size() == 1);

  double expect = 0.0;
  for (int level = 0; level < 3; ++level) {
    std::vector<double> indicator(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
      indicator[i] = codes[i] == level ? 1.0 : 0.0;
    }
    expect = std::max(expect, std::abs(weighted_pearson(e, indicator, w)));
  }
  CHECK(res.acs[0].second == expect);
}

TEST_CASE("a constant covariate reports zero with a warning") {
  const Dataset ds({{0}, {1}, {2}}, {0.0, 1.0, 2.0},
                   {tsup::numeric_col("flat", {5.0, 5.0, 5.0}),
                    tsup::numeric_col("a", {0.0, 1.0, 2.0})});
  const PseudoPopulation pp = weighted_pp(ds, {1.0, 1.0, 1.0});
  tsup::LogCapture capture(LogLevel::warn);
  const AcResult res = absolute_correlations(pp);
  CHECK(res.acs[0].second == 0.0);
  CHECK(res.acs[1].second == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(capture.contains("flat"));
  CHECK(capture.contains("constant"));
}

TEST_CASE("a constant exposure is a real degeneracy, not a zero") {
  const Dataset ds({{0}, {1}, {2}}, {2.0, 2.0, 2.0},
                   {tsup::numeric_col("a", {0.0, 1.0, 2.0})});
  const PseudoPopulation pp = weighted_pp(ds, {1.0, 1.0, 1.0});
  CHECK_THROWS_AS(absolute_correlations(pp), DegenerateVariance);
}

TEST_CASE("absolute_correlations validates weights") {
  const Dataset ds = tsup::simple_dataset({0.0, 1.0, 2.0}, {0.0, 1.0, 0.0});
  CHECK_THROWS_AS(absolute_correlations(weighted_pp(ds, {1.0, 1.0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(absolute_correlations(weighted_pp(ds, {1.0, 0.0, 0.0})),
                  std::invalid_argument);
}

TEST_CASE("the summary reproduces mean, interpolated median, and max of the acs") {
  tsup::Rng rng(4005);
  const std::size_t n = 40;
  std::vector<CovariateColumn> cols;
  for (int c = 0; c < 5; ++c) {
    std::vector<double> v = rng.normal_vec(n, 0.0, 1.0);
    cols.push_back(tsup::numeric_col("c" + std::to_string(c), v));
  }
  std::vector<double> e = rng.normal_vec(n, 0.0, 1.0);
  const Dataset ds(tsup::default_ids(n), e, cols);
  const PseudoPopulation pp = weighted_pp(ds, rng.uniform_vec(n, 0.5, 2.0));
  const AcResult res = absolute_correlations(pp);
  REQUIRE(res.acs.size() == 5);
  std::vector<double> vals;
  double sum = 0.0, mx = 0.0;
  for (const auto& [name, v] : res.acs) {
    vals.push_back(v);
    sum += v;
    mx = std::max(mx, v);
  }
  CHECK(res.summary.mean_ac == sum / 5.0);
  CHECK(res.summary.max_ac == mx);
  CHECK(res.summary.median_ac == quantile(vals, 0.5));
}

// ---------------------------------------------------------------------------
// check_balance / summaries / report
// ---------------------------------------------------------------------------

TEST_CASE("balance summary names parse and print consistently") {
  CHECK(parse_balance_summary("mean") == BalanceSummaryType::mean);
  CHECK(parse_balance_summary("median") == BalanceSummaryType::median);
  CHECK(parse_balance_summary("maximal") == BalanceSummaryType::maximal);
  CHECK(std::string(balance_summary_name(BalanceSummaryType::mean)) == "mean");
  CHECK(std::string(balance_summary_name(BalanceSummaryType::median)) == "median");
  CHECK(std::string(balance_summary_name(BalanceSummaryType::maximal)) == "maximal");
  CHECK_THROWS_AS(parse_balance_summary("max"), std::invalid_argument);
  CHECK_THROWS_AS(parse_balance_summary(""), std::invalid_argument);
}

TEST_CASE("select maps each summary type to its field") {
  AcSummary s;
  s.mean_ac = 0.1;
  s.median_ac = 0.2;
  s.max_ac = 0.3;
  CHECK(s.select(BalanceSummaryType::mean) == 0.1);
  CHECK(s.select(BalanceSummaryType::median) == 0.2);
  CHECK(s.select(BalanceSummaryType::maximal) == 0.3);
}

TEST_CASE("check_balance is strict at the threshold") {
  AcSummary s;
  s.mean_ac = 0.1;
  s.median_ac = 0.05;
  s.max_ac = 0.2;
  CHECK_FALSE(check_balance(s, 0.1, BalanceSummaryType::mean));   // equal: fail
  CHECK(check_balance(s, 0.100001, BalanceSummaryType::mean));
  CHECK(check_balance(s, 0.06, BalanceSummaryType::median));
  CHECK_FALSE(check_balance(s, 0.2, BalanceSummaryType::maximal));
  CHECK(check_balance(s, 0.25, BalanceSummaryType::maximal));
  CHECK_THROWS_AS(check_balance(s, 0.0, BalanceSummaryType::mean), std::invalid_argument);
  CHECK_THROWS_AS(check_balance(s, -0.1, BalanceSummaryType::mean), std::invalid_argument);
}

TEST_CASE("make_balance_report pairs covariates by name regardless of order") {
  AcResult original;
  original.acs = {{"a", 0.5}, {"b", 0.3}};
  original.summary.mean_ac = 0.4;
  original.summary.median_ac = 0.4;
  original.summary.max_ac = 0.5;
  AcResult adjusted;
  adjusted.acs = {{"b", 0.04}, {"a", 0.08}};  // reversed order
  adjusted.summary.mean_ac = 0.06;
  adjusted.summary.median_ac = 0.06;
  adjusted.summary.max_ac = 0.08;

  const BalanceReport report =
      make_balance_report(original, adjusted, 0.1, BalanceSummaryType::maximal);
  REQUIRE(report.covariates.size() == 2);
  CHECK(report.covariates[0].name == "a");
  CHECK(report.covariates[0].original_ac == 0.5);
  CHECK(report.covariates[0].adjusted_ac == 0.08);
  CHECK(report.covariates[1].name == "b");
  CHECK(report.covariates[1].adjusted_ac == 0.04);
  CHECK(report.threshold == 0.1);
  CHECK(report.threshold_type == BalanceSummaryType::maximal);
  CHECK(report.passed);  // max 0.08 < 0.1

  // Failing direction.
  const BalanceReport failing =
      make_balance_report(original, adjusted, 0.05, BalanceSummaryType::maximal);
  CHECK_FALSE(failing.passed);
}

TEST_CASE("make_balance_report rejects mismatched covariate sets") {
  AcResult original;
  original.acs = {{"a", 0.5}, {"b", 0.3}};
  AcResult adjusted;
  adjusted.acs = {{"a", 0.1}};
  CHECK_THROWS_AS(make_balance_report(original, adjusted, 0.1, BalanceSummaryType::mean),
                  std::invalid_argument);
  adjusted.acs = {{"a", 0.1}, {"zz", 0.1}};
  CHECK_THROWS_WITH_AS(
      make_balance_report(original, adjusted, 0.1, BalanceSummaryType::mean),
      doctest::Contains("b"), std::invalid_argument);
}

TEST_CASE("balance report csv round trip preserves every field") {
  AcResult original;
  original.acs = {{"age", 0.51234567890123}, {"group", 0.25}};
  original.summary.mean_ac = 0.38117283945061503;
  original.summary.median_ac = 0.38117283945061503;
  original.summary.max_ac = 0.51234567890123;
  AcResult adjusted;
  adjusted.acs = {{"age", 0.031}, {"group", 0.072}};
  adjusted.summary.mean_ac = 0.0515;
  adjusted.summary.median_ac = 0.0515;
  adjusted.summary.max_ac = 0.072;
  const BalanceReport report =
      make_balance_report(original, adjusted, 0.1, BalanceSummaryType::maximal);

  tsup::TempDir dir;
  const std::string path = dir.file("balance.csv");
  write_balance_report_csv(report, path);
  const BalanceReport back = read_balance_report_csv(path);

  REQUIRE(back.covariates.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back.covariates[i].name == report.covariates[i].name);
    CHECK(back.covariates[i].original_ac == report.covariates[i].original_ac);
    CHECK(back.covariates[i].adjusted_ac == report.covariates[i].adjusted_ac);
  }
  CHECK(back.original.mean_ac == report.original.mean_ac);
  CHECK(back.original.median_ac == report.original.median_ac);
  CHECK(back.original.max_ac == report.original.max_ac);
  CHECK(back.adjusted.mean_ac == report.adjusted.mean_ac);
  CHECK(back.adjusted.median_ac == report.adjusted.median_ac);
  CHECK(back.adjusted.max_ac == report.adjusted.max_ac);
  CHECK(back.threshold == report.threshold);
  CHECK(back.threshold_type == report.threshold_type);
  CHECK(back.passed == report.passed);
}

}  // TEST_SUITE
