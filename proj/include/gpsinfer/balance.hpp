#pragma once

// Covariate balance diagnostics: weighted Pearson correlation between the
// exposure and each covariate (weights treated as frequencies), absolute
// values summarized by mean / median / max, and the strict pass test.

#include <string>
#include <vector>

#include "gpsinfer/pseudo_population.hpp"

namespace gpsinfer {

enum class BalanceSummaryType { mean, median, maximal };

const char* balance_summary_name(BalanceSummaryType type);
BalanceSummaryType parse_balance_summary(const std::string& text);  // invalid_argument

struct AcSummary {
  double mean_ac = 0.0;
  double median_ac = 0.0;  // interpolation quantile at p = 0.5
  double max_ac = 0.0;

  double select(BalanceSummaryType type) const;
};

struct AcResult {
  std::vector<std::pair<std::string, double>> acs;  // covariate -> |correlation|
  AcSummary summary;
};

// Weighted Pearson correlation with weights as frequencies: means and central
// moments all use sum(w*) / sum(w). Requires equal lengths, non-negative
// weights with positive sum; DegenerateVariance when either weighted variance
// is zero.
double weighted_pearson(const std::vector<double>& x, const std::vector<double>& y,
                        const std::vector<double>& w);

// Absolute correlation per covariate of the pseudo-population. Zero-weight
// rows are excluded first (>= 2 positive-weight rows required). Categorical
// covariates take the max over their one-hot level indicators. A covariate
// constant within the population reports AC = 0 with a WARN log.
AcResult absolute_correlations(const PseudoPopulation& pp);

// True iff the selected summary is strictly below the threshold.
bool check_balance(const AcSummary& summary, double threshold, BalanceSummaryType type);

struct CovariateBalance {
  std::string name;
  double original_ac = 0.0;
  double adjusted_ac = 0.0;
};

struct BalanceReport {
  std::vector<CovariateBalance> covariates;
  AcSummary original;
  AcSummary adjusted;
  double threshold = 0.1;
  BalanceSummaryType threshold_type = BalanceSummaryType::mean;
  bool passed = false;
};

// Pairs the pre-adjustment and post-adjustment correlation sets by covariate
// name (both must cover the same covariates) and applies the pass test to the
// adjusted summary.
BalanceReport make_balance_report(const AcResult& original, const AcResult& adjusted,
                                  double threshold, BalanceSummaryType type);

// CSV: covariate, original_ac, adjusted_ac rows followed by '#'-prefixed
// summary lines (mean/median/max for both sides, threshold, pass flag).
std::string balance_report_to_csv(const BalanceReport& report);
void write_balance_report_csv(const BalanceReport& report, const std::string& path);
BalanceReport read_balance_report_csv(const std::string& path);

}  // namespace gpsinfer
