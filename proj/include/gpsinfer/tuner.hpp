#pragma once

// Balance-driven search over exposure-model hyper-parameters and covariate
// transforms: trim, fit the exposure density, build the pseudo-population,
// test balance; stop at the first passing attempt or keep the best one.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gpsinfer/balance.hpp"
#include "gpsinfer/dataset.hpp"
#include "gpsinfer/gps.hpp"
#include "gpsinfer/matching.hpp"
#include "gpsinfer/pseudo_population.hpp"
#include "gpsinfer/transforms.hpp"
#include "gpsinfer/weighting.hpp"

namespace gpsinfer {

struct TunerConfig {
  Approach ci_appr = Approach::matching;
  DensityKind gps_density = DensityKind::normal;
  LearnerKind learner = LearnerKind::gbt;  // ensemble = {linear, gbt(sampled)}
  int ensemble_folds = 5;
  QuantilePair exposure_trim_qtls{0.01, 0.99};
  QuantilePair gps_trim_qtls{0.0, 1.0};
  bool use_cov_transform = false;
  std::vector<Transformer> transformers;  // empty -> {pow2, pow3}
  HyperParamGrid hyperparam_grid;
  int max_attempt = 1;
  double covar_bl_trs = 0.1;
  BalanceSummaryType covar_bl_trs_type = BalanceSummaryType::mean;
  MatchConfig match_cfg;
  WeightConfig weight_cfg;
  std::uint64_t rng_seed = 0;
  int nthread = 1;
  bool include_original_data = false;
};

struct AttemptRecord {
  int attempt = 0;
  HyperParams hyperparams;
  // Ledger state the attempt's exposure model was trained with.
  std::vector<std::pair<std::string, std::string>> ledger;  // (covariate, transform)
  // Transform applied in reaction to this attempt (empty when none).
  std::string transformed_covariate;
  std::string transformer_name;
  bool construction_failed = false;
  std::string failure_message;
  AcSummary adjusted_summary;
  double selected_summary = 0.0;  // adjusted summary of the configured type
  bool passed = false;
};

struct TunerResult {
  TunerConfig params;                 // echo of the configuration
  PseudoPopulation pseudo_pop;        // best attempt's pseudo-population
  BalanceReport adjusted_corr_results;
  BalanceReport original_corr_results;  // unit-weight baseline on trimmed rows
  bool passed_covar_test = false;
  HyperParams best_gps_used_params;
  std::vector<std::pair<std::string, std::string>> best_transform_ledger;
  int best_attempt = 0;
  std::vector<AttemptRecord> attempts;
  std::optional<Dataset> original_data;  // set when include_original_data
};

// Runs the attempt loop. Attempt a (1-based) draws hyper-parameters and fits
// with seed rng_seed + a. Construction failures are logged and skipped;
// AllAttemptsFailedConstruction if every attempt fails. Balance is always
// computed on untransformed covariates.
TunerResult generate_pseudo_pop(const Dataset& ds, const TunerConfig& cfg);

// One JSON object per attempt, newline separated.
std::string attempts_to_jsonl(const std::vector<AttemptRecord>& attempts);
void write_attempts_jsonl(const std::vector<AttemptRecord>& attempts, const std::string& path);

}  // namespace gpsinfer
