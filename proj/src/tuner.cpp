#include "gpsinfer/tuner.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "gpsinfer/csv.hpp"
#include "gpsinfer/errors.hpp"
#include "gpsinfer/logging.hpp"

namespace gpsinfer {

namespace {

LearnerSpec learner_spec_for(const TunerConfig& cfg, const HyperParams& hp) {
  LearnerSpec spec;
  spec.kind = cfg.learner;
  spec.params = hp;
  if (cfg.learner == LearnerKind::ensemble) {
    LearnerSpec lin;
    lin.kind = LearnerKind::linear;
    LearnerSpec gbt;
    gbt.kind = LearnerKind::gbt;
    gbt.params = hp;
    spec.bases = {lin, gbt};
    spec.k_folds = cfg.ensemble_folds;
  }
  return spec;
}

std::vector<std::pair<std::string, std::string>> ledger_names(const TransformLedger& ledger) {
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(ledger.size());
  for (const auto& [cov, tr] : ledger) out.emplace_back(cov, tr.name);
  return out;
}

PseudoPopulation unit_weight_population(const Dataset& ds) {
  PseudoPopulation pp;
  pp.approach = Approach::weighting;
  pp.data = ds;
  pp.weight.assign(ds.n_rows(), 1.0);
  return pp;
}

}  // namespace

TunerResult generate_pseudo_pop(const Dataset& ds, const TunerConfig& cfg) {
  if (cfg.max_attempt < 1) throw std::invalid_argument("max_attempt must be >= 1");
  if (!(cfg.covar_bl_trs > 0.0)) throw std::invalid_argument("covar_bl_trs must be positive");
  if (ds.covariates().empty()) throw std::invalid_argument("dataset has no covariates");

  const std::vector<Transformer> transformers =
      cfg.transformers.empty()
          ? std::vector<Transformer>{make_transformer("pow2"), make_transformer("pow3")}
          : cfg.transformers;

  const Dataset trimmed = trim_by_exposure_quantiles(ds, cfg.exposure_trim_qtls);
  log_debug("tuner: exposure trim kept " + std::to_string(trimmed.n_rows()) + " of " +
            std::to_string(ds.n_rows()) + " rows");

  TransformLedger ledger;
  TunerResult result;
  result.params = cfg;

  struct AttemptOutcome {
    PseudoPopulation pp;
    BalanceReport report;
    HyperParams hp;
    TransformLedger ledger;
    int attempt = 0;
  };
  std::optional<AttemptOutcome> best;
  double best_summary = std::numeric_limits<double>::infinity();

  for (int attempt = 1; attempt <= cfg.max_attempt; ++attempt) {
    std::mt19937_64 rng(cfg.rng_seed + static_cast<std::uint64_t>(attempt));
    const HyperParams hp = sample_hyperparams(cfg.hyperparam_grid, rng);

    AttemptRecord record;
    record.attempt = attempt;
    record.hyperparams = hp;
    record.ledger = ledger_names(ledger);

    AcResult adjusted;
    try {
      const GpsEstimate gps_full =
          estimate_gps(trimmed, cfg.gps_density, learner_spec_for(cfg, hp),
                       cfg.rng_seed + static_cast<std::uint64_t>(attempt), cfg.nthread, ledger);
      const std::vector<std::size_t> keep =
          quantile_band_indices(gps_full.gps, cfg.gps_trim_qtls);
      if (keep.empty()) throw AllRowsTrimmed("gps trimming removed every row");
      const Dataset working = trimmed.subset(keep);
      const GpsEstimate gps_est = subset_gps(gps_full, keep);

      PseudoPopulation pp =
          cfg.ci_appr == Approach::matching
              ? generate_matched_pseudopop(working, gps_est, cfg.match_cfg, cfg.nthread)
              : generate_weighted_pseudopop(working, gps_est, cfg.weight_cfg);

      adjusted = absolute_correlations(pp);
      const AcResult original = absolute_correlations(unit_weight_population(working));
      BalanceReport report =
          make_balance_report(original, adjusted, cfg.covar_bl_trs, cfg.covar_bl_trs_type);

      record.adjusted_summary = adjusted.summary;
      record.selected_summary = adjusted.summary.select(cfg.covar_bl_trs_type);
      record.passed = report.passed;

      pp.provenance.emplace_back("gps_density",
                                 cfg.gps_density == DensityKind::normal ? "normal" : "kernel");
      pp.provenance.emplace_back("attempt", std::to_string(attempt));
      pp.provenance.emplace_back("nrounds", std::to_string(hp.nrounds));
      pp.provenance.emplace_back("eta", csv::format_double(hp.eta));
      pp.provenance.emplace_back("max_depth", std::to_string(hp.max_depth));
      pp.provenance.emplace_back("min_child_weight", csv::format_double(hp.min_child_weight));
      for (const auto& [cov, name] : record.ledger) {
        pp.provenance.emplace_back("transform:" + cov, name);
      }

      if (record.selected_summary < best_summary) {
        best_summary = record.selected_summary;
        best = AttemptOutcome{std::move(pp), std::move(report), hp, ledger, attempt};
      }
    } catch (const Error& e) {
      record.construction_failed = true;
      record.failure_message = e.what();
      log_warn("tuner: attempt " + std::to_string(attempt) + " failed: " + e.what());
      result.attempts.push_back(std::move(record));
      continue;
    }

    log_info("tuner: attempt " + std::to_string(attempt) + " " +
             balance_summary_name(cfg.covar_bl_trs_type) +
             " adjusted AC=" + csv::format_double(record.selected_summary) +
             (record.passed ? " (passed)" : " (failed)"));

    const bool passed = record.passed;
    if (!passed && cfg.use_cov_transform && attempt < cfg.max_attempt) {
      // Transform the most imbalanced numeric covariate; transformers cycle by
      // attempt index. Categorical covariates are skipped (next worst numeric).
      std::vector<std::pair<std::string, double>> ordered = adjusted.acs;
      std::stable_sort(ordered.begin(), ordered.end(),
                       [](const auto& a, const auto& b) { return a.second > b.second; });
      for (const auto& [name, ac] : ordered) {
        if (trimmed.covariate(name).kind != CovariateKind::numeric) continue;
        const Transformer& tr =
            transformers[static_cast<std::size_t>(attempt - 1) % transformers.size()];
        ledger.emplace_back(name, tr);
        record.transformed_covariate = name;
        record.transformer_name = tr.name;
        log_debug("tuner: applying " + tr.name + " to '" + name + "' for the next attempt");
        break;
      }
    }
    result.attempts.push_back(std::move(record));
    if (passed) break;
  }

  if (!best) {
    throw AllAttemptsFailedConstruction("every tuner attempt failed to construct a pseudo-population");
  }

  result.pseudo_pop = std::move(best->pp);
  result.adjusted_corr_results = best->report;
  // The "original" report carries the unit-weight baseline correlations of the
  // trimmed rows in both columns.
  {
    std::vector<std::pair<std::string, double>> orig;
    for (const auto& row : best->report.covariates) orig.emplace_back(row.name, row.original_ac);
    const AcResult orig_result{orig, best->report.original};
    result.original_corr_results = make_balance_report(orig_result, orig_result, cfg.covar_bl_trs,
                                                       cfg.covar_bl_trs_type);
  }
  result.passed_covar_test = best->report.passed;
  result.best_gps_used_params = best->hp;
  result.best_transform_ledger = ledger_names(best->ledger);
  result.best_attempt = best->attempt;
  if (cfg.include_original_data) result.original_data = ds;
  return result;
}

std::string attempts_to_jsonl(const std::vector<AttemptRecord>& attempts) {
  std::string out;
  for (const auto& a : attempts) {
    nlohmann::json j;
    j["attempt"] = a.attempt;
    j["hyperparams"] = {{"nrounds", a.hyperparams.nrounds},
                        {"eta", a.hyperparams.eta},
                        {"max_depth", a.hyperparams.max_depth},
                        {"min_child_weight", a.hyperparams.min_child_weight}};
    nlohmann::json ledger = nlohmann::json::array();
    for (const auto& [cov, name] : a.ledger) {
      ledger.push_back({{"covariate", cov}, {"transform", name}});
    }
    j["ledger"] = std::move(ledger);
    if (!a.transformer_name.empty()) {
      j["transform"] = {{"covariate", a.transformed_covariate}, {"name", a.transformer_name}};
    } else {
      j["transform"] = nullptr;
    }
    if (a.construction_failed) {
      j["failed"] = true;
      j["error"] = a.failure_message;
    } else {
      j["balance"] = {{"mean", a.adjusted_summary.mean_ac},
                      {"median", a.adjusted_summary.median_ac},
                      {"max", a.adjusted_summary.max_ac},
                      {"selected", a.selected_summary},
                      {"passed", a.passed}};
    }
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

void write_attempts_jsonl(const std::vector<AttemptRecord>& attempts, const std::string& path) {
  csv::write_file(path, attempts_to_jsonl(attempts));
}

}  // namespace gpsinfer
