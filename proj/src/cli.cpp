#include "gpsinfer/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gpsinfer/balance.hpp"
#include "gpsinfer/csv.hpp"
#include "gpsinfer/dataset.hpp"
#include "gpsinfer/erf.hpp"
#include "gpsinfer/errors.hpp"
#include "gpsinfer/gps.hpp"
#include "gpsinfer/logging.hpp"
#include "gpsinfer/matching.hpp"
#include "gpsinfer/plots.hpp"
#include "gpsinfer/pseudo_population.hpp"
#include "gpsinfer/simulate.hpp"
#include "gpsinfer/transforms.hpp"
#include "gpsinfer/tuner.hpp"
#include "gpsinfer/weighting.hpp"

namespace gpsinfer {

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) {
      out.push_back(text.substr(pos));
      break;
    }
    out.push_back(text.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

double parse_flag_double(const std::string& token, const std::string& flag) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(flag + ": cannot parse '" + token + "' as a number");
  }
}

std::vector<double> parse_double_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  for (const auto& tok : split_list(text)) out.push_back(parse_flag_double(tok, flag));
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<int> out;
  for (const auto& tok : split_list(text)) {
    const double v = parse_flag_double(tok, flag);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
      throw std::invalid_argument(flag + ": '" + tok + "' is not an integer");
    out.push_back(i);
  }
  return out;
}

QuantilePair parse_quantile_pair(const std::string& text, const std::string& flag) {
  const auto parts = parse_double_list(text, flag);
  if (parts.size() != 2)
    throw std::invalid_argument(flag + ": expected two comma-separated values");
  return QuantilePair{parts[0], parts[1]};
}

Approach parse_approach(const std::string& s) {
  if (s == "matching") return Approach::matching;
  if (s == "weighting") return Approach::weighting;
  throw std::invalid_argument("--ci-appr: unknown approach '" + s + "'");
}

DensityKind parse_density(const std::string& s) {
  if (s == "normal") return DensityKind::normal;
  if (s == "kernel") return DensityKind::kernel;
  throw std::invalid_argument("--gps-density: unknown density kind '" + s + "'");
}

LearnerKind parse_learner(const std::string& s) {
  if (s == "linear") return LearnerKind::linear;
  if (s == "gbt") return LearnerKind::gbt;
  if (s == "ensemble") return LearnerKind::ensemble;
  throw std::invalid_argument("--learner: unknown learner '" + s + "'");
}

// Column roles resolved against the file header: default outcome/id names are
// dropped silently when absent, explicitly requested ones must exist.
struct ColumnPlan {
  std::vector<CovariateSpec> covariates;
  std::string outcome_col;
  std::string id_col;
};

ColumnPlan plan_columns(const std::string& path, const std::string& exposure_col,
                        std::string outcome_col, bool outcome_explicit, std::string id_col,
                        bool id_explicit, const std::vector<std::string>& covariate_list,
                        const std::vector<std::string>& categorical_list) {
  const csv::Table table = csv::read_file(path);
  const auto in_header = [&](const std::string& name) {
    return std::find(table.header.begin(), table.header.end(), name) != table.header.end();
  };
  if (!outcome_explicit && !outcome_col.empty() && !in_header(outcome_col)) outcome_col.clear();
  if (!id_explicit && !id_col.empty() && !in_header(id_col)) id_col.clear();

  const std::set<std::string> categorical(categorical_list.begin(), categorical_list.end());
  ColumnPlan plan;
  plan.outcome_col = outcome_col;
  plan.id_col = id_col;

  if (!covariate_list.empty()) {
    for (const auto& name : covariate_list)
      plan.covariates.push_back({name, categorical.count(name) ? CovariateKind::categorical
                                                               : CovariateKind::numeric});
  } else {
    const std::set<std::string> reserved = {exposure_col, outcome_col, id_col,
                                            "counter_weight", "stabilized_weight"};
    for (const auto& name : table.header) {
      if (reserved.count(name)) continue;
      plan.covariates.push_back({name, categorical.count(name) ? CovariateKind::categorical
                                                                : CovariateKind::numeric});
    }
  }
  for (const auto& name : categorical_list) {
    const bool known = std::any_of(plan.covariates.begin(), plan.covariates.end(),
                                   [&](const CovariateSpec& s) { return s.name == name; });
    if (!known)
      throw std::invalid_argument("--categorical names '" + name + "', not a covariate");
  }
  if (plan.covariates.empty())
    throw std::invalid_argument("no covariate columns found in " + path);
  return plan;
}

LearnerSpec build_learner_spec(LearnerKind kind, const HyperParams& hp, int ensemble_folds) {
  LearnerSpec spec;
  spec.kind = kind;
  spec.params = hp;
  if (kind == LearnerKind::ensemble) {
    LearnerSpec lin;
    lin.kind = LearnerKind::linear;
    LearnerSpec gbt;
    gbt.kind = LearnerKind::gbt;
    gbt.params = hp;
    spec.bases = {lin, gbt};
    spec.k_folds = ensemble_folds;
  }
  return spec;
}

std::vector<double> build_w_vals(double lo, double hi, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("--w-step must be positive");
  if (lo > hi) throw std::invalid_argument("--w-lo exceeds --w-hi");
  std::vector<double> out;
  for (std::size_t k = 0;; ++k) {
    const double w = lo + static_cast<double>(k) * step;
    if (w > hi + 1e-12) break;
    out.push_back(w);
  }
  return out;
}

}  // namespace

int run_subcommand(int argc, const char* const* argv) {
  CLI::App app{"continuous-exposure causal inference pipeline"};
  app.require_subcommand(1);

  std::string log_level = "INFO";
  std::string log_file;
  app.add_option("--log-level", log_level, "TRACE, DEBUG or INFO")->capture_default_str();
  app.add_option("--log-file", log_file, "append log records to this file (default stderr)");

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset with known truth");
  std::size_t sim_n = 1000;
  std::string sim_shape = "linear";
  bool sim_hetero = false;
  std::uint64_t sim_seed = 0;
  std::string sim_out, sim_truth_out;
  sim->add_option("--n", sim_n, "sample size (>= 10)")->capture_default_str();
  sim->add_option("--shape", sim_shape, "linear or curved")->capture_default_str();
  sim->add_flag("--heteroskedastic", sim_hetero, "exposure noise scales with |c1|");
  sim->add_option("--seed", sim_seed, "generator seed")->capture_default_str();
  sim->add_option("--out", sim_out, "output dataset CSV")->required();
  sim->add_option("--truth-out", sim_truth_out, "output truth JSON");

  // Shared input-column flags, one copy per data-reading subcommand.
  struct DataFlags {
    std::string data;
    std::string exposure_col = "exposure";
    std::string outcome_col = "outcome";
    std::string id_col = "id";
    std::string covariates;
    std::string categorical;
    CLI::Option* outcome_opt = nullptr;
    CLI::Option* id_opt = nullptr;

    void attach(CLI::App* sub, const char* data_flag, const char* data_help) {
      sub->add_option(data_flag, data, data_help)->required();
      sub->add_option("--exposure-col", exposure_col, "exposure column name")
          ->capture_default_str();
      outcome_opt = sub->add_option("--outcome-col", outcome_col,
                                    "outcome column name ('' = none)");
      outcome_opt->capture_default_str();
      id_opt = sub->add_option("--id-col", id_col, "id column name ('' = row order)");
      id_opt->capture_default_str();
      sub->add_option("--covariates", covariates,
                      "comma-separated covariate columns (default: all remaining)");
      sub->add_option("--categorical", categorical,
                      "comma-separated covariates to treat as categorical");
    }
    ColumnPlan plan() const {
      return plan_columns(data, exposure_col, outcome_col, outcome_opt->count() > 0, id_col,
                          id_opt->count() > 0, split_list(covariates), split_list(categorical));
    }
  };

  // ---- estimate-gps ----
  auto* egps = app.add_subcommand("estimate-gps", "fit the conditional exposure density");
  DataFlags egps_data;
  egps_data.attach(egps, "--data", "input dataset CSV");
  std::string egps_density = "normal", egps_learner = "gbt";
  HyperParams egps_hp;
  int egps_folds = 5, egps_nthread = 1;
  std::uint64_t egps_seed = 0;
  std::string egps_out;
  egps->add_option("--gps-density", egps_density, "normal or kernel")->capture_default_str();
  egps->add_option("--learner", egps_learner, "linear, gbt or ensemble")->capture_default_str();
  egps->add_option("--nrounds", egps_hp.nrounds, "boosting rounds")->capture_default_str();
  egps->add_option("--eta", egps_hp.eta, "boosting learning rate")->capture_default_str();
  egps->add_option("--max-depth", egps_hp.max_depth, "tree depth limit")->capture_default_str();
  egps->add_option("--min-child-weight", egps_hp.min_child_weight, "minimum node size")
      ->capture_default_str();
  egps->add_option("--ensemble-folds", egps_folds, "stacking CV folds")->capture_default_str();
  egps->add_option("--seed", egps_seed, "fit seed")->capture_default_str();
  egps->add_option("--nthread", egps_nthread, "worker threads")->capture_default_str();
  egps->add_option("--out", egps_out, "output GPS CSV")->required();

  // ---- pseudo-pop ----
  auto* ppop = app.add_subcommand("pseudo-pop", "construct a balanced pseudo-population");
  DataFlags ppop_data;
  ppop_data.attach(ppop, "--data", "input dataset CSV");
  std::string ppop_appr = "matching", ppop_density = "normal", ppop_learner = "gbt";
  int ppop_folds = 5;
  std::string ppop_exposure_trim = "0.01,0.99", ppop_gps_trim = "0,1";
  bool ppop_use_transform = false;
  std::string ppop_transformers;
  std::string ppop_nrounds, ppop_eta, ppop_max_depth, ppop_mcw;
  int ppop_max_attempt = 1;
  double ppop_trs = 0.1;
  std::string ppop_trs_type = "mean";
  double ppop_delta = 1.0, ppop_scale = 0.5;
  std::string ppop_dist = "l1", ppop_bin_seq;
  double ppop_cap = 10.0;
  std::uint64_t ppop_seed = 0;
  int ppop_nthread = 1;
  std::string ppop_out, ppop_balance_out, ppop_attempts_log, ppop_original_out;
  ppop->add_option("--ci-appr", ppop_appr, "matching or weighting")->capture_default_str();
  ppop->add_option("--gps-density", ppop_density, "normal or kernel")->capture_default_str();
  ppop->add_option("--learner", ppop_learner, "linear, gbt or ensemble")->capture_default_str();
  ppop->add_option("--ensemble-folds", ppop_folds, "stacking CV folds")->capture_default_str();
  ppop->add_option("--exposure-trim", ppop_exposure_trim, "lo,hi exposure quantiles")
      ->capture_default_str();
  ppop->add_option("--gps-trim", ppop_gps_trim, "lo,hi GPS quantiles")->capture_default_str();
  ppop->add_flag("--use-cov-transform", ppop_use_transform,
                 "transform the worst covariate between attempts");
  ppop->add_option("--transformers", ppop_transformers,
                   "comma-separated transform names (default pow2,pow3)");
  ppop->add_option("--xgb-nrounds", ppop_nrounds, "candidate boosting rounds (comma list)");
  ppop->add_option("--xgb-eta", ppop_eta, "candidate learning rates (comma list)");
  ppop->add_option("--xgb-max-depth", ppop_max_depth, "candidate tree depths (comma list)");
  ppop->add_option("--xgb-min-child-weight", ppop_mcw, "candidate node sizes (comma list)");
  ppop->add_option("--max-attempt", ppop_max_attempt, "tuning attempts")->capture_default_str();
  ppop->add_option("--covar-bl-trs", ppop_trs, "balance threshold")->capture_default_str();
  ppop->add_option("--covar-bl-trs-type", ppop_trs_type, "mean, median or maximal")
      ->capture_default_str();
  ppop->add_option("--delta-n", ppop_delta, "matching caliper width")->capture_default_str();
  ppop->add_option("--scale", ppop_scale, "GPS emphasis lambda in [0,1]")->capture_default_str();
  ppop->add_option("--dist-measure", ppop_dist, "matching distance (l1)")->capture_default_str();
  ppop->add_option("--bin-seq", ppop_bin_seq, "explicit exposure levels (comma list)");
  ppop->add_option("--weight-cap", ppop_cap, "stabilized weight cap (inf allowed)")
      ->capture_default_str();
  ppop->add_option("--seed", ppop_seed, "tuner seed")->capture_default_str();
  ppop->add_option("--nthread", ppop_nthread, "worker threads")->capture_default_str();
  ppop->add_option("--out", ppop_out, "output pseudo-population CSV")->required();
  ppop->add_option("--balance-out", ppop_balance_out, "output balance report CSV");
  ppop->add_option("--attempts-log", ppop_attempts_log, "output per-attempt JSONL");
  ppop->add_option("--original-out", ppop_original_out,
                   "also write the untouched input dataset CSV here");

  // ---- balance-report ----
  auto* bal = app.add_subcommand("balance-report", "balance diagnostics of a pseudo-population");
  std::string bal_pp, bal_exposure = "exposure", bal_outcome = "outcome", bal_id = "id";
  std::string bal_weight, bal_categorical;
  double bal_trs = 0.1;
  std::string bal_trs_type = "mean", bal_out;
  bal->add_option("--pseudo-pop", bal_pp, "pseudo-population CSV")->required();
  bal->add_option("--exposure-col", bal_exposure, "exposure column")->capture_default_str();
  bal->add_option("--outcome-col", bal_outcome, "outcome column")->capture_default_str();
  bal->add_option("--id-col", bal_id, "id column")->capture_default_str();
  bal->add_option("--weight-col", bal_weight, "weight column (default: auto-detect)");
  bal->add_option("--categorical", bal_categorical, "categorical covariates (comma list)");
  bal->add_option("--covar-bl-trs", bal_trs, "balance threshold")->capture_default_str();
  bal->add_option("--covar-bl-trs-type", bal_trs_type, "mean, median or maximal")
      ->capture_default_str();
  bal->add_option("--out", bal_out, "output balance report CSV")->required();

  // ---- estimate-erf ----
  auto* erf = app.add_subcommand("estimate-erf", "exposure-response curve on a pseudo-population");
  std::string erf_pp, erf_exposure = "exposure", erf_outcome = "outcome", erf_id = "id";
  std::string erf_weight, erf_categorical;
  std::string erf_method = "npmetric", erf_family = "gaussian";
  int erf_spline_df = 4;
  std::string erf_bw_grid = "0.2,1,0.1";
  double erf_w_lo = std::numeric_limits<double>::quiet_NaN();
  double erf_w_hi = std::numeric_limits<double>::quiet_NaN();
  double erf_w_step = 0.1;
  std::size_t erf_boot_b = 0, erf_boot_m = 0;
  double erf_alpha = 0.05;
  int erf_nthread = 1;
  std::uint64_t erf_seed = 0;
  std::string erf_out, erf_risks_out;
  erf->add_option("--pseudo-pop", erf_pp, "pseudo-population CSV")->required();
  erf->add_option("--exposure-col", erf_exposure, "exposure column")->capture_default_str();
  erf->add_option("--outcome-col", erf_outcome, "outcome column")->capture_default_str();
  erf->add_option("--id-col", erf_id, "id column")->capture_default_str();
  erf->add_option("--weight-col", erf_weight, "weight column (default: auto-detect)");
  erf->add_option("--categorical", erf_categorical, "categorical covariates (comma list)");
  erf->add_option("--method", erf_method, "pmetric, semipmetric or npmetric")
      ->capture_default_str();
  erf->add_option("--family", erf_family, "pmetric family: gaussian or poisson")
      ->capture_default_str();
  erf->add_option("--spline-df", erf_spline_df, "semipmetric spline degrees of freedom")
      ->capture_default_str();
  erf->add_option("--bw-grid", erf_bw_grid, "npmetric bandwidth grid start,end,step")
      ->capture_default_str();
  erf->add_option("--w-lo", erf_w_lo, "grid start (default: 5% exposure quantile)");
  erf->add_option("--w-hi", erf_w_hi, "grid end (default: 95% exposure quantile)");
  erf->add_option("--w-step", erf_w_step, "grid step")->capture_default_str();
  erf->add_option("--bootstrap-b", erf_boot_b, "bootstrap replicates (0 = no bands)")
      ->capture_default_str();
  erf->add_option("--bootstrap-m", erf_boot_m, "rows per replicate (default floor(n^0.9))");
  erf->add_option("--alpha", erf_alpha, "band miscoverage level")->capture_default_str();
  erf->add_option("--seed", erf_seed, "bootstrap seed")->capture_default_str();
  erf->add_option("--nthread", erf_nthread, "worker threads")->capture_default_str();
  erf->add_option("--out", erf_out, "output curve CSV")->required();
  erf->add_option("--risks-out", erf_risks_out, "output bandwidth risk CSV (npmetric)");

  // ---- plot-balance ----
  auto* pbal = app.add_subcommand("plot-balance", "render a balance report as SVG");
  std::string pbal_report, pbal_out;
  double pbal_threshold = std::numeric_limits<double>::quiet_NaN();
  pbal->add_option("--report", pbal_report, "balance report CSV")->required();
  pbal->add_option("--threshold", pbal_threshold,
                   "vertical line position (default: report threshold)");
  pbal->add_option("--out", pbal_out, "output SVG")->required();

  // ---- plot-erf ----
  auto* perf = app.add_subcommand("plot-erf", "render an exposure-response curve as SVG");
  std::string perf_erf, perf_out;
  perf->add_option("--erf", perf_erf, "curve CSV")->required();
  perf->add_option("--out", perf_out, "output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    LogConfig log_cfg;
    log_cfg.level = parse_log_level(log_level);
    log_cfg.file_path = log_file;
    configure_logging(log_cfg);

    if (sim->parsed()) {
      SimConfig cfg;
      cfg.n = sim_n;
      cfg.erf_shape = parse_erf_shape(sim_shape);
      cfg.heteroskedastic = sim_hetero;
      cfg.seed = sim_seed;
      const SimResult result = simulate_dataset(cfg);
      write_dataset_csv(result.data, sim_out);
      if (!sim_truth_out.empty()) csv::write_file(sim_truth_out, truth_to_json(result.truth));
      log_info("simulated " + std::to_string(cfg.n) + " rows into " + sim_out);
      return 0;
    }

    if (egps->parsed()) {
      const ColumnPlan plan = egps_data.plan();
      const Dataset ds = load_csv(egps_data.data, egps_data.exposure_col, plan.covariates,
                                  plan.outcome_col, plan.id_col);
      const LearnerSpec spec =
          build_learner_spec(parse_learner(egps_learner), egps_hp, egps_folds);
      const GpsEstimate est =
          estimate_gps(ds, parse_density(egps_density), spec, egps_seed, egps_nthread);
      write_gps_csv(est, egps_out);
      log_info("estimated GPS for " + std::to_string(ds.n_rows()) + " rows into " + egps_out);
      return 0;
    }

    if (ppop->parsed()) {
      const ColumnPlan plan = ppop_data.plan();
      const Dataset ds = load_csv(ppop_data.data, ppop_data.exposure_col, plan.covariates,
                                  plan.outcome_col, plan.id_col);
      TunerConfig cfg;
      cfg.ci_appr = parse_approach(ppop_appr);
      cfg.gps_density = parse_density(ppop_density);
      cfg.learner = parse_learner(ppop_learner);
      cfg.ensemble_folds = ppop_folds;
      cfg.exposure_trim_qtls = parse_quantile_pair(ppop_exposure_trim, "--exposure-trim");
      cfg.gps_trim_qtls = parse_quantile_pair(ppop_gps_trim, "--gps-trim");
      cfg.use_cov_transform = ppop_use_transform;
      for (const auto& name : split_list(ppop_transformers))
        cfg.transformers.push_back(make_transformer(name));
      if (!ppop_nrounds.empty())
        cfg.hyperparam_grid.nrounds = parse_int_list(ppop_nrounds, "--xgb-nrounds");
      if (!ppop_eta.empty()) cfg.hyperparam_grid.eta = parse_double_list(ppop_eta, "--xgb-eta");
      if (!ppop_max_depth.empty())
        cfg.hyperparam_grid.max_depth = parse_int_list(ppop_max_depth, "--xgb-max-depth");
      if (!ppop_mcw.empty())
        cfg.hyperparam_grid.min_child_weight =
            parse_double_list(ppop_mcw, "--xgb-min-child-weight");
      cfg.max_attempt = ppop_max_attempt;
      cfg.covar_bl_trs = ppop_trs;
      cfg.covar_bl_trs_type = parse_balance_summary(ppop_trs_type);
      cfg.match_cfg.delta_n = ppop_delta;
      cfg.match_cfg.scale = ppop_scale;
      if (ppop_dist != "l1")
        throw std::invalid_argument("--dist-measure: unknown distance '" + ppop_dist + "'");
      if (!ppop_bin_seq.empty())
        cfg.match_cfg.bin_seq = parse_double_list(ppop_bin_seq, "--bin-seq");
      cfg.weight_cfg.cap = ppop_cap;
      cfg.rng_seed = ppop_seed;
      cfg.nthread = ppop_nthread;
      cfg.include_original_data = !ppop_original_out.empty();

      const TunerResult result = generate_pseudo_pop(ds, cfg);
      write_pseudo_population_csv(result.pseudo_pop, ppop_out);
      if (!ppop_balance_out.empty())
        write_balance_report_csv(result.adjusted_corr_results, ppop_balance_out);
      if (!ppop_attempts_log.empty()) write_attempts_jsonl(result.attempts, ppop_attempts_log);
      if (!ppop_original_out.empty()) write_dataset_csv(*result.original_data, ppop_original_out);
      log_info(std::string("pseudo-population written to ") + ppop_out + " (balance " +
               (result.passed_covar_test ? "passed" : "failed") + " at attempt " +
               std::to_string(result.best_attempt) + ")");
      return 0;
    }

    if (bal->parsed()) {
      const PseudoPopulation pp = read_pseudo_population_csv(
          bal_pp, bal_exposure, bal_outcome, bal_id, bal_weight, split_list(bal_categorical));
      PseudoPopulation unweighted = pp;
      std::fill(unweighted.weight.begin(), unweighted.weight.end(), 1.0);
      const AcResult original = absolute_correlations(unweighted);
      const AcResult adjusted = absolute_correlations(pp);
      const BalanceReport report =
          make_balance_report(original, adjusted, bal_trs, parse_balance_summary(bal_trs_type));
      write_balance_report_csv(report, bal_out);
      log_info(std::string("balance report written to ") + bal_out + " (" +
               (report.passed ? "passed" : "failed") + ")");
      return 0;
    }

    if (erf->parsed()) {
      const PseudoPopulation pp = read_pseudo_population_csv(
          erf_pp, erf_exposure, erf_outcome, erf_id, erf_weight, split_list(erf_categorical));
      double w_lo = erf_w_lo, w_hi = erf_w_hi;
      if (std::isnan(w_lo)) w_lo = quantile(pp.data.exposure(), 0.05);
      if (std::isnan(w_hi)) w_hi = quantile(pp.data.exposure(), 0.95);
      const std::vector<double> w_vals = build_w_vals(w_lo, w_hi, erf_w_step);

      ErfEstimate est;
      if (erf_method == "pmetric") {
        if (erf_boot_b > 0)
          throw std::invalid_argument("--bootstrap-b applies only to --method npmetric");
        const OutcomeFamily family = [&] {
          if (erf_family == "gaussian") return OutcomeFamily::gaussian;
          if (erf_family == "poisson") return OutcomeFamily::poisson;
          throw std::invalid_argument("--family: unknown family '" + erf_family + "'");
        }();
        const ParametricErf fit = estimate_pmetric_erf(pp, family);
        est.w_vals = w_vals;
        est.estimates.resize(w_vals.size());
        for (std::size_t i = 0; i < w_vals.size(); ++i) {
          const double eta = fit.intercept + fit.slope * w_vals[i];
          est.estimates[i] = family == OutcomeFamily::poisson ? std::exp(eta) : eta;
        }
        log_info("pmetric fit: intercept=" + csv::format_double(fit.intercept) +
                 " slope=" + csv::format_double(fit.slope));
      } else if (erf_method == "semipmetric") {
        if (erf_boot_b > 0)
          throw std::invalid_argument("--bootstrap-b applies only to --method npmetric");
        est = estimate_semipmetric_erf(pp, erf_spline_df, w_vals);
      } else if (erf_method == "npmetric") {
        const auto grid_parts = parse_double_list(erf_bw_grid, "--bw-grid");
        if (grid_parts.size() != 3)
          throw std::invalid_argument("--bw-grid: expected start,end,step");
        NpErfConfig cfg;
        cfg.bw_grid = BandwidthGrid{grid_parts[0], grid_parts[1], grid_parts[2]};
        cfg.w_vals = w_vals;
        if (erf_boot_b > 0) {
          std::size_t m = erf_boot_m;
          if (m == 0)
            m = static_cast<std::size_t>(
                std::floor(std::pow(static_cast<double>(pp.data.n_rows()), 0.9)));
          est = bootstrap_erf_ci(pp, m, erf_boot_b, cfg, erf_seed, erf_alpha, erf_nthread);
        } else {
          est = estimate_npmetric_erf(pp.data.outcome(), pp.data.exposure(), pp.weight,
                                      cfg.bw_grid, cfg.w_vals, cfg.kernel, erf_nthread);
        }
        if (est.optimal_bw)
          log_info("npmetric optimal bandwidth: " + csv::format_double(*est.optimal_bw));
      } else {
        throw std::invalid_argument("--method: unknown method '" + erf_method + "'");
      }
      write_erf_csv(est, erf_out);
      if (!erf_risks_out.empty()) {
        if (est.risks.empty())
          throw std::invalid_argument("--risks-out applies only to --method npmetric");
        write_risks_csv(est, erf_risks_out);
      }
      log_info("exposure-response curve written to " + erf_out);
      return 0;
    }

    if (pbal->parsed()) {
      const BalanceReport report = read_balance_report_csv(pbal_report);
      const double threshold = std::isnan(pbal_threshold) ? report.threshold : pbal_threshold;
      emit_balance_plot(report, threshold, pbal_out);
      log_info("balance plot written to " + pbal_out);
      return 0;
    }

    if (perf->parsed()) {
      const ErfEstimate est = read_erf_csv(perf_erf);
      emit_erf_plot(est, perf_out);
      log_info("exposure-response plot written to " + perf_out);
      return 0;
    }

    std::cerr << "error: no subcommand given\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const MissingColumn& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DuplicateId& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace gpsinfer
