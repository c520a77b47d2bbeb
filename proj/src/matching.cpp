#include "gpsinfer/matching.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gpsinfer/csv.hpp"
#include "gpsinfer/errors.hpp"
#include "gpsinfer/logging.hpp"
#include "gpsinfer/parallel.hpp"

namespace gpsinfer {

Standardizer Standardizer::from(const std::vector<double>& exposure,
                                const std::vector<double>& gps) {
  if (exposure.empty() || gps.empty()) {
    throw std::invalid_argument("standardizer needs non-empty inputs");
  }
  Standardizer s;
  const auto [emin, emax] = std::minmax_element(exposure.begin(), exposure.end());
  const auto [pmin, pmax] = std::minmax_element(gps.begin(), gps.end());
  s.e_min = *emin;
  s.e_max = *emax;
  s.p_min = *pmin;
  s.p_max = *pmax;
  if (!(s.e_max > s.e_min)) throw DegenerateStandardizer("exposure range is zero");
  if (!(s.p_max > s.p_min)) throw DegenerateStandardizer("gps range is zero");
  return s;
}

double Standardizer::exposure_to_unit(double e) const {
  const double u = (e - e_min) / (e_max - e_min);
  return std::clamp(u, 0.0, 1.0);
}

double Standardizer::gps_to_unit(double p) const {
  const double u = (p - p_min) / (p_max - p_min);
  return std::clamp(u, 0.0, 1.0);
}

std::vector<double> default_bin_seq(double e_min, double e_max, double delta_n) {
  if (!(delta_n > 0.0)) throw std::invalid_argument("delta_n must be positive");
  if (!(e_min <= e_max)) throw std::invalid_argument("e_min must not exceed e_max");
  const double start = e_min + delta_n / 2.0;
  if (start > e_max) {
    throw EmptyGrid("caliper width leaves no level at or below the exposure maximum");
  }
  // Count levels with a tiny tolerance so accumulated rounding cannot drop the
  // final on-boundary point.
  const auto count =
      static_cast<std::size_t>(std::floor((e_max - start) / delta_n + 1e-12)) + 1;
  std::vector<double> grid(count);
  for (std::size_t k = 0; k < count; ++k) {
    grid[k] = start + static_cast<double>(k) * delta_n;
  }
  return grid;
}

MatchLevelResult match_at_level(double w_star, const Dataset& ds, const GpsEstimate& gps_est,
                                const MatchConfig& cfg, const Standardizer& standardizer,
                                int nthread) {
  const std::size_t n = ds.n_rows();
  if (gps_est.gps.size() != n) {
    throw std::invalid_argument("gps estimate is not aligned with the dataset");
  }
  if (!(cfg.delta_n > 0.0)) throw std::invalid_argument("delta_n must be positive");
  if (!(cfg.scale >= 0.0 && cfg.scale <= 1.0)) {
    throw std::invalid_argument("scale must lie in [0,1]");
  }

  MatchLevelResult result;
  result.counts.assign(n, 0);

  std::vector<std::size_t> candidates;
  const double half = cfg.delta_n / 2.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(ds.exposure()[i] - w_star) <= half) candidates.push_back(i);
  }
  if (candidates.empty()) {
    result.skipped = true;
    return result;
  }

  // Standardized donor coordinates and the recipient-independent exposure term.
  const double lambda = cfg.scale;
  const double w_unit = standardizer.exposure_to_unit(w_star);
  std::vector<double> donor_gps_unit(candidates.size());
  std::vector<double> donor_exposure_term(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const std::size_t i = candidates[k];
    donor_gps_unit[k] = standardizer.gps_to_unit(gps_est.gps[i]);
    donor_exposure_term[k] =
        (1.0 - lambda) * std::abs(w_unit - standardizer.exposure_to_unit(ds.exposure()[i]));
  }

  // Counterfactual GPS of every recipient at this level, standardized.
  const std::vector<double> p_star = evaluate_gps_at(*gps_est.model, w_star, ds, nthread);

  std::vector<std::size_t> choice(n);
  parallel_for(n, nthread, [&](std::size_t j) {
    const double pj = standardizer.gps_to_unit(p_star[j]);
    double best_dist = 0.0;
    std::size_t best_row = 0;
    std::int64_t best_id = 0;
    bool first = true;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      const double dist = lambda * std::abs(pj - donor_gps_unit[k]) + donor_exposure_term[k];
      const std::size_t row = candidates[k];
      const std::int64_t id = ds.ids()[row].value;
      if (first || dist < best_dist || (dist == best_dist && id < best_id)) {
        first = false;
        best_dist = dist;
        best_row = row;
        best_id = id;
      }
    }
    choice[j] = best_row;
  });
  for (std::size_t j = 0; j < n; ++j) result.counts[choice[j]] += 1;
  return result;
}

PseudoPopulation generate_matched_pseudopop(const Dataset& ds, const GpsEstimate& gps_est,
                                            const MatchConfig& cfg, int nthread) {
  const std::size_t n = ds.n_rows();
  if (n == 0) throw std::invalid_argument("cannot match an empty dataset");
  if (!gps_est.model) throw std::invalid_argument("gps estimate carries no model");

  std::vector<double> grid;
  if (cfg.bin_seq) {
    grid = *cfg.bin_seq;
    if (grid.empty()) throw EmptyGrid("explicit bin_seq is empty");
  } else {
    const auto [emin, emax] = std::minmax_element(ds.exposure().begin(), ds.exposure().end());
    grid = default_bin_seq(*emin, *emax, cfg.delta_n);
  }

  const Standardizer standardizer = Standardizer::from(ds.exposure(), gps_est.gps);

  // Levels are independent; each one fills its own slot, so results are
  // identical for every thread count (counts are exact integers).
  std::vector<MatchLevelResult> per_level(grid.size());
  parallel_for(grid.size(), nthread, [&](std::size_t b) {
    per_level[b] = match_at_level(grid[b], ds, gps_est, cfg, standardizer, 1);
  });

  std::vector<std::int64_t> counts(n, 0);
  std::size_t skipped = 0;
  for (std::size_t b = 0; b < grid.size(); ++b) {
    if (per_level[b].skipped) {
      ++skipped;
      log_warn("matching: no candidate within caliper of level w*=" +
               csv::format_double(grid[b]) + "; level skipped");
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) counts[i] += per_level[b].counts[i];
  }

  PseudoPopulation pp;
  pp.approach = Approach::matching;
  pp.data = ds;
  pp.weight.resize(n);
  for (std::size_t i = 0; i < n; ++i) pp.weight[i] = static_cast<double>(counts[i]);
  pp.provenance = {
      {"approach", "matching"},
      {"delta_n", csv::format_double(cfg.delta_n)},
      {"scale", csv::format_double(cfg.scale)},
      {"dist_measure", "l1"},
      {"levels", std::to_string(grid.size())},
      {"skipped_levels", std::to_string(skipped)},
  };
  return pp;
}

}  // namespace gpsinfer
