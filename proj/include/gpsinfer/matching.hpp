#pragma once

// Caliper matching on (GPS, exposure): for each exposure level w* on a grid,
// every trimmed row acts as a recipient whose counterfactual GPS at w* is
// matched to the nearest donor among rows whose observed exposure lies within
// the caliper; donors accumulate integer replication counts.

#include <cstdint>
#include <optional>
#include <vector>

#include "gpsinfer/dataset.hpp"
#include "gpsinfer/gps.hpp"
#include "gpsinfer/pseudo_population.hpp"

namespace gpsinfer {

enum class DistMeasure { l1 };

struct MatchConfig {
  double delta_n = 1.0;              // caliper width (> 0)
  double scale = 0.5;                // lambda in [0,1]: GPS vs exposure emphasis
  DistMeasure dist_measure = DistMeasure::l1;
  std::optional<std::vector<double>> bin_seq;  // explicit grid; default derived
};

// Min-max standardization to [0,1] with clamping, frozen over the trimmed data.
struct Standardizer {
  double e_min = 0.0, e_max = 1.0;
  double p_min = 0.0, p_max = 1.0;

  // Both ranges must be non-degenerate (max > min): DegenerateStandardizer.
  static Standardizer from(const std::vector<double>& exposure,
                           const std::vector<double>& gps);
  double exposure_to_unit(double e) const;
  double gps_to_unit(double p) const;
};

// Default level grid {e_min + delta/2 + k*delta : k >= 0, value <= e_max}.
// Throws EmptyGrid when even the first point exceeds e_max.
std::vector<double> default_bin_seq(double e_min, double e_max, double delta_n);

struct MatchLevelResult {
  std::vector<std::int64_t> counts;  // donor selection counts, aligned to rows
  bool skipped = false;              // true iff the caliper caught no candidate
};

// One grid level: candidates C = { i : |e_i - w*| <= delta/2 }. If C is empty
// the level is skipped (all-zero counts). Otherwise each row j selects the
// candidate minimizing scale*|p~*_j - p~_i| + (1-scale)*|w~* - e~_i| in
// standardized coordinates; ties go to the smallest observation id.
MatchLevelResult match_at_level(double w_star, const Dataset& ds, const GpsEstimate& gps_est,
                                const MatchConfig& cfg, const Standardizer& standardizer,
                                int nthread = 1);

// Full matching run over the level grid. Rows keep their position; weights are
// the integer counts summed over non-skipped levels (skipped levels WARN-log).
// Total weight equals n_rows * (number of non-skipped levels) by construction.
PseudoPopulation generate_matched_pseudopop(const Dataset& ds, const GpsEstimate& gps_est,
                                            const MatchConfig& cfg, int nthread = 1);

}  // namespace gpsinfer
