#pragma once

// Stabilized inverse-density weighting: w_i = min(f_E(e_i) / q(e_i, x_i), cap).
// No renormalization is applied; the cap (default 10) bounds extreme ratios.

#include "gpsinfer/dataset.hpp"
#include "gpsinfer/gps.hpp"
#include "gpsinfer/pseudo_population.hpp"

namespace gpsinfer {

struct WeightConfig {
  double cap = 10.0;  // > 0; +infinity disables capping
};

// Per-row stabilized weights from an estimate's marginal and conditional
// densities (both already floored, so ratios are finite).
std::vector<double> stabilized_weights(const GpsEstimate& gps_est, const WeightConfig& cfg);

// All rows are kept; weights as above.
PseudoPopulation generate_weighted_pseudopop(const Dataset& ds, const GpsEstimate& gps_est,
                                             const WeightConfig& cfg);

}  // namespace gpsinfer
