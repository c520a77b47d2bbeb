#include "gpsinfer/weighting.hpp"

#include <algorithm>
#include <stdexcept>

#include "gpsinfer/csv.hpp"

namespace gpsinfer {

std::vector<double> stabilized_weights(const GpsEstimate& gps_est, const WeightConfig& cfg) {
  if (!(cfg.cap > 0.0)) throw std::invalid_argument("weight cap must be positive");
  if (gps_est.gps.size() != gps_est.marginal.size()) {
    throw std::invalid_argument("gps estimate has misaligned columns");
  }
  std::vector<double> w(gps_est.gps.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::min(gps_est.marginal[i] / gps_est.gps[i], cfg.cap);
  }
  return w;
}

PseudoPopulation generate_weighted_pseudopop(const Dataset& ds, const GpsEstimate& gps_est,
                                             const WeightConfig& cfg) {
  if (gps_est.gps.size() != ds.n_rows()) {
    throw std::invalid_argument("gps estimate is not aligned with the dataset");
  }
  PseudoPopulation pp;
  pp.approach = Approach::weighting;
  pp.data = ds;
  pp.weight = stabilized_weights(gps_est, cfg);
  pp.provenance = {
      {"approach", "weighting"},
      {"cap", csv::format_double(cfg.cap)},
  };
  return pp;
}

}  // namespace gpsinfer
