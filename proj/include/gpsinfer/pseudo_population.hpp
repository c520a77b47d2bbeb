#pragma once

// A pseudo-population: the rows that entered construction together with one
// non-negative weight per row (integer replication counts for matching,
// capped stabilized weights for weighting). Rows keep their original ids and
// untransformed covariates.

#include <string>
#include <utility>
#include <vector>

#include "gpsinfer/dataset.hpp"

namespace gpsinfer {

enum class Approach { matching, weighting };

const char* approach_name(Approach a);

struct PseudoPopulation {
  Dataset data;
  std::vector<double> weight;  // aligned with data rows; >= 0
  Approach approach = Approach::weighting;
  // Construction details (trims, config, density kind, hyper-parameters...)
  // carried as ordered key/value pairs for reporting.
  std::vector<std::pair<std::string, std::string>> provenance;
};

// CSV columns: id, exposure, covariates..., outcome (if present), then
// "counter_weight" (matching) or "stabilized_weight" (weighting).
std::string pseudo_population_to_csv(const PseudoPopulation& pp);
void write_pseudo_population_csv(const PseudoPopulation& pp, const std::string& path);

// Reads a pseudo-population CSV back. weight_col may be empty to auto-detect
// ("counter_weight" or "stabilized_weight"). Columns other than id/exposure/
// outcome/weight become covariates; a column is categorical when listed in
// categorical_cols.
PseudoPopulation read_pseudo_population_csv(
    const std::string& path, const std::string& exposure_col = "exposure",
    const std::string& outcome_col = "outcome", const std::string& id_col = "id",
    const std::string& weight_col = "",
    const std::vector<std::string>& categorical_cols = {});

}  // namespace gpsinfer
