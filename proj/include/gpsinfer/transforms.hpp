#pragma once

// Univariate covariate transforms used when tuning the exposure-model feature
// matrix. Transforms apply only to numeric covariates and only inside the
// exposure model's feature encoding; reported covariates stay untouched.

#include <functional>
#include <string>
#include <vector>

#include "gpsinfer/dataset.hpp"

namespace gpsinfer {

struct Transformer {
  std::string name;
  std::function<double(double)> fn;
};

// Built-ins: "pow2" (x^2) and "pow3" (x^3). Throws std::invalid_argument for
// unknown names.
Transformer make_transformer(const std::string& name);

// Returns a copy of `column` with the transform applied elementwise. Throws
// NonNumericColumn for categorical columns (those are never transformed).
CovariateColumn apply_transformer(const Transformer& transformer,
                                  const CovariateColumn& column);

// Ordered record of transform applications: (covariate name, transformer).
// Repeated applications to one covariate compose in ledger order, e.g. pow2
// applied twice is the 4th power.
using TransformLedger = std::vector<std::pair<std::string, Transformer>>;

// Folds every ledger entry for `column.name` over the column, in order.
CovariateColumn apply_ledger(const TransformLedger& ledger, const CovariateColumn& column);

}  // namespace gpsinfer
