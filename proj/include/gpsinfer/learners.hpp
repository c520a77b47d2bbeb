#pragma once

// Regression learners backing the conditional mean/variance models: weighted
// linear least squares, exact greedy gradient-boosted trees, and a convex
// stacked ensemble of the two. All fits are deterministic given their seed.

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "gpsinfer/linalg.hpp"

namespace gpsinfer {

enum class LearnerKind { linear, gbt, ensemble };

// Boosting hyper-parameters (named after the conventional wrapper fields).
// max_depth = 0 is allowed and means single-leaf trees.
struct HyperParams {
  int nrounds = 20;
  double eta = 0.3;
  int max_depth = 6;
  double min_child_weight = 1.0;
};

// Candidate lists for random search; every list must be non-empty.
struct HyperParamGrid {
  std::vector<int> nrounds = {20};
  std::vector<double> eta = {0.3};
  std::vector<int> max_depth = {6};
  std::vector<double> min_child_weight = {1.0};
};

class RegressionModel {
 public:
  virtual ~RegressionModel() = default;
  // Throws SchemaMismatch when the feature count differs from training.
  virtual std::vector<double> predict(const Matrix& features) const = 0;
  virtual std::size_t n_features() const = 0;
  virtual LearnerKind kind() const = 0;
};

using ModelPtr = std::shared_ptr<const RegressionModel>;

struct LearnerSpec {
  LearnerKind kind = LearnerKind::linear;
  HyperParams params;                // used when kind == gbt
  std::vector<LearnerSpec> bases;    // used when kind == ensemble (linear/gbt only)
  int k_folds = 5;                   // used when kind == ensemble
};

// Weighted least squares with intercept, solved via normal equations with a
// 1e-10 ridge jitter on the diagonal. Requires N >= p+1 rows, non-negative
// weights with a positive sum. Throws SingularDesign when the jittered system
// is still not positive definite.
ModelPtr fit_linear(const Matrix& features, const std::vector<double>& targets,
                    const std::vector<double>* weights = nullptr);

// Additive model f(x) = mean(y) + sum_t eta * tree_t(x). Each tree is grown by
// exact greedy squared-error splits on the current residuals, to depth at most
// max_depth; a node whose sample count is below min_child_weight is not split,
// and splits must strictly reduce squared error. rng_seed is accepted for
// interface symmetry; exact greedy growth uses no randomness.
ModelPtr fit_gbt(const Matrix& features, const std::vector<double>& targets,
                 const HyperParams& hp, std::uint64_t rng_seed = 0);

// Convex stacking: k-fold cross-validated predictions per base learner, simplex
// weights minimizing CV squared error by projected (pairwise) coordinate
// descent (500 sweeps, tolerance 1e-10), then each base refit on all rows.
// Fold assignment is a seeded shuffle, deterministic in rng_seed.
ModelPtr fit_ensemble(const Matrix& features, const std::vector<double>& targets,
                      const std::vector<LearnerSpec>& base_specs, int k_folds,
                      std::uint64_t rng_seed);

// Dispatch on spec.kind.
ModelPtr fit_learner(const LearnerSpec& spec, const Matrix& features,
                     const std::vector<double>& targets, std::uint64_t rng_seed);

// Uniform draw of each field from its candidate list. Consumes exactly four
// generator draws, one per field, in declaration order (nrounds, eta,
// max_depth, min_child_weight) — singleton lists included, so the stream
// position never depends on the grid's contents.
HyperParams sample_hyperparams(const HyperParamGrid& grid, std::mt19937_64& rng);

// Index uniform on {0,...,n-1} from one generator draw (53-bit mantissa path).
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n);

// Introspection used by tests and the tuner's reporting.
struct EnsembleInfo {
  std::vector<double> alpha;      // simplex weights, one per base
  std::vector<double> base_risks; // CV mean squared error per base
  double ensemble_risk = 0.0;     // CV mean squared error of the blend
  Matrix cv_predictions;          // n x bases out-of-fold predictions
};
const EnsembleInfo& ensemble_info(const RegressionModel& model);  // invalid_argument if not ensemble

}  // namespace gpsinfer
