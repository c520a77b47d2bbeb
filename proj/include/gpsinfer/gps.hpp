#pragma once

// Generalized propensity scores for a continuous exposure: the estimated
// conditional density q(e, x) of exposure given covariates, in two flavours —
// "normal" (homoskedastic normal residuals around a fitted mean model) and
// "kernel" (Gaussian KDE of variance-standardized residuals). Also estimates
// the marginal exposure density used by stabilized weighting.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gpsinfer/dataset.hpp"
#include "gpsinfer/learners.hpp"
#include "gpsinfer/transforms.hpp"

namespace gpsinfer {

enum class DensityKind { normal, kernel };

// Conditional densities never report below this floor.
inline constexpr double kGpsFloor = 1e-300;
// Conditional variance predictions are floored here (kernel kind).
inline constexpr double kVarianceFloor = 1e-8;

// Standard normal pdf.
double normal_pdf(double z);

// Gaussian kernel density estimate: f(t) = (1/(n*h)) * sum_i pdf((t - s_i)/h).
// Requires n >= 1 and h > 0.
std::vector<double> kernel_density(const std::vector<double>& samples, double bandwidth,
                                   const std::vector<double>& eval_points);

// Rule-of-thumb bandwidth h = 0.9 * min(sd, IQR/1.34) * n^(-1/5); sd uses
// denominator N, IQR comes from the interpolation quantile, and a zero IQR
// falls back to the sd alone. Requires n >= 2 and positive variance
// (DegenerateSample otherwise).
double silverman_bandwidth(const std::vector<double>& samples);

// Feature pipeline captured at training time: covariate names/kinds/levels and
// any transform ledger, so any later dataset is encoded exactly as training.
class FeatureEncoder {
 public:
  FeatureEncoder() = default;
  FeatureEncoder(const Dataset& ds, const TransformLedger& ledger);

  // One-hot encodes categoricals against training levels (first level dropped
  // as reference), applies the transform ledger to numerics. Throws
  // SchemaMismatch on any covariate/kind/level difference.
  Matrix encode(const Dataset& ds) const;

  std::size_t n_features() const { return n_features_; }

 private:
  struct Column {
    std::string name;
    CovariateKind kind;
    std::vector<std::string> levels;  // categorical training levels
  };
  std::vector<Column> columns_;
  TransformLedger ledger_;
  std::size_t n_features_ = 0;
};

// Marginal density parameters (kind shared with the conditional model).
struct MarginalDensity {
  DensityKind kind = DensityKind::normal;
  double mean = 0.0;               // normal kind
  double sd = 1.0;                 // normal kind (denominator-N sd)
  std::vector<double> samples;     // kernel kind: exposure sample
  double bandwidth = 1.0;          // kernel kind

  double density_at(double e) const;
};

// Estimated marginal exposure density f_E. Requires n >= 2 and positive
// exposure variance (DegenerateExposure).
MarginalDensity marginal_density(const std::vector<double>& exposure, DensityKind kind);

struct GpsModel {
  DensityKind density_kind = DensityKind::normal;
  FeatureEncoder encoder;
  ModelPtr mean_model;
  double sd_global = 1.0;               // normal kind: sigma-hat
  ModelPtr variance_model;               // kernel kind: E[r^2 | x]
  std::vector<double> residual_samples;  // kernel kind: standardized residuals
  double residual_bandwidth = 1.0;       // kernel kind: KDE bandwidth
  MarginalDensity marginal;
};

struct GpsEstimate {
  std::vector<ObservationId> ids;
  std::vector<double> gps;               // q(e_i, x_i), floored at kGpsFloor
  std::vector<double> marginal;          // f_E(e_i)
  std::shared_ptr<const GpsModel> model;
};

// Fits the conditional exposure density on ds (>= 10 rows, positive exposure
// variance else DegenerateExposure). The learner seed is rng_seed; the kernel
// kind's variance model uses rng_seed + 1. The optional ledger transforms
// numeric covariates inside the model's feature encoding only. Computation of
// per-row densities parallelizes over rows; output is identical for any
// nthread.
GpsEstimate estimate_gps(const Dataset& ds, DensityKind density_kind,
                         const LearnerSpec& learner_spec, std::uint64_t rng_seed,
                         int nthread = 1, const TransformLedger& ledger = {});

// Counterfactual density q(w_star, x_j) for every row of ds. Evaluating at a
// row's own observed exposure reproduces GpsEstimate.gps bit-for-bit.
std::vector<double> evaluate_gps_at(const GpsModel& model, double w_star,
                                    const Dataset& ds, int nthread = 1);

// Conditional mean and sd per row (sd is constant sigma-hat for the normal
// kind, sqrt of the floored variance prediction for the kernel kind).
struct ConditionalStats {
  std::vector<double> mean;
  std::vector<double> sd;
};
ConditionalStats predict_conditional_stats(const GpsModel& model, const Dataset& ds);

// GpsEstimate rows aligned to a subset of positions (used with quantile trims).
GpsEstimate subset_gps(const GpsEstimate& est, const std::vector<std::size_t>& rows);

// CSV round trip: columns id, gps, marginal_density (model not serialized).
std::string gps_to_csv(const GpsEstimate& est);
void write_gps_csv(const GpsEstimate& est, const std::string& path);

}  // namespace gpsinfer
