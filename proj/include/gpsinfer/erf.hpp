#pragma once

// Exposure-response estimation on a weighted pseudo-population: a linear
// (gaussian) or log-linear (poisson) parametric fit, a natural-cubic-spline
// semi-parametric fit, a local-linear kernel regression with leave-one-out
// cross-validated bandwidth, and m-out-of-n bootstrap confidence bands.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gpsinfer/linalg.hpp"
#include "gpsinfer/pseudo_population.hpp"

namespace gpsinfer {

enum class OutcomeFamily { gaussian, poisson };
enum class KernelKind { gaussian };

struct BandwidthGrid {
  double start = 0.2;
  double end = 1.0;
  double step = 0.1;

  // Candidates {start + k*step : k >= 0, value <= end + 1e-12}.
  std::vector<double> candidates() const;
};

struct ParametricErf {
  double intercept = 0.0;
  double slope = 0.0;
  OutcomeFamily family = OutcomeFamily::gaussian;
};

struct BandwidthRisk {
  double bandwidth = 0.0;
  double cv_risk = 0.0;  // NaN when the bandwidth was excluded as degenerate
};

struct ErfEstimate {
  std::vector<double> w_vals;
  std::vector<double> estimates;
  std::optional<double> optimal_bw;           // non-parametric only
  std::vector<BandwidthRisk> risks;           // non-parametric only
  std::optional<std::vector<double>> ci_lower;
  std::optional<std::vector<double>> ci_upper;
};

// Weighted GLM of outcome on (1, exposure). gaussian: one weighted
// least-squares solve. poisson (log link): IRLS until max |delta beta| < 1e-10,
// at most 100 iterations (NonConvergence), outcomes must be non-negative.
// Requires an outcome and >= 3 positively weighted rows.
ParametricErf estimate_pmetric_erf(const PseudoPopulation& pp, OutcomeFamily family);

// Weighted least squares on a natural cubic spline basis of the exposure with
// spline_df (>= 3) degrees of freedom: interior knots at the interpolation
// quantiles i/df of the positively weighted exposures, boundary knots at their
// min/max. Returns the fitted curve at w_vals.
ErfEstimate estimate_semipmetric_erf(const PseudoPopulation& pp, int spline_df,
                                     const std::vector<double>& w_vals);

// Local-linear regression with a Gaussian kernel. The bandwidth minimizes the
// weighted leave-one-out CV risk over the grid (ties -> smallest h);
// bandwidths where any held-out local fit is singular are excluded
// (AllBandwidthsDegenerate if none survive). Requires >= 2 positively
// weighted distinct exposures.
ErfEstimate estimate_npmetric_erf(const std::vector<double>& outcome,
                                  const std::vector<double>& exposure,
                                  const std::vector<double>& weights,
                                  const BandwidthGrid& bw_grid,
                                  const std::vector<double>& w_vals,
                                  KernelKind kernel = KernelKind::gaussian, int nthread = 1);

struct NpErfConfig {
  BandwidthGrid bw_grid;
  std::vector<double> w_vals;
  KernelKind kernel = KernelKind::gaussian;
};

// m-out-of-n bootstrap for the non-parametric curve: B replicates of m rows
// drawn uniformly with replacement (weights kept), replicate b seeded with
// rng_seed + b; bands are mu(w) +/- z_{1-alpha/2} * sqrt(m/n) * sd_b(mu*_b(w))
// around the full-data estimate, sd over replicates with denominator B-1.
ErfEstimate bootstrap_erf_ci(const PseudoPopulation& pp, std::size_t m, std::size_t b_replicates,
                             const NpErfConfig& cfg, std::uint64_t rng_seed,
                             double alpha = 0.05, int nthread = 1);

// erf.csv: w, erf, ci_lower, ci_upper (CI cells empty when absent).
std::string erf_to_csv(const ErfEstimate& est);
void write_erf_csv(const ErfEstimate& est, const std::string& path);
ErfEstimate read_erf_csv(const std::string& path);

// risks.csv: bandwidth, cv_risk.
std::string risks_to_csv(const ErfEstimate& est);
void write_risks_csv(const ErfEstimate& est, const std::string& path);

// Natural cubic spline design matrix (exposed for verification): columns
// [1, x, basis...] with df+1 total columns; knots must be strictly increasing.
Matrix natural_spline_design(const std::vector<double>& x, const std::vector<double>& knots);

}  // namespace gpsinfer
