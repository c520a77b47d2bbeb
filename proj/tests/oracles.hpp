#pragma once

// Independent verification oracles. Everything here is implemented from the
// mathematical definitions, separately from the library code, most of it in
// 50-digit arbitrary precision, so library results can be checked against a
// source of truth that shares no code path with them.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gpsinfer/linalg.hpp"

namespace testoracle {

// Weighted least squares with intercept-free design (pass the full design
// matrix including any constant column). Solves (X'WX + jitter*I) b = X'Wy by
// Gaussian elimination in 50-digit precision, returns the coefficients.
std::vector<double> wls_mp(const gpsinfer::Matrix& design, const std::vector<double>& y,
                           const std::vector<double>* weights, double jitter);

// Weighted Pearson correlation with frequency weights, 50-digit arithmetic.
double weighted_pearson_mp(const std::vector<double>& x, const std::vector<double>& y,
                           const std::vector<double>& w);

// Interpolation quantile (h = (n-1)p + 1 on the sorted sample), 50 digits.
double quantile_mp(std::vector<double> values, double p);

// Rule-of-thumb KDE bandwidth 0.9 * min(sd, IQR/1.34) * n^(-1/5), denominator-N
// sd, zero IQR falling back to the sd, 50 digits.
double silverman_mp(const std::vector<double>& samples);

// Local-linear regression at one point: weighted least squares of y on
// (1, e - w0) with combined weights w_i * phi((e_i - w0)/h), 50 digits.
// Returns the intercept.
double local_linear_mp(const std::vector<double>& y, const std::vector<double>& e,
                       const std::vector<double>& w, double w0, double h);

// Weighted Poisson regression of y on (1, e) with log link: Newton iteration
// on the score equations in 50-digit precision. Returns {intercept, slope}.
std::pair<double, double> poisson_mp(const std::vector<double>& y, const std::vector<double>& e,
                                     const std::vector<double>& w);

// Natural cubic spline design matrix built from the truncated-power-basis
// definition: columns [1, x, N_1(x), ..., N_{K-2}(x)] where
// N_k(x) = d_k(x) - d_{K-1}(x) and
// d_k(x) = ((x - xi_k)_+^3 - (x - xi_K)_+^3) / (xi_K - xi_k)
// for knots xi_1 < ... < xi_K (1-based here for readability).
gpsinfer::Matrix natural_spline_oracle(const std::vector<double>& x,
                                       const std::vector<double>& knots);

// Exhaustive simplex search over convex weights for exactly two base learners:
// scans alpha in {0, step, 2*step, ..., 1} and returns the (alpha, 1-alpha)
// minimizing mean squared error of the blended cross-validated predictions.
std::vector<double> simplex_grid_alpha_2(const gpsinfer::Matrix& cv_predictions,
                                         const std::vector<double>& y, double step);

// Mean squared error of a convex blend of cv prediction columns.
double blend_mse(const gpsinfer::Matrix& cv_predictions, const std::vector<double>& y,
                 const std::vector<double>& alpha);

// Minimal well-formedness check for the emitted SVG/XML: tag balance, quoting,
// declaration/comment handling. Returns true when the document parses.
bool xml_well_formed(const std::string& text);

// Trapezoid integral of f over [lo, hi] with n uniform steps.
double trapezoid(const std::function<double(double)>& f, double lo, double hi, std::size_t n);

// Brute-force caliper matcher for one exposure level: candidates within
// delta/2 of w_star, every recipient picks the candidate minimizing
// lambda*|p*_j - p_i| + (1-lambda)*|w* - e_i| in the given standardized
// coordinates, ties to the smallest id. Mirrors the documented contract with
// an independent O(N^2) scan over all (recipient, candidate) pairs.
struct BruteLevel {
  std::vector<std::int64_t> counts;
  bool skipped = false;
};
BruteLevel brute_match_level(double w_star, const std::vector<double>& exposure,
                             const std::vector<double>& gps_observed,
                             const std::vector<double>& gps_at_level,
                             const std::vector<std::int64_t>& ids, double delta, double lambda,
                             double e_min, double e_max, double p_min, double p_max);

}  // namespace testoracle
