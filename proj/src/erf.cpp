#include "gpsinfer/erf.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "gpsinfer/csv.hpp"
#include "gpsinfer/errors.hpp"
#include "gpsinfer/gps.hpp"
#include "gpsinfer/learners.hpp"
#include "gpsinfer/parallel.hpp"

namespace gpsinfer {

namespace {

constexpr double kWlsJitter = 1e-10;
constexpr double kGridTol = 1e-12;
// A local 2x2 system counts as singular unless its determinant clears this
// relative threshold against S0*S2.
constexpr double kLocalSingularRel = 1e-14;

double checked_weight(double w, std::size_t i) {
  if (!(w >= 0.0) || !std::isfinite(w))
    throw std::invalid_argument("weight at row " + std::to_string(i) +
                                " must be finite and non-negative");
  return w;
}

struct MomentSums {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, t0 = 0.0, t1 = 0.0;
};

// Intercept of the WLS fit of y on (1, e - w); NaN-free only when the caller
// has verified the system is not singular.
double local_intercept(const MomentSums& m) {
  const double denom = m.s0 * m.s2 - m.s1 * m.s1;
  return (m.s2 * m.t0 - m.s1 * m.t1) / denom;
}

bool local_singular(double s0, double s2, double s1) {
  const double denom = s0 * s2 - s1 * s1;
  return !(denom > s0 * s2 * kLocalSingularRel);
}

}  // namespace

std::vector<double> BandwidthGrid::candidates() const {
  if (!(step > 0.0) || !(start > 0.0) || !std::isfinite(start) || !std::isfinite(step) ||
      !std::isfinite(end))
    throw std::invalid_argument("bandwidth grid requires positive start and step");
  if (start > end + kGridTol) throw std::invalid_argument("bandwidth grid start exceeds end");
  std::vector<double> out;
  for (std::size_t k = 0;; ++k) {
    const double h = start + static_cast<double>(k) * step;
    if (h > end + kGridTol) break;
    out.push_back(h);
  }
  return out;
}

ParametricErf estimate_pmetric_erf(const PseudoPopulation& pp, OutcomeFamily family) {
  if (!pp.data.has_outcome())
    throw std::invalid_argument("parametric exposure-response fit requires an outcome");
  const auto& e = pp.data.exposure();
  const auto& y = pp.data.outcome();
  const auto& w = pp.weight;
  if (w.size() != e.size()) throw std::invalid_argument("weights misaligned with rows");

  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    checked_weight(w[i], i);
    if (w[i] > 0.0) {
      ++n_pos;
      if (family == OutcomeFamily::poisson && y[i] < 0.0)
        throw std::invalid_argument("poisson family requires non-negative outcomes");
    }
  }
  if (n_pos < 3)
    throw std::invalid_argument("parametric fit needs at least 3 positively weighted rows");

  ParametricErf result;
  result.family = family;

  if (family == OutcomeFamily::gaussian) {
    MomentSums m;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (w[i] <= 0.0) continue;
      m.s0 += w[i];
      m.s1 += w[i] * e[i];
      m.s2 += w[i] * e[i] * e[i];
      m.t0 += w[i] * y[i];
      m.t1 += w[i] * e[i] * y[i];
    }
    const double denom = m.s0 * m.s2 - m.s1 * m.s1;
    if (!(denom > 0.0) || !std::isfinite(denom))
      throw DegenerateDesign("exposure is constant among positively weighted rows");
    result.slope = (m.s0 * m.t1 - m.s1 * m.t0) / denom;
    result.intercept = (m.t0 - result.slope * m.s1) / m.s0;
    return result;
  }

  // Poisson with log link: IRLS on the weighted score equations. Working
  // weight w_i * mu_i, working response eta_i + (y_i - mu_i) / mu_i.
  double sum_w = 0.0, sum_wy = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (w[i] <= 0.0) continue;
    sum_w += w[i];
    sum_wy += w[i] * y[i];
  }
  double beta0 = std::log(std::max(sum_wy / sum_w, 1e-8));
  double beta1 = 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    MomentSums m;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (w[i] <= 0.0) continue;
      const double eta = beta0 + beta1 * e[i];
      const double mu = std::exp(eta);
      if (!std::isfinite(mu) || !(mu > 0.0))
        throw DegenerateDesign("poisson mean overflowed during IRLS");
      const double ww = w[i] * mu;
      const double z = eta + (y[i] - mu) / mu;
      m.s0 += ww;
      m.s1 += ww * e[i];
      m.s2 += ww * e[i] * e[i];
      m.t0 += ww * z;
      m.t1 += ww * e[i] * z;
    }
    const double denom = m.s0 * m.s2 - m.s1 * m.s1;
    if (!(denom > 0.0) || !std::isfinite(denom))
      throw DegenerateDesign("singular working design in poisson IRLS");
    const double new_beta1 = (m.s0 * m.t1 - m.s1 * m.t0) / denom;
    const double new_beta0 = (m.t0 - new_beta1 * m.s1) / m.s0;
    const double delta = std::max(std::abs(new_beta0 - beta0), std::abs(new_beta1 - beta1));
    beta0 = new_beta0;
    beta1 = new_beta1;
    if (delta < 1e-10) {
      result.intercept = beta0;
      result.slope = beta1;
      return result;
    }
  }
  throw NonConvergence("poisson IRLS did not converge within 100 iterations");
}

Matrix natural_spline_design(const std::vector<double>& x, const std::vector<double>& knots) {
  const std::size_t big_k = knots.size();
  if (big_k < 2) throw std::invalid_argument("natural spline needs at least 2 knots");
  for (std::size_t k = 1; k < big_k; ++k)
    if (!(knots[k] > knots[k - 1]))
      throw DegenerateDesign("natural spline knots are not strictly increasing");

  const auto cube_pos = [](double v) { return v > 0.0 ? v * v * v : 0.0; };
  const double xi_last = knots[big_k - 1];
  // d_k(x) = [(x - xi_k)^3_+ - (x - xi_K)^3_+] / (xi_K - xi_k)
  const auto d = [&](std::size_t k, double xv) {
    return (cube_pos(xv - knots[k]) - cube_pos(xv - xi_last)) / (xi_last - knots[k]);
  };

  Matrix design(x.size(), big_k);  // 1, x, then K-2 natural basis columns
  for (std::size_t i = 0; i < x.size(); ++i) {
    design.at(i, 0) = 1.0;
    design.at(i, 1) = x[i];
    const double d_ref = d(big_k - 2, x[i]);
    for (std::size_t k = 0; k + 2 < big_k; ++k) design.at(i, k + 2) = d(k, x[i]) - d_ref;
  }
  return design;
}

ErfEstimate estimate_semipmetric_erf(const PseudoPopulation& pp, int spline_df,
                                     const std::vector<double>& w_vals) {
  if (!pp.data.has_outcome())
    throw std::invalid_argument("spline exposure-response fit requires an outcome");
  if (spline_df < 3) throw std::invalid_argument("spline_df must be at least 3");
  const auto& e = pp.data.exposure();
  const auto& y = pp.data.outcome();
  const auto& w = pp.weight;
  if (w.size() != e.size()) throw std::invalid_argument("weights misaligned with rows");

  std::vector<double> pos_e;
  for (std::size_t i = 0; i < e.size(); ++i) {
    checked_weight(w[i], i);
    if (w[i] > 0.0) pos_e.push_back(e[i]);
  }
  const auto df = static_cast<std::size_t>(spline_df);
  if (pos_e.size() <= df + 1)
    throw DegenerateDesign("too few positively weighted rows for the requested spline_df");

  // Boundary knots at the extremes, interior knots at quantiles i/df.
  std::vector<double> knots;
  knots.push_back(*std::min_element(pos_e.begin(), pos_e.end()));
  for (std::size_t i = 1; i < df; ++i)
    knots.push_back(quantile(pos_e, static_cast<double>(i) / static_cast<double>(df)));
  knots.push_back(*std::max_element(pos_e.begin(), pos_e.end()));

  const Matrix design = natural_spline_design(e, knots);
  std::vector<double> beta;
  try {
    beta = wls_solve(design, y, &w, kWlsJitter);
  } catch (const SingularDesign& ex) {
    throw DegenerateDesign(std::string("spline design is singular: ") + ex.what());
  }

  ErfEstimate est;
  est.w_vals = w_vals;
  const Matrix eval = natural_spline_design(w_vals, knots);
  est.estimates.resize(w_vals.size());
  for (std::size_t i = 0; i < w_vals.size(); ++i) {
    double v = 0.0;
    for (std::size_t j = 0; j < eval.cols; ++j) v += eval.at(i, j) * beta[j];
    est.estimates[i] = v;
  }
  return est;
}

ErfEstimate estimate_npmetric_erf(const std::vector<double>& outcome,
                                  const std::vector<double>& exposure,
                                  const std::vector<double>& weights,
                                  const BandwidthGrid& bw_grid,
                                  const std::vector<double>& w_vals, KernelKind /*kernel*/,
                                  int nthread) {
  const std::size_t n = exposure.size();
  if (outcome.size() != n || weights.size() != n)
    throw std::invalid_argument("outcome/exposure/weights must be aligned");

  std::vector<std::size_t> pos_rows;
  for (std::size_t i = 0; i < n; ++i) {
    checked_weight(weights[i], i);
    if (weights[i] > 0.0) pos_rows.push_back(i);
  }
  bool two_distinct = false;
  for (std::size_t k = 1; k < pos_rows.size(); ++k)
    if (exposure[pos_rows[k]] != exposure[pos_rows[0]]) two_distinct = true;
  if (!two_distinct)
    throw std::invalid_argument(
        "local-linear fit needs at least 2 positively weighted distinct exposures");

  const std::vector<double> hs = bw_grid.candidates();
  if (hs.empty()) throw EmptyGrid("bandwidth grid produced no candidates");

  const double phi0 = normal_pdf(0.0);

  // Moment sums at w over every row (kernel weight = row weight * phi).
  const auto sums_at = [&](double w, double h) {
    MomentSums m;
    for (std::size_t i = 0; i < n; ++i) {
      if (weights[i] <= 0.0) continue;
      const double k = weights[i] * normal_pdf((exposure[i] - w) / h);
      const double de = exposure[i] - w;
      m.s0 += k;
      m.s1 += k * de;
      m.s2 += k * de * de;
      m.t0 += k * outcome[i];
      m.t1 += k * de * outcome[i];
    }
    return m;
  };

  // Leave-one-out CV risk for one bandwidth; NaN when any held-out local fit
  // is singular (that bandwidth is excluded from selection).
  const auto cv_risk = [&](double h) -> double {
    double num = 0.0, den = 0.0;
    for (const std::size_t i : pos_rows) {
      MomentSums m = sums_at(exposure[i], h);
      // Holding out row i at w = e_i only removes its phi(0) terms: the row's
      // (e_i - w) factor is exactly zero in s1, s2 and t1.
      m.s0 -= weights[i] * phi0;
      m.t0 -= weights[i] * phi0 * outcome[i];
      if (local_singular(m.s0, m.s2, m.s1)) return std::numeric_limits<double>::quiet_NaN();
      const double mu = local_intercept(m);
      const double r = outcome[i] - mu;
      num += weights[i] * r * r;
      den += weights[i];
    }
    return num / den;
  };

  ErfEstimate est;
  est.risks.resize(hs.size());
  parallel_for(hs.size(), nthread, [&](std::size_t j) {
    est.risks[j] = BandwidthRisk{hs[j], cv_risk(hs[j])};
  });

  std::size_t best = hs.size();
  for (std::size_t j = 0; j < hs.size(); ++j) {
    const double r = est.risks[j].cv_risk;
    if (std::isnan(r)) continue;
    if (best == hs.size() || r < est.risks[best].cv_risk) best = j;
  }
  if (best == hs.size())
    throw AllBandwidthsDegenerate("every candidate bandwidth produced a singular held-out fit");
  est.optimal_bw = hs[best];

  est.w_vals = w_vals;
  est.estimates.assign(w_vals.size(), std::numeric_limits<double>::quiet_NaN());
  const double h_opt = hs[best];
  parallel_for(w_vals.size(), nthread, [&](std::size_t j) {
    const MomentSums m = sums_at(w_vals[j], h_opt);
    if (!local_singular(m.s0, m.s2, m.s1)) est.estimates[j] = local_intercept(m);
  });
  return est;
}

ErfEstimate bootstrap_erf_ci(const PseudoPopulation& pp, std::size_t m, std::size_t b_replicates,
                             const NpErfConfig& cfg, std::uint64_t rng_seed, double alpha,
                             int nthread) {
  if (!pp.data.has_outcome())
    throw std::invalid_argument("bootstrap bands require an outcome");
  const std::size_t n = pp.data.n_rows();
  if (m == 0 || m > n) throw std::invalid_argument("bootstrap m must satisfy 1 <= m <= n");
  if (b_replicates < 2) throw std::invalid_argument("bootstrap needs at least 2 replicates");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");

  ErfEstimate est = estimate_npmetric_erf(pp.data.outcome(), pp.data.exposure(), pp.weight,
                                          cfg.bw_grid, cfg.w_vals, cfg.kernel, nthread);

  const std::size_t n_w = cfg.w_vals.size();
  std::vector<std::vector<double>> replicate(b_replicates);
  parallel_for(b_replicates, nthread, [&](std::size_t b) {
    std::mt19937_64 rng(rng_seed + static_cast<std::uint64_t>(b) + 1);
    std::vector<double> ry(m), re(m), rw(m);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = uniform_index(rng, n);
      ry[k] = pp.data.outcome()[i];
      re[k] = pp.data.exposure()[i];
      rw[k] = pp.weight[i];
    }
    const ErfEstimate rep =
        estimate_npmetric_erf(ry, re, rw, cfg.bw_grid, cfg.w_vals, cfg.kernel, 1);
    replicate[b] = rep.estimates;
  });

  const boost::math::normal_distribution<double> std_normal;
  const double z = boost::math::quantile(std_normal, 1.0 - alpha / 2.0);
  const double scale = z * std::sqrt(static_cast<double>(m) / static_cast<double>(n));

  est.ci_lower.emplace(n_w, 0.0);
  est.ci_upper.emplace(n_w, 0.0);
  for (std::size_t j = 0; j < n_w; ++j) {
    double mean = 0.0;
    for (std::size_t b = 0; b < b_replicates; ++b) mean += replicate[b][j];
    mean /= static_cast<double>(b_replicates);
    double ss = 0.0;
    for (std::size_t b = 0; b < b_replicates; ++b) {
      const double d = replicate[b][j] - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(b_replicates - 1));
    (*est.ci_lower)[j] = est.estimates[j] - scale * sd;
    (*est.ci_upper)[j] = est.estimates[j] + scale * sd;
  }
  return est;
}

std::string erf_to_csv(const ErfEstimate& est) {
  std::string out = "w,erf,ci_lower,ci_upper\n";
  for (std::size_t i = 0; i < est.w_vals.size(); ++i) {
    std::vector<std::string> fields{csv::format_double(est.w_vals[i]),
                                    csv::format_double(est.estimates[i]), "", ""};
    if (est.ci_lower) fields[2] = csv::format_double((*est.ci_lower)[i]);
    if (est.ci_upper) fields[3] = csv::format_double((*est.ci_upper)[i]);
    out += csv::format_row(fields);
  }
  return out;
}

void write_erf_csv(const ErfEstimate& est, const std::string& path) {
  csv::write_file(path, erf_to_csv(est));
}

ErfEstimate read_erf_csv(const std::string& path) {
  const csv::Table table = csv::read_file(path);
  const std::size_t c_w = csv::column_index(table, "w");
  const std::size_t c_erf = csv::column_index(table, "erf");
  const std::size_t c_lo = csv::column_index(table, "ci_lower");
  const std::size_t c_hi = csv::column_index(table, "ci_upper");
  ErfEstimate est;
  bool any_ci = false;
  for (const auto& row : table.rows)
    if (!row[c_lo].empty() || !row[c_hi].empty()) any_ci = true;
  if (any_ci) {
    est.ci_lower.emplace();
    est.ci_upper.emplace();
  }
  std::size_t line = 0;
  for (const auto& row : table.rows) {
    ++line;
    est.w_vals.push_back(csv::parse_double(row[c_w], line, "w"));
    est.estimates.push_back(csv::parse_double(row[c_erf], line, "erf"));
    if (any_ci) {
      est.ci_lower->push_back(csv::parse_double(row[c_lo], line, "ci_lower"));
      est.ci_upper->push_back(csv::parse_double(row[c_hi], line, "ci_upper"));
    }
  }
  return est;
}

std::string risks_to_csv(const ErfEstimate& est) {
  std::string out = "bandwidth,cv_risk\n";
  for (const auto& r : est.risks)
    out += csv::format_row({csv::format_double(r.bandwidth), csv::format_double(r.cv_risk)});
  return out;
}

void write_risks_csv(const ErfEstimate& est, const std::string& path) {
  csv::write_file(path, risks_to_csv(est));
}

}  // namespace gpsinfer
