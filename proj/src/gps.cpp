#include "gpsinfer/gps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gpsinfer/csv.hpp"
#include "gpsinfer/errors.hpp"
#include "gpsinfer/parallel.hpp"

namespace gpsinfer {

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Denominator-N variance; the single sd convention used throughout.
double variance_pop(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

}  // namespace

double normal_pdf(double z) {
  constexpr double inv_sqrt_2pi = 0.3989422804014326779;  // 1/sqrt(2*pi)
  return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

std::vector<double> kernel_density(const std::vector<double>& samples, double bandwidth,
                                   const std::vector<double>& eval_points) {
  if (samples.empty()) throw std::invalid_argument("kernel_density needs >= 1 sample");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  const double n = static_cast<double>(samples.size());
  std::vector<double> out(eval_points.size());
  for (std::size_t k = 0; k < eval_points.size(); ++k) {
    double s = 0.0;
    for (double si : samples) s += normal_pdf((eval_points[k] - si) / bandwidth);
    out[k] = s / (n * bandwidth);
  }
  return out;
}

double silverman_bandwidth(const std::vector<double>& samples) {
  if (samples.size() < 2) throw DegenerateSample("bandwidth needs >= 2 samples");
  const double var = variance_pop(samples);
  if (!(var > 0.0)) throw DegenerateSample("bandwidth needs positive sample variance");
  const double sd = std::sqrt(var);
  const double iqr = quantile(samples, 0.75) - quantile(samples, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
}

// ---- FeatureEncoder ----

FeatureEncoder::FeatureEncoder(const Dataset& ds, const TransformLedger& ledger)
    : ledger_(ledger) {
  for (const auto& col : ds.covariates()) {
    Column c;
    c.name = col.name;
    c.kind = col.kind;
    c.levels = col.levels;
    n_features_ += col.kind == CovariateKind::numeric
                       ? 1
                       : (col.levels.empty() ? 0 : col.levels.size() - 1);
    columns_.push_back(std::move(c));
  }
}

Matrix FeatureEncoder::encode(const Dataset& ds) const {
  const std::size_t n = ds.n_rows();
  Matrix out(n, n_features_);
  std::size_t feature = 0;
  for (const auto& spec : columns_) {
    if (!ds.has_covariate(spec.name)) {
      throw SchemaMismatch("dataset lacks covariate '" + spec.name + "'");
    }
    const CovariateColumn& col = ds.covariate(spec.name);
    if (col.kind != spec.kind) {
      throw SchemaMismatch("covariate '" + spec.name + "' kind differs from training");
    }
    if (spec.kind == CovariateKind::numeric) {
      const CovariateColumn transformed = apply_ledger(ledger_, col);
      for (std::size_t i = 0; i < n; ++i) out.at(i, feature) = transformed.numeric[i];
      ++feature;
    } else {
      // One-hot against the training levels, first level as reference.
      const std::size_t k = spec.levels.size();
      for (std::size_t i = 0; i < n; ++i) {
        const std::string& label = col.levels[col.codes[i]];
        const auto it = std::find(spec.levels.begin(), spec.levels.end(), label);
        if (it == spec.levels.end()) {
          throw SchemaMismatch("covariate '" + spec.name + "' has unseen level '" + label + "'");
        }
        const auto code = static_cast<std::size_t>(it - spec.levels.begin());
        if (code > 0) out.at(i, feature + code - 1) = 1.0;
      }
      feature += k > 0 ? k - 1 : 0;
    }
  }
  return out;
}

// ---- Marginal density ----

double MarginalDensity::density_at(double e) const {
  if (kind == DensityKind::normal) {
    return normal_pdf((e - mean) / sd) / sd;
  }
  double s = 0.0;
  for (double si : samples) s += normal_pdf((e - si) / bandwidth);
  return s / (static_cast<double>(samples.size()) * bandwidth);
}

MarginalDensity marginal_density(const std::vector<double>& exposure, DensityKind kind) {
  if (exposure.size() < 2) throw DegenerateExposure("marginal density needs >= 2 rows");
  const double var = variance_pop(exposure);
  if (!(var > 0.0)) throw DegenerateExposure("marginal density needs positive exposure variance");
  MarginalDensity out;
  out.kind = kind;
  if (kind == DensityKind::normal) {
    out.mean = mean_of(exposure);
    out.sd = std::sqrt(var);
  } else {
    out.samples = exposure;
    out.bandwidth = silverman_bandwidth(exposure);
  }
  return out;
}

// ---- GPS estimation ----

namespace {

// Single code path for conditional densities, shared by estimation and
// counterfactual evaluation so the two agree bit-for-bit.
double conditional_density(const GpsModel& model, double e, double mean, double sd) {
  double q;
  if (model.density_kind == DensityKind::normal) {
    q = normal_pdf((e - mean) / model.sd_global) / model.sd_global;
  } else {
    const double eps = (e - mean) / sd;
    double s = 0.0;
    for (double si : model.residual_samples) {
      s += normal_pdf((eps - si) / model.residual_bandwidth);
    }
    const double f_eps =
        s / (static_cast<double>(model.residual_samples.size()) * model.residual_bandwidth);
    q = f_eps / sd;
  }
  return std::max(q, kGpsFloor);
}

}  // namespace

ConditionalStats predict_conditional_stats(const GpsModel& model, const Dataset& ds) {
  const Matrix x = model.encoder.encode(ds);
  ConditionalStats out;
  out.mean = model.mean_model->predict(x);
  if (model.density_kind == DensityKind::normal) {
    out.sd.assign(ds.n_rows(), model.sd_global);
  } else {
    std::vector<double> var = model.variance_model->predict(x);
    out.sd.resize(var.size());
    for (std::size_t i = 0; i < var.size(); ++i) {
      out.sd[i] = std::sqrt(std::max(var[i], kVarianceFloor));
    }
  }
  return out;
}

GpsEstimate estimate_gps(const Dataset& ds, DensityKind density_kind,
                         const LearnerSpec& learner_spec, std::uint64_t rng_seed,
                         int nthread, const TransformLedger& ledger) {
  if (ds.n_rows() < 10) throw std::invalid_argument("estimate_gps needs >= 10 rows");
  if (!(variance_pop(ds.exposure()) > 0.0)) {
    throw DegenerateExposure("exposure variance is zero");
  }

  auto model = std::make_shared<GpsModel>();
  model->density_kind = density_kind;
  model->encoder = FeatureEncoder(ds, ledger);
  const Matrix x = model->encoder.encode(ds);
  model->mean_model = fit_learner(learner_spec, x, ds.exposure(), rng_seed);

  const std::vector<double> fitted = model->mean_model->predict(x);
  const std::size_t n = ds.n_rows();
  std::vector<double> residual(n);
  for (std::size_t i = 0; i < n; ++i) residual[i] = ds.exposure()[i] - fitted[i];

  if (density_kind == DensityKind::normal) {
    double ss = 0.0;
    for (double r : residual) ss += r * r;
    const double sigma2 = ss / static_cast<double>(n);
    if (!(sigma2 > 0.0)) throw DegenerateSample("residuals are identically zero");
    model->sd_global = std::sqrt(sigma2);
  } else {
    std::vector<double> r2(n);
    for (std::size_t i = 0; i < n; ++i) r2[i] = residual[i] * residual[i];
    model->variance_model = fit_learner(learner_spec, x, r2, rng_seed + 1);
    const std::vector<double> var = model->variance_model->predict(x);
    std::vector<double> eps(n);
    for (std::size_t i = 0; i < n; ++i) {
      eps[i] = residual[i] / std::sqrt(std::max(var[i], kVarianceFloor));
    }
    model->residual_bandwidth = silverman_bandwidth(eps);
    model->residual_samples = std::move(eps);
  }
  model->marginal = marginal_density(ds.exposure(), density_kind);

  GpsEstimate est;
  est.ids = ds.ids();
  est.model = model;
  est.gps.resize(n);
  est.marginal.resize(n);
  const ConditionalStats stats = predict_conditional_stats(*model, ds);
  const GpsModel& m = *model;
  const std::vector<double>& exposure = ds.exposure();
  parallel_for(n, nthread, [&](std::size_t i) {
    est.gps[i] = conditional_density(m, exposure[i], stats.mean[i], stats.sd[i]);
    est.marginal[i] = m.marginal.density_at(exposure[i]);
  });
  return est;
}

std::vector<double> evaluate_gps_at(const GpsModel& model, double w_star,
                                    const Dataset& ds, int nthread) {
  if (!std::isfinite(w_star)) throw std::invalid_argument("w_star must be finite");
  const ConditionalStats stats = predict_conditional_stats(model, ds);
  std::vector<double> out(ds.n_rows());
  parallel_for(ds.n_rows(), nthread, [&](std::size_t i) {
    out[i] = conditional_density(model, w_star, stats.mean[i], stats.sd[i]);
  });
  return out;
}

GpsEstimate subset_gps(const GpsEstimate& est, const std::vector<std::size_t>& rows) {
  GpsEstimate out;
  out.model = est.model;
  out.ids.reserve(rows.size());
  out.gps.reserve(rows.size());
  out.marginal.reserve(rows.size());
  for (std::size_t i : rows) {
    if (i >= est.gps.size()) throw std::invalid_argument("subset_gps index out of range");
    out.ids.push_back(est.ids[i]);
    out.gps.push_back(est.gps[i]);
    out.marginal.push_back(est.marginal[i]);
  }
  return out;
}

std::string gps_to_csv(const GpsEstimate& est) {
  std::string out = csv::format_row({"id", "gps", "marginal_density"});
  for (std::size_t i = 0; i < est.gps.size(); ++i) {
    out += csv::format_row({std::to_string(est.ids[i].value),
                            csv::format_double(est.gps[i]),
                            csv::format_double(est.marginal[i])});
  }
  return out;
}

void write_gps_csv(const GpsEstimate& est, const std::string& path) {
  csv::write_file(path, gps_to_csv(est));
}

}  // namespace gpsinfer
