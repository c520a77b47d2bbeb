#include "gpsinfer/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "gpsinfer/csv.hpp"
#include "gpsinfer/errors.hpp"

namespace gpsinfer {

Dataset::Dataset(std::vector<ObservationId> ids, std::vector<double> exposure,
                 std::vector<CovariateColumn> covariates,
                 std::optional<std::vector<double>> outcome)
    : ids_(std::move(ids)),
      exposure_(std::move(exposure)),
      covariates_(std::move(covariates)),
      outcome_(std::move(outcome)) {
  const std::size_t n = exposure_.size();
  if (ids_.size() != n) throw std::invalid_argument("ids and exposure lengths differ");
  for (const auto& e : exposure_) {
    if (!std::isfinite(e)) throw std::invalid_argument("exposure values must be finite");
  }
  std::set<std::int64_t> seen;
  for (const auto& id : ids_) {
    if (id.value < 0) throw std::invalid_argument("observation ids must be non-negative");
    if (!seen.insert(id.value).second) {
      throw DuplicateId("duplicate observation id: " + std::to_string(id.value));
    }
  }
  std::set<std::string> names;
  for (const auto& col : covariates_) {
    if (col.size() != n) throw std::invalid_argument("covariate '" + col.name + "' length differs");
    if (!names.insert(col.name).second) {
      throw std::invalid_argument("duplicate covariate name: " + col.name);
    }
    if (col.kind == CovariateKind::numeric) {
      for (double v : col.numeric) {
        if (!std::isfinite(v)) {
          throw std::invalid_argument("covariate '" + col.name + "' has non-finite values");
        }
      }
    } else {
      if (col.levels.empty()) {
        throw std::invalid_argument("categorical covariate '" + col.name + "' needs >= 1 level");
      }
      std::set<std::string> lv(col.levels.begin(), col.levels.end());
      if (lv.size() != col.levels.size()) {
        throw std::invalid_argument("categorical covariate '" + col.name + "' has duplicate levels");
      }
      for (int c : col.codes) {
        if (c < 0 || static_cast<std::size_t>(c) >= col.levels.size()) {
          throw std::invalid_argument("categorical covariate '" + col.name + "' has out-of-range code");
        }
      }
    }
  }
  if (outcome_ && outcome_->size() != n) {
    throw std::invalid_argument("outcome length differs from exposure length");
  }
  if (outcome_) {
    for (double v : *outcome_) {
      if (!std::isfinite(v)) throw std::invalid_argument("outcome values must be finite");
    }
  }
}

const std::vector<double>& Dataset::outcome() const {
  if (!outcome_) throw std::invalid_argument("dataset has no outcome column");
  return *outcome_;
}

const CovariateColumn& Dataset::covariate(const std::string& name) const {
  for (const auto& col : covariates_) {
    if (col.name == name) return col;
  }
  throw MissingColumn("missing covariate: " + name);
}

bool Dataset::has_covariate(const std::string& name) const {
  for (const auto& col : covariates_) {
    if (col.name == name) return true;
  }
  return false;
}

Dataset Dataset::subset(const std::vector<std::size_t>& row_indices) const {
  std::vector<ObservationId> ids;
  std::vector<double> exposure;
  ids.reserve(row_indices.size());
  exposure.reserve(row_indices.size());
  for (std::size_t i : row_indices) {
    if (i >= n_rows()) throw std::invalid_argument("subset index out of range");
    ids.push_back(ids_[i]);
    exposure.push_back(exposure_[i]);
  }
  std::vector<CovariateColumn> covs;
  covs.reserve(covariates_.size());
  for (const auto& col : covariates_) {
    CovariateColumn out;
    out.name = col.name;
    out.kind = col.kind;
    out.levels = col.levels;
    if (col.kind == CovariateKind::numeric) {
      out.numeric.reserve(row_indices.size());
      for (std::size_t i : row_indices) out.numeric.push_back(col.numeric[i]);
    } else {
      out.codes.reserve(row_indices.size());
      for (std::size_t i : row_indices) out.codes.push_back(col.codes[i]);
    }
    covs.push_back(std::move(out));
  }
  std::optional<std::vector<double>> outcome;
  if (outcome_) {
    outcome.emplace();
    outcome->reserve(row_indices.size());
    for (std::size_t i : row_indices) outcome->push_back((*outcome_)[i]);
  }
  Dataset out(std::move(ids), std::move(exposure), std::move(covs), std::move(outcome));
  out.id_name_ = id_name_;
  out.exposure_name_ = exposure_name_;
  out.outcome_name_ = outcome_name_;
  return out;
}

namespace {

bool cell_is_numeric(const std::string& cell) {
  try {
    csv::parse_double(cell, 0, "");
    return true;
  } catch (const ParseError&) {
    return false;
  }
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& exposure_col,
                 const std::vector<CovariateSpec>& covar_cols,
                 const std::string& outcome_col, const std::string& id_col) {
  const csv::Table table = csv::read_file(path);
  const std::size_t n = table.rows.size();

  const std::size_t exposure_idx = csv::column_index(table, exposure_col);
  std::vector<double> exposure(n);
  for (std::size_t r = 0; r < n; ++r) {
    exposure[r] = csv::parse_double(table.rows[r][exposure_idx], r + 1, exposure_col);
    if (!std::isfinite(exposure[r])) {
      throw ParseError("row " + std::to_string(r + 1) + ", column '" + exposure_col +
                       "': non-finite exposure");
    }
  }

  std::vector<ObservationId> ids(n);
  if (!id_col.empty()) {
    const std::size_t id_idx = csv::column_index(table, id_col);
    for (std::size_t r = 0; r < n; ++r) {
      const double v = csv::parse_double(table.rows[r][id_idx], r + 1, id_col);
      const auto iv = static_cast<std::int64_t>(v);
      if (static_cast<double>(iv) != v || iv < 0) {
        throw ParseError("row " + std::to_string(r + 1) + ", column '" + id_col +
                         "': id must be a non-negative integer");
      }
      ids[r].value = iv;
    }
  } else {
    for (std::size_t r = 0; r < n; ++r) ids[r].value = static_cast<std::int64_t>(r);
  }

  std::vector<CovariateColumn> covs;
  covs.reserve(covar_cols.size());
  for (const auto& spec : covar_cols) {
    const std::size_t idx = csv::column_index(table, spec.name);
    CovariateColumn col;
    col.name = spec.name;
    col.kind = spec.kind;
    if (spec.kind == CovariateKind::numeric) {
      col.numeric.resize(n);
      for (std::size_t r = 0; r < n; ++r) {
        col.numeric[r] = csv::parse_double(table.rows[r][idx], r + 1, spec.name);
        if (!std::isfinite(col.numeric[r])) {
          throw ParseError("row " + std::to_string(r + 1) + ", column '" + spec.name +
                           "': non-finite value");
        }
      }
    } else {
      // Levels = sorted distinct labels, deterministic regardless of row order.
      std::set<std::string> labels;
      for (std::size_t r = 0; r < n; ++r) {
        if (table.rows[r][idx].empty()) {
          throw ParseError("row " + std::to_string(r + 1) + ", column '" + spec.name +
                           "': empty categorical label");
        }
        labels.insert(table.rows[r][idx]);
      }
      col.levels.assign(labels.begin(), labels.end());
      std::map<std::string, int> code_of;
      for (std::size_t k = 0; k < col.levels.size(); ++k) {
        code_of[col.levels[k]] = static_cast<int>(k);
      }
      col.codes.resize(n);
      for (std::size_t r = 0; r < n; ++r) col.codes[r] = code_of[table.rows[r][idx]];
    }
    covs.push_back(std::move(col));
  }

  std::optional<std::vector<double>> outcome;
  if (!outcome_col.empty()) {
    const std::size_t idx = csv::column_index(table, outcome_col);
    outcome.emplace(n);
    for (std::size_t r = 0; r < n; ++r) {
      (*outcome)[r] = csv::parse_double(table.rows[r][idx], r + 1, outcome_col);
      if (!std::isfinite((*outcome)[r])) {
        throw ParseError("row " + std::to_string(r + 1) + ", column '" + outcome_col +
                         "': non-finite outcome");
      }
    }
  }

  Dataset ds(std::move(ids), std::move(exposure), std::move(covs), std::move(outcome));
  ds.set_exposure_name(exposure_col);
  if (!outcome_col.empty()) ds.set_outcome_name(outcome_col);
  if (!id_col.empty()) ds.set_id_name(id_col);
  return ds;
}

std::string dataset_to_csv(const Dataset& ds) {
  std::vector<std::string> header;
  header.push_back(ds.id_name());
  header.push_back(ds.exposure_name());
  for (const auto& col : ds.covariates()) header.push_back(col.name);
  if (ds.has_outcome()) header.push_back(ds.outcome_name());

  std::string out = csv::format_row(header);
  std::vector<std::string> fields;
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    fields.clear();
    fields.push_back(std::to_string(ds.ids()[r].value));
    fields.push_back(csv::format_double(ds.exposure()[r]));
    for (const auto& col : ds.covariates()) {
      if (col.kind == CovariateKind::numeric) {
        fields.push_back(csv::format_double(col.numeric[r]));
      } else {
        fields.push_back(col.levels[col.codes[r]]);
      }
    }
    if (ds.has_outcome()) fields.push_back(csv::format_double(ds.outcome()[r]));
    out += csv::format_row(fields);
  }
  return out;
}

void write_dataset_csv(const Dataset& ds, const std::string& path) {
  csv::write_file(path, dataset_to_csv(ds));
}

double quantile(const std::vector<double>& values, double p) {
  if (values.empty()) throw EmptyInput("quantile of empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile probability outside [0,1]");
  std::vector<double> v(values);
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  const double h = static_cast<double>(n - 1) * p;  // 0-based position
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= n) return v[n - 1];
  const double frac = h - static_cast<double>(lo);
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

std::vector<std::size_t> quantile_band_indices(const std::vector<double>& values,
                                               const QuantilePair& q) {
  if (!(q.lo >= 0.0 && q.lo < q.hi && q.hi <= 1.0)) {
    throw std::invalid_argument("quantile pair must satisfy 0 <= lo < hi <= 1");
  }
  const double lo = quantile(values, q.lo);
  const double hi = quantile(values, q.hi);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= lo && values[i] <= hi) keep.push_back(i);
  }
  return keep;
}

Dataset trim_by_exposure_quantiles(const Dataset& ds, const QuantilePair& q) {
  const auto keep = quantile_band_indices(ds.exposure(), q);
  if (keep.empty()) throw AllRowsTrimmed("exposure trimming removed every row");
  return ds.subset(keep);
}

Dataset trim_by_gps_quantiles(const Dataset& ds, const std::vector<double>& gps,
                              const QuantilePair& q) {
  if (gps.size() != ds.n_rows()) {
    throw std::invalid_argument("gps vector length differs from dataset rows");
  }
  const auto keep = quantile_band_indices(gps, q);
  if (keep.empty()) throw AllRowsTrimmed("gps trimming removed every row");
  return ds.subset(keep);
}

}  // namespace gpsinfer
