#pragma once

// Core data model: observations with a continuous exposure, named covariates
// (numeric or categorical), an optional outcome, and stable integer ids.
// Also owns CSV ingestion, the interpolation quantile, and quantile trimming.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gpsinfer {

// Stable identifier of one observation. Ids survive trimming and are never
// renumbered, so pseudo-population rows can always be traced to their source.
struct ObservationId {
  std::int64_t value = 0;
  friend bool operator==(ObservationId a, ObservationId b) { return a.value == b.value; }
  friend bool operator!=(ObservationId a, ObservationId b) { return a.value != b.value; }
  friend bool operator<(ObservationId a, ObservationId b) { return a.value < b.value; }
};

enum class CovariateKind { numeric, categorical };

struct CovariateColumn {
  std::string name;
  CovariateKind kind = CovariateKind::numeric;
  std::vector<double> numeric;       // kind == numeric: one value per row
  std::vector<int> codes;            // kind == categorical: level index per row
  std::vector<std::string> levels;   // categorical level labels (>= 1, unique)

  std::size_t size() const {
    return kind == CovariateKind::numeric ? numeric.size() : codes.size();
  }
};

// Pair of quantile probabilities used for trimming; bounds are inclusive.
struct QuantilePair {
  double lo = 0.0;
  double hi = 1.0;
};

class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<ObservationId> ids, std::vector<double> exposure,
          std::vector<CovariateColumn> covariates,
          std::optional<std::vector<double>> outcome = std::nullopt);

  std::size_t n_rows() const { return exposure_.size(); }
  const std::vector<ObservationId>& ids() const { return ids_; }
  const std::vector<double>& exposure() const { return exposure_; }
  const std::vector<CovariateColumn>& covariates() const { return covariates_; }
  bool has_outcome() const { return outcome_.has_value(); }
  const std::vector<double>& outcome() const;

  const CovariateColumn& covariate(const std::string& name) const;  // MissingColumn
  bool has_covariate(const std::string& name) const;

  // Column names used when the dataset is (re)serialized.
  const std::string& exposure_name() const { return exposure_name_; }
  const std::string& outcome_name() const { return outcome_name_; }
  const std::string& id_name() const { return id_name_; }
  void set_exposure_name(std::string name) { exposure_name_ = std::move(name); }
  void set_outcome_name(std::string name) { outcome_name_ = std::move(name); }
  void set_id_name(std::string name) { id_name_ = std::move(name); }

  // New dataset holding the given rows (by position), original order/ids kept.
  Dataset subset(const std::vector<std::size_t>& row_indices) const;

 private:
  std::vector<ObservationId> ids_;
  std::vector<double> exposure_;
  std::vector<CovariateColumn> covariates_;
  std::optional<std::vector<double>> outcome_;
  std::string id_name_ = "id";
  std::string exposure_name_ = "exposure";
  std::string outcome_name_ = "outcome";
};

struct CovariateSpec {
  std::string name;
  CovariateKind kind = CovariateKind::numeric;
};

// Loads a dataset from CSV. Numeric cells must parse fully as doubles and be
// finite; missing/empty cells are rejected (ParseError names row and column).
// Categorical levels are the sorted distinct labels of the column. When
// id_col is empty, ids are assigned 0..N-1 in file order. Duplicate ids raise
// DuplicateId; absent columns raise MissingColumn.
Dataset load_csv(const std::string& path, const std::string& exposure_col,
                 const std::vector<CovariateSpec>& covar_cols,
                 const std::string& outcome_col = "",
                 const std::string& id_col = "");

// Serializes a dataset (id, exposure, covariates..., outcome if present).
std::string dataset_to_csv(const Dataset& ds);
void write_dataset_csv(const Dataset& ds, const std::string& path);

// Interpolation quantile of an unsorted sample: with the sorted values
// v(1)..v(n) and h = (n-1)p + 1, returns v(floor(h)) + (h - floor(h)) *
// (v(floor(h)+1) - v(floor(h))). p must lie in [0,1]; empty input raises
// EmptyInput.
double quantile(const std::vector<double>& values, double p);

// Rows with quantile(E, lo) <= e_i <= quantile(E, hi) are kept (inclusive on
// both sides); order and ids preserved. AllRowsTrimmed if nothing survives.
Dataset trim_by_exposure_quantiles(const Dataset& ds, const QuantilePair& q);

// Same, but thresholds come from the per-row GPS values (aligned with ds).
Dataset trim_by_gps_quantiles(const Dataset& ds, const std::vector<double>& gps,
                              const QuantilePair& q);

// Shared helper: indices (ascending) of values within the inclusive quantile
// band of `values`. Used by both trim operations and by the tuner, which must
// subset parallel arrays consistently.
std::vector<std::size_t> quantile_band_indices(const std::vector<double>& values,
                                               const QuantilePair& q);

}  // namespace gpsinfer
