#include "gpsinfer/pseudo_population.hpp"

#include <algorithm>
#include <set>

#include "gpsinfer/csv.hpp"
#include "gpsinfer/errors.hpp"

namespace gpsinfer {

const char* approach_name(Approach a) {
  return a == Approach::matching ? "matching" : "weighting";
}

namespace {

const char* weight_column_name(Approach a) {
  return a == Approach::matching ? "counter_weight" : "stabilized_weight";
}

}  // namespace

std::string pseudo_population_to_csv(const PseudoPopulation& pp) {
  const Dataset& ds = pp.data;
  std::vector<std::string> header;
  header.push_back(ds.id_name());
  header.push_back(ds.exposure_name());
  for (const auto& col : ds.covariates()) header.push_back(col.name);
  if (ds.has_outcome()) header.push_back(ds.outcome_name());
  header.push_back(weight_column_name(pp.approach));

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
    fields.push_back(csv::format_double(pp.weight[r]));
    out += csv::format_row(fields);
  }
  return out;
}

void write_pseudo_population_csv(const PseudoPopulation& pp, const std::string& path) {
  csv::write_file(path, pseudo_population_to_csv(pp));
}

PseudoPopulation read_pseudo_population_csv(const std::string& path,
                                            const std::string& exposure_col,
                                            const std::string& outcome_col,
                                            const std::string& id_col,
                                            const std::string& weight_col,
                                            const std::vector<std::string>& categorical_cols) {
  const csv::Table table = csv::read_file(path);

  std::string wcol = weight_col;
  Approach approach = Approach::weighting;
  if (wcol.empty()) {
    const bool has_counter =
        std::find(table.header.begin(), table.header.end(), "counter_weight") != table.header.end();
    const bool has_stab = std::find(table.header.begin(), table.header.end(),
                                    "stabilized_weight") != table.header.end();
    if (has_counter == has_stab) {
      throw MissingColumn("expected exactly one of counter_weight/stabilized_weight in " + path);
    }
    wcol = has_counter ? "counter_weight" : "stabilized_weight";
    approach = has_counter ? Approach::matching : Approach::weighting;
  } else {
    approach = wcol == "counter_weight" ? Approach::matching : Approach::weighting;
  }

  const bool has_outcome =
      !outcome_col.empty() &&
      std::find(table.header.begin(), table.header.end(), outcome_col) != table.header.end();

  const std::set<std::string> reserved = {id_col, exposure_col, wcol,
                                          has_outcome ? outcome_col : std::string()};
  const std::set<std::string> categorical(categorical_cols.begin(), categorical_cols.end());

  std::vector<CovariateSpec> covars;
  for (const auto& name : table.header) {
    if (reserved.count(name)) continue;
    covars.push_back({name, categorical.count(name) ? CovariateKind::categorical
                                                    : CovariateKind::numeric});
  }

  PseudoPopulation pp;
  pp.approach = approach;
  pp.data = load_csv(path, exposure_col, covars, has_outcome ? outcome_col : "", id_col);

  const std::size_t widx = csv::column_index(table, wcol);
  pp.weight.resize(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    pp.weight[r] = csv::parse_double(table.rows[r][widx], r + 1, wcol);
    if (!(pp.weight[r] >= 0.0)) {
      throw ParseError("row " + std::to_string(r + 1) + ", column '" + wcol +
                       "': weight must be non-negative");
    }
  }
  return pp;
}

}  // namespace gpsinfer
