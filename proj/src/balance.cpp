#include "gpsinfer/balance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gpsinfer/csv.hpp"
#include "gpsinfer/errors.hpp"
#include "gpsinfer/logging.hpp"

namespace gpsinfer {

const char* balance_summary_name(BalanceSummaryType type) {
  switch (type) {
    case BalanceSummaryType::mean: return "mean";
    case BalanceSummaryType::median: return "median";
    case BalanceSummaryType::maximal: return "maximal";
  }
  return "mean";
}

BalanceSummaryType parse_balance_summary(const std::string& text) {
  if (text == "mean") return BalanceSummaryType::mean;
  if (text == "median") return BalanceSummaryType::median;
  if (text == "maximal") return BalanceSummaryType::maximal;
  throw std::invalid_argument("unknown balance summary type: " + text);
}

double AcSummary::select(BalanceSummaryType type) const {
  switch (type) {
    case BalanceSummaryType::mean: return mean_ac;
    case BalanceSummaryType::median: return median_ac;
    case BalanceSummaryType::maximal: return max_ac;
  }
  return mean_ac;
}

double weighted_pearson(const std::vector<double>& x, const std::vector<double>& y,
                        const std::vector<double>& w) {
  const std::size_t n = x.size();
  if (y.size() != n || w.size() != n) throw std::invalid_argument("length mismatch");
  if (n == 0) throw std::invalid_argument("empty inputs");
  double wsum = 0.0;
  for (double wi : w) {
    if (!(wi >= 0.0) || !std::isfinite(wi)) {
      throw std::invalid_argument("weights must be non-negative and finite");
    }
    wsum += wi;
  }
  if (!(wsum > 0.0)) throw std::invalid_argument("weights sum to zero");

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += w[i] * x[i];
    my += w[i] * y[i];
  }
  mx /= wsum;
  my /= wsum;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += w[i] * dx * dx;
    syy += w[i] * dy * dy;
    sxy += w[i] * dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    throw DegenerateVariance("weighted variance is zero");
  }
  return sxy / std::sqrt(sxx * syy);
}

namespace {

double median_interpolated(std::vector<double> v) { return quantile(v, 0.5); }

AcSummary summarize(const std::vector<std::pair<std::string, double>>& acs) {
  AcSummary s;
  if (acs.empty()) return s;
  std::vector<double> vals;
  vals.reserve(acs.size());
  double sum = 0.0, mx = 0.0;
  for (const auto& [name, v] : acs) {
    vals.push_back(v);
    sum += v;
    mx = std::max(mx, v);
  }
  s.mean_ac = sum / static_cast<double>(vals.size());
  s.median_ac = median_interpolated(std::move(vals));
  s.max_ac = mx;
  return s;
}

}  // namespace

AcResult absolute_correlations(const PseudoPopulation& pp) {
  const Dataset& ds = pp.data;
  if (pp.weight.size() != ds.n_rows()) {
    throw std::invalid_argument("weights are not aligned with rows");
  }
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    if (pp.weight[i] > 0.0) rows.push_back(i);
  }
  if (rows.size() < 2) {
    throw std::invalid_argument("balance needs >= 2 rows with positive weight");
  }

  std::vector<double> e(rows.size()), w(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    e[k] = ds.exposure()[rows[k]];
    w[k] = pp.weight[rows[k]];
  }

  auto ac_of = [&](const std::vector<double>& col, const std::string& name) -> double {
    // A covariate that is constant among the weighted rows carries no
    // imbalance information; report 0 rather than failing the whole run.
    try {
      return std::abs(weighted_pearson(e, col, w));
    } catch (const DegenerateVariance&) {
      double mn = col[0], mxv = col[0];
      for (double v : col) {
        mn = std::min(mn, v);
        mxv = std::max(mxv, v);
      }
      if (mn == mxv) {
        log_warn("balance: covariate '" + name + "' is constant in the pseudo-population; AC set to 0");
        return 0.0;
      }
      throw;  // the exposure side is degenerate: a real error
    }
  };

  AcResult out;
  std::vector<double> col(rows.size());
  for (const auto& cov : ds.covariates()) {
    if (cov.kind == CovariateKind::numeric) {
      for (std::size_t k = 0; k < rows.size(); ++k) col[k] = cov.numeric[rows[k]];
      out.acs.emplace_back(cov.name, ac_of(col, cov.name));
    } else {
      // Max absolute correlation over the level indicator columns.
      double best = 0.0;
      for (std::size_t level = 0; level < cov.levels.size(); ++level) {
        for (std::size_t k = 0; k < rows.size(); ++k) {
          col[k] = cov.codes[rows[k]] == static_cast<int>(level) ? 1.0 : 0.0;
        }
        best = std::max(best, ac_of(col, cov.name + "=" + cov.levels[level]));
      }
      out.acs.emplace_back(cov.name, best);
    }
  }
  out.summary = summarize(out.acs);
  return out;
}

bool check_balance(const AcSummary& summary, double threshold, BalanceSummaryType type) {
  if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be positive");
  return summary.select(type) < threshold;
}

BalanceReport make_balance_report(const AcResult& original, const AcResult& adjusted,
                                  double threshold, BalanceSummaryType type) {
  if (original.acs.size() != adjusted.acs.size()) {
    throw std::invalid_argument("original/adjusted correlation sets differ in size");
  }
  BalanceReport report;
  report.threshold = threshold;
  report.threshold_type = type;
  for (const auto& [name, orig] : original.acs) {
    const auto it = std::find_if(adjusted.acs.begin(), adjusted.acs.end(),
                                 [&](const auto& p) { return p.first == name; });
    if (it == adjusted.acs.end()) {
      throw std::invalid_argument("adjusted correlations lack covariate '" + name + "'");
    }
    report.covariates.push_back({name, orig, it->second});
  }
  report.original = original.summary;
  report.adjusted = adjusted.summary;
  report.passed = check_balance(report.adjusted, threshold, type);
  return report;
}

std::string balance_report_to_csv(const BalanceReport& report) {
  std::string out = csv::format_row({"covariate", "original_ac", "adjusted_ac"});
  for (const auto& row : report.covariates) {
    out += csv::format_row({row.name, csv::format_double(row.original_ac),
                            csv::format_double(row.adjusted_ac)});
  }
  auto comment = [&out](const std::string& key, const std::string& value) {
    out += "# " + key + ": " + value + "\n";
  };
  comment("original_mean_ac", csv::format_double(report.original.mean_ac));
  comment("original_median_ac", csv::format_double(report.original.median_ac));
  comment("original_max_ac", csv::format_double(report.original.max_ac));
  comment("adjusted_mean_ac", csv::format_double(report.adjusted.mean_ac));
  comment("adjusted_median_ac", csv::format_double(report.adjusted.median_ac));
  comment("adjusted_max_ac", csv::format_double(report.adjusted.max_ac));
  comment("threshold", csv::format_double(report.threshold));
  comment("threshold_type", balance_summary_name(report.threshold_type));
  comment("passed", report.passed ? "true" : "false");
  return out;
}

void write_balance_report_csv(const BalanceReport& report, const std::string& path) {
  csv::write_file(path, balance_report_to_csv(report));
}

BalanceReport read_balance_report_csv(const std::string& path) {
  const csv::Table table = csv::read_file(path);
  const std::size_t ci = csv::column_index(table, "covariate");
  const std::size_t oi = csv::column_index(table, "original_ac");
  const std::size_t ai = csv::column_index(table, "adjusted_ac");
  BalanceReport report;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    report.covariates.push_back({table.rows[r][ci],
                                 csv::parse_double(table.rows[r][oi], r + 1, "original_ac"),
                                 csv::parse_double(table.rows[r][ai], r + 1, "adjusted_ac")});
  }
  auto comment_value = [&](const std::string& key) -> std::string {
    const std::string prefix = "# " + key + ": ";
    for (const auto& line : table.comments) {
      if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
    }
    return "";
  };
  auto num = [&](const std::string& key, double fallback) {
    const std::string v = comment_value(key);
    return v.empty() ? fallback : csv::parse_double(v, 0, key);
  };
  report.original.mean_ac = num("original_mean_ac", 0.0);
  report.original.median_ac = num("original_median_ac", 0.0);
  report.original.max_ac = num("original_max_ac", 0.0);
  report.adjusted.mean_ac = num("adjusted_mean_ac", 0.0);
  report.adjusted.median_ac = num("adjusted_median_ac", 0.0);
  report.adjusted.max_ac = num("adjusted_max_ac", 0.0);
  report.threshold = num("threshold", 0.1);
  const std::string type = comment_value("threshold_type");
  report.threshold_type = type.empty() ? BalanceSummaryType::mean : parse_balance_summary(type);
  report.passed = comment_value("passed") == "true";
  return report;
}

}  // namespace gpsinfer
