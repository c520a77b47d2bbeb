#include "gpsinfer/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "gpsinfer/csv.hpp"

namespace gpsinfer {

namespace {

// Fixed-precision coordinates keep the emitted bytes deterministic.
std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string svg_open(double width, double height) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         px(width) + "\" height=\"" + px(height) + "\" viewBox=\"0 0 " + px(width) + " " +
         px(height) + "\">\n";
}

std::string text_el(double x, double y, const std::string& body, const std::string& extra = "") {
  return "  <text x=\"" + px(x) + "\" y=\"" + px(y) + "\" font-family=\"sans-serif\"" + extra +
         ">" + xml_escape(body) + "</text>\n";
}

}  // namespace

std::string balance_plot_svg(const BalanceReport& report, double threshold) {
  if (report.covariates.empty())
    throw std::invalid_argument("balance plot requires at least one covariate");
  if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be positive");

  std::vector<CovariateBalance> rows = report.covariates;
  std::stable_sort(rows.begin(), rows.end(), [](const CovariateBalance& a,
                                                const CovariateBalance& b) {
    return a.original_ac > b.original_ac;
  });

  double axis_max = threshold;
  axis_max = std::max(axis_max, report.adjusted.mean_ac);
  for (const auto& r : rows) axis_max = std::max({axis_max, r.original_ac, r.adjusted_ac});
  if (!(axis_max > 0.0)) axis_max = 1.0;

  const double x0 = 150.0, plot_w = 560.0;
  const double row_h = 24.0, top = 60.0;
  const double plot_h = row_h * static_cast<double>(rows.size());
  const double bottom = top + plot_h;
  const double width = x0 + plot_w + 50.0;
  const double height = bottom + 70.0;
  const auto x_of = [&](double v) { return x0 + v * plot_w / axis_max; };

  std::string svg = svg_open(width, height);
  svg += text_el(x0, 30.0, "Absolute correlation with exposure",
                 " font-size=\"16\" font-weight=\"bold\"");

  // Axes as one path so reference <line> elements stay countable.
  svg += "  <path d=\"M " + px(x0) + " " + px(top) + " L " + px(x0) + " " + px(bottom) + " L " +
         px(x0 + plot_w) + " " + px(bottom) + "\" stroke=\"black\" fill=\"none\"/>\n";

  // X tick labels at 0 and axis_max.
  svg += text_el(x0 - 4.0, bottom + 18.0, "0", " font-size=\"11\"");
  svg += text_el(x0 + plot_w - 20.0, bottom + 18.0, csv::format_double(axis_max),
                 " font-size=\"11\"");
  svg += text_el(x0 + plot_w / 2.0 - 60.0, bottom + 36.0, "absolute correlation",
                 " font-size=\"12\"");

  // Reference lines: solid at the threshold, dashed at the mean adjusted AC.
  svg += "  <line x1=\"" + px(x_of(threshold)) + "\" y1=\"" + px(top) + "\" x2=\"" +
         px(x_of(threshold)) + "\" y2=\"" + px(bottom) + "\" stroke=\"black\"/>\n";
  svg += "  <line x1=\"" + px(x_of(report.adjusted.mean_ac)) + "\" y1=\"" + px(top) +
         "\" x2=\"" + px(x_of(report.adjusted.mean_ac)) + "\" y2=\"" + px(bottom) +
         "\" stroke=\"black\" stroke-dasharray=\"6,4\"/>\n";

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double y = top + row_h * (static_cast<double>(i) + 0.5);
    svg += text_el(10.0, y + 4.0, rows[i].name, " font-size=\"12\"");
    svg += "  <circle cx=\"" + px(x_of(rows[i].original_ac)) + "\" cy=\"" + px(y) +
           "\" r=\"4\" fill=\"#d95f02\"/>\n";
    svg += "  <circle cx=\"" + px(x_of(rows[i].adjusted_ac)) + "\" cy=\"" + px(y) +
           "\" r=\"4\" fill=\"#1b9e77\"/>\n";
  }

  // Legend (text only; squares would add countable shapes).
  svg += text_el(x0, height - 14.0, "orange: original    green: adjusted    solid: threshold " +
                                        csv::format_double(threshold) +
                                        "    dashed: mean adjusted AC",
                 " font-size=\"12\"");
  svg += "</svg>\n";
  return svg;
}

void emit_balance_plot(const BalanceReport& report, double threshold,
                       const std::string& out_path) {
  csv::write_file(out_path, balance_plot_svg(report, threshold));
}

std::string erf_plot_svg(const ErfEstimate& est) {
  const std::size_t k = est.w_vals.size();
  if (k == 0) throw std::invalid_argument("erf plot requires a nonempty grid");
  if (est.estimates.size() != k)
    throw std::invalid_argument("erf estimates misaligned with grid");
  const bool has_band = est.ci_lower.has_value() && est.ci_upper.has_value();
  for (std::size_t i = 0; i < k; ++i) {
    bool ok = std::isfinite(est.w_vals[i]) && std::isfinite(est.estimates[i]);
    if (has_band)
      ok = ok && std::isfinite((*est.ci_lower)[i]) && std::isfinite((*est.ci_upper)[i]);
    if (!ok) throw std::invalid_argument("erf plot requires finite values");
  }

  double w_lo = est.w_vals[0], w_hi = est.w_vals[0];
  double y_lo = est.estimates[0], y_hi = est.estimates[0];
  for (std::size_t i = 0; i < k; ++i) {
    w_lo = std::min(w_lo, est.w_vals[i]);
    w_hi = std::max(w_hi, est.w_vals[i]);
    y_lo = std::min(y_lo, est.estimates[i]);
    y_hi = std::max(y_hi, est.estimates[i]);
    if (has_band) {
      y_lo = std::min(y_lo, (*est.ci_lower)[i]);
      y_hi = std::max(y_hi, (*est.ci_upper)[i]);
    }
  }
  if (w_hi == w_lo) {
    w_lo -= 0.5;
    w_hi += 0.5;
  }
  double pad = (y_hi - y_lo) * 0.05;
  if (pad == 0.0) pad = std::max(1e-6, std::abs(y_hi) * 0.05 + 1e-6);
  y_lo -= pad;
  y_hi += pad;

  const double x0 = 100.0, plot_w = 560.0;
  const double y_base = 420.0, plot_h = 360.0;
  const double width = x0 + plot_w + 40.0;
  const double height = y_base + 60.0;
  const auto x_of = [&](double w) { return x0 + (w - w_lo) * plot_w / (w_hi - w_lo); };
  const auto y_of = [&](double y) { return y_base - (y - y_lo) * plot_h / (y_hi - y_lo); };

  std::string svg = svg_open(width, height);
  svg += text_el(x0, 28.0, "Exposure-response curve", " font-size=\"16\" font-weight=\"bold\"");
  svg += "  <path d=\"M " + px(x0) + " " + px(y_base - plot_h) + " L " + px(x0) + " " +
         px(y_base) + " L " + px(x0 + plot_w) + " " + px(y_base) +
         "\" stroke=\"black\" fill=\"none\"/>\n";

  if (has_band) {
    std::string pts;
    for (std::size_t i = 0; i < k; ++i)
      pts += px(x_of(est.w_vals[i])) + "," + px(y_of((*est.ci_upper)[i])) + " ";
    for (std::size_t i = k; i > 0; --i)
      pts += px(x_of(est.w_vals[i - 1])) + "," + px(y_of((*est.ci_lower)[i - 1])) + " ";
    pts.pop_back();
    svg += "  <polygon points=\"" + pts + "\" fill=\"#b3cde3\" stroke=\"none\"/>\n";
  }

  std::string pts;
  for (std::size_t i = 0; i < k; ++i)
    pts += px(x_of(est.w_vals[i])) + "," + px(y_of(est.estimates[i])) + " ";
  pts.pop_back();
  svg += "  <polyline points=\"" + pts + "\" fill=\"none\" stroke=\"#d95f02\" "
         "stroke-width=\"2\"/>\n";

  svg += text_el(x0 - 6.0, y_base + 18.0, csv::format_double(w_lo), " font-size=\"11\"");
  svg += text_el(x0 + plot_w - 30.0, y_base + 18.0, csv::format_double(w_hi),
                 " font-size=\"11\"");
  svg += text_el(10.0, y_base + 4.0, csv::format_double(y_lo), " font-size=\"11\"");
  svg += text_el(10.0, y_base - plot_h + 4.0, csv::format_double(y_hi), " font-size=\"11\"");
  svg += text_el(x0 + plot_w / 2.0 - 30.0, y_base + 40.0, "exposure", " font-size=\"12\"");
  svg += text_el(10.0, y_base - plot_h / 2.0, "response", " font-size=\"12\"");
  svg += "</svg>\n";
  return svg;
}

void emit_erf_plot(const ErfEstimate& est, const std::string& out_path) {
  csv::write_file(out_path, erf_plot_svg(est));
}

}  // namespace gpsinfer
