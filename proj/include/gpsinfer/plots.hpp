#pragma once

// Self-contained SVG 1.1 emission for the two standard figures: the covariate
// balance dot chart and the exposure-response curve. Conventions the tests
// rely on: data markers are the only <circle> elements, the two reference
// lines (solid threshold, dashed mean adjusted AC) are the only <line>
// elements, axes are <path>, the response curve is one <polyline> with one
// vertex per grid point, and the optional confidence band is one <polygon>
// with 2k vertices.

#include <string>

#include "gpsinfer/balance.hpp"
#include "gpsinfer/erf.hpp"

namespace gpsinfer {

// Covariate rows sorted descending by original AC; per row one marker for the
// original and one for the adjusted AC. Horizontal axis is linear on [0, A]
// where A = max(all plotted ACs, threshold, mean adjusted AC):
// x(v) = 150 + v * 560 / A.
std::string balance_plot_svg(const BalanceReport& report, double threshold);
void emit_balance_plot(const BalanceReport& report, double threshold,
                       const std::string& out_path);

// Polyline of (w, estimate) with the optional band drawn beneath it. Axes are
// linear: x on [min w, max w] over 560 px from x=100, y on [lo, hi] (data and
// band extent, padded 5%) over 360 px from y=420 upward.
std::string erf_plot_svg(const ErfEstimate& est);
void emit_erf_plot(const ErfEstimate& est, const std::string& out_path);

}  // namespace gpsinfer
