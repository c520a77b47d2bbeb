#include "oracles.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

namespace testoracle {

using mp = boost::multiprecision::cpp_bin_float_50;

namespace {

const mp kPi = boost::math::constants::pi<mp>();

mp phi_mp(const mp& z) { return exp(-z * z / 2) / sqrt(2 * kPi); }

// Dense Gaussian elimination with partial pivoting in 50-digit precision.
std::vector<mp> solve_mp(std::vector<std::vector<mp>> a, std::vector<mp> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (abs(a[r][col]) > abs(a[pivot][col])) pivot = r;
    if (a[pivot][col] == 0) throw std::runtime_error("oracle solve: singular system");
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const mp factor = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
      b[r] -= factor * b[col];
    }
  }
  std::vector<mp> x(n);
  for (std::size_t i = n; i-- > 0;) {
    mp acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a[i][c] * x[c];
    x[i] = acc / a[i][i];
  }
  return x;
}

std::vector<mp> normal_equations_solve(const gpsinfer::Matrix& design,
                                       const std::vector<double>& y,
                                       const std::vector<double>* weights, double jitter) {
  const std::size_t n = design.rows;
  const std::size_t p = design.cols;
  std::vector<std::vector<mp>> ata(p, std::vector<mp>(p, mp(0)));
  std::vector<mp> aty(p, mp(0));
  for (std::size_t i = 0; i < n; ++i) {
    const mp w = weights ? mp((*weights)[i]) : mp(1);
    for (std::size_t r = 0; r < p; ++r) {
      const mp xr = mp(design.at(i, r)) * w;
      aty[r] += xr * mp(y[i]);
      for (std::size_t c = 0; c < p; ++c) ata[r][c] += xr * mp(design.at(i, c));
    }
  }
  for (std::size_t r = 0; r < p; ++r) ata[r][r] += mp(jitter);
  return solve_mp(std::move(ata), std::move(aty));
}

}  // namespace

std::vector<double> wls_mp(const gpsinfer::Matrix& design, const std::vector<double>& y,
                           const std::vector<double>* weights, double jitter) {
  const auto beta = normal_equations_solve(design, y, weights, jitter);
  std::vector<double> out(beta.size());
  for (std::size_t i = 0; i < beta.size(); ++i) out[i] = static_cast<double>(beta[i]);
  return out;
}

double weighted_pearson_mp(const std::vector<double>& x, const std::vector<double>& y,
                           const std::vector<double>& w) {
  const std::size_t n = x.size();
  mp sw(0), sx(0), sy(0);
  for (std::size_t i = 0; i < n; ++i) {
    sw += mp(w[i]);
    sx += mp(w[i]) * mp(x[i]);
    sy += mp(w[i]) * mp(y[i]);
  }
  const mp mx = sx / sw;
  const mp my = sy / sw;
  mp cxx(0), cyy(0), cxy(0);
  for (std::size_t i = 0; i < n; ++i) {
    const mp dx = mp(x[i]) - mx;
    const mp dy = mp(y[i]) - my;
    cxx += mp(w[i]) * dx * dx;
    cyy += mp(w[i]) * dy * dy;
    cxy += mp(w[i]) * dx * dy;
  }
  return static_cast<double>(cxy / sqrt(cxx * cyy));
}

double quantile_mp(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 1) return values[0];
  const mp h = mp(static_cast<unsigned>(n - 1)) * mp(p) + 1;  // 1-based position
  auto pos = static_cast<std::size_t>(floor(h).convert_to<double>());
  if (pos < 1) pos = 1;
  if (pos > n) pos = n;
  const mp frac = h - mp(static_cast<unsigned>(pos));
  const mp v0 = mp(values[pos - 1]);
  if (pos >= n) return static_cast<double>(v0);
  const mp v1 = mp(values[pos]);
  return static_cast<double>(v0 + frac * (v1 - v0));
}

double silverman_mp(const std::vector<double>& samples) {
  const std::size_t n = samples.size();
  mp mean(0);
  for (double s : samples) mean += mp(s);
  mean /= n;
  mp var(0);
  for (double s : samples) {
    const mp d = mp(s) - mean;
    var += d * d;
  }
  var /= n;
  const mp sd = sqrt(var);
  const mp iqr = mp(quantile_mp(samples, 0.75)) - mp(quantile_mp(samples, 0.25));
  mp spread = sd;
  if (iqr > 0) {
    const mp alt = iqr / mp("1.34");
    if (alt < sd) spread = alt;
  }
  const mp h = mp("0.9") * spread * pow(mp(static_cast<unsigned>(n)), mp("-0.2"));
  return static_cast<double>(h);
}

double local_linear_mp(const std::vector<double>& y, const std::vector<double>& e,
                       const std::vector<double>& w, double w0, double h) {
  mp s0(0), s1(0), s2(0), t0(0), t1(0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const mp d = mp(e[i]) - mp(w0);
    const mp k = mp(w[i]) * phi_mp(d / mp(h));
    s0 += k;
    s1 += k * d;
    s2 += k * d * d;
    t0 += k * mp(y[i]);
    t1 += k * d * mp(y[i]);
  }
  const mp denom = s0 * s2 - s1 * s1;
  if (denom == 0) throw std::runtime_error("oracle local-linear: singular design");
  return static_cast<double>((s2 * t0 - s1 * t1) / denom);
}

std::pair<double, double> poisson_mp(const std::vector<double>& y, const std::vector<double>& e,
                                     const std::vector<double>& w) {
  mp sy(0), sw(0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    sy += mp(w[i]) * mp(y[i]);
    sw += mp(w[i]);
  }
  mp start = sy / sw;
  if (start < mp("1e-12")) start = mp("1e-12");
  mp b0 = log(start);
  mp b1(0);
  for (int iter = 0; iter < 500; ++iter) {
    mp g0(0), g1(0), h00(0), h01(0), h11(0);
    for (std::size_t i = 0; i < y.size(); ++i) {
      const mp mu = exp(b0 + b1 * mp(e[i]));
      const mp wi(w[i]);
      const mp r = mp(y[i]) - mu;
      g0 += wi * r;
      g1 += wi * r * mp(e[i]);
      h00 += wi * mu;
      h01 += wi * mu * mp(e[i]);
      h11 += wi * mu * mp(e[i]) * mp(e[i]);
    }
    const mp det = h00 * h11 - h01 * h01;
    if (det == 0) throw std::runtime_error("oracle poisson: singular information matrix");
    const mp d0 = (h11 * g0 - h01 * g1) / det;
    const mp d1 = (h00 * g1 - h01 * g0) / det;
    b0 += d0;
    b1 += d1;
    const mp a0 = abs(d0);
    const mp a1 = abs(d1);
    if ((a0 > a1 ? a0 : a1) < mp("1e-40")) break;
  }
  return {static_cast<double>(b0), static_cast<double>(b1)};
}

gpsinfer::Matrix natural_spline_oracle(const std::vector<double>& x,
                                       const std::vector<double>& knots) {
  const std::size_t k = knots.size();
  if (k < 3) throw std::runtime_error("oracle spline: needs at least 3 knots");
  const std::size_t n = x.size();
  gpsinfer::Matrix out(n, k);  // [1, x, N_1..N_{k-2}]
  const double xi_last = knots[k - 1];
  const auto cube_plus = [](double v) { return v > 0.0 ? v * v * v : 0.0; };
  const auto d_fn = [&](std::size_t j, double t) {
    return (cube_plus(t - knots[j]) - cube_plus(t - xi_last)) / (xi_last - knots[j]);
  };
  for (std::size_t i = 0; i < n; ++i) {
    out.at(i, 0) = 1.0;
    out.at(i, 1) = x[i];
    for (std::size_t j = 0; j + 2 < k; ++j)
      out.at(i, 2 + j) = d_fn(j, x[i]) - d_fn(k - 2, x[i]);
  }
  return out;
}

double blend_mse(const gpsinfer::Matrix& cv_predictions, const std::vector<double>& y,
                 const std::vector<double>& alpha) {
  const std::size_t n = cv_predictions.rows;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = 0.0;
    for (std::size_t b = 0; b < cv_predictions.cols; ++b)
      pred += alpha[b] * cv_predictions.at(i, b);
    const double r = y[i] - pred;
    acc += r * r;
  }
  return acc / static_cast<double>(n);
}

std::vector<double> simplex_grid_alpha_2(const gpsinfer::Matrix& cv_predictions,
                                         const std::vector<double>& y, double step) {
  if (cv_predictions.cols != 2)
    throw std::runtime_error("oracle simplex grid supports exactly 2 bases");
  double best_alpha = 0.0;
  double best_mse = blend_mse(cv_predictions, y, {0.0, 1.0});
  for (double a = step; a <= 1.0 + 1e-12; a += step) {
    const double a1 = std::min(a, 1.0);
    const double mse = blend_mse(cv_predictions, y, {a1, 1.0 - a1});
    if (mse < best_mse) {
      best_mse = mse;
      best_alpha = a1;
    }
  }
  return {best_alpha, 1.0 - best_alpha};
}

bool xml_well_formed(const std::string& text) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  const std::size_t n = text.size();
  bool seen_root = false;
  bool root_closed = false;
  while (i < n) {
    if (text[i] != '<') {
      if (text[i] == '>') return false;
      ++i;
      continue;
    }
    if (text.compare(i, 4, "<!--") == 0) {
      const auto end = text.find("-->", i + 4);
      if (end == std::string::npos) return false;
      i = end + 3;
      continue;
    }
    if (text.compare(i, 2, "<?") == 0) {
      const auto end = text.find("?>", i + 2);
      if (end == std::string::npos) return false;
      i = end + 2;
      continue;
    }
    if (text.compare(i, 2, "<!") == 0) {
      const auto end = text.find('>', i + 2);
      if (end == std::string::npos) return false;
      i = end + 1;
      continue;
    }
    const bool closing = i + 1 < n && text[i + 1] == '/';
    std::size_t j = i + (closing ? 2 : 1);
    std::string name;
    while (j < n && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == ':' ||
                     text[j] == '-' || text[j] == '_' || text[j] == '.'))
      name += text[j++];
    if (name.empty()) return false;
    // Scan to the tag end, honoring quoted attribute values.
    bool self_closing = false;
    while (j < n && text[j] != '>') {
      if (text[j] == '"' || text[j] == '\'') {
        const char q = text[j];
        ++j;
        while (j < n && text[j] != q) ++j;
        if (j >= n) return false;
      } else if (text[j] == '<') {
        return false;
      } else if (text[j] == '/' && j + 1 < n && text[j + 1] == '>') {
        self_closing = true;
      }
      ++j;
    }
    if (j >= n) return false;
    if (closing) {
      if (self_closing) return false;
      if (stack.empty() || stack.back() != name) return false;
      stack.pop_back();
      if (stack.empty()) root_closed = true;
    } else if (!self_closing) {
      if (root_closed) return false;  // content after the root element
      stack.push_back(name);
      seen_root = true;
    } else if (stack.empty()) {
      if (root_closed || seen_root) return false;
      seen_root = true;
      root_closed = true;
    }
    i = j + 1;
  }
  return seen_root && stack.empty();
}

double trapezoid(const std::function<double(double)>& f, double lo, double hi, std::size_t n) {
  const double h = (hi - lo) / static_cast<double>(n);
  double acc = 0.5 * (f(lo) + f(hi));
  for (std::size_t i = 1; i < n; ++i) acc += f(lo + h * static_cast<double>(i));
  return acc * h;
}

BruteLevel brute_match_level(double w_star, const std::vector<double>& exposure,
                             const std::vector<double>& gps_observed,
                             const std::vector<double>& gps_at_level,
                             const std::vector<std::int64_t>& ids, double delta, double lambda,
                             double e_min, double e_max, double p_min, double p_max) {
  const std::size_t n = exposure.size();
  BruteLevel out;
  out.counts.assign(n, 0);

  const auto unit = [](double v, double lo, double hi) {
    const double u = (v - lo) / (hi - lo);
    return u < 0.0 ? 0.0 : (u > 1.0 ? 1.0 : u);
  };

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(exposure[i] - w_star) <= delta / 2.0) candidates.push_back(i);
  if (candidates.empty()) {
    out.skipped = true;
    return out;
  }

  const double w_unit = unit(w_star, e_min, e_max);
  for (std::size_t j = 0; j < n; ++j) {
    const double pj = unit(gps_at_level[j], p_min, p_max);
    bool have = false;
    double best = 0.0;
    std::size_t best_row = 0;
    std::int64_t best_id = 0;
    for (std::size_t i : candidates) {
      const double dist = lambda * std::abs(pj - unit(gps_observed[i], p_min, p_max)) +
                          (1.0 - lambda) * std::abs(w_unit - unit(exposure[i], e_min, e_max));
      if (!have || dist < best || (dist == best && ids[i] < best_id)) {
        have = true;
        best = dist;
        best_row = i;
        best_id = ids[i];
      }
    }
    out.counts[best_row] += 1;
  }
  return out;
}

}  // namespace testoracle
