#include "gpsinfer/linalg.hpp"

#include <cmath>
#include <stdexcept>

#include "gpsinfer/errors.hpp"

namespace gpsinfer {

std::vector<double> cholesky_solve(std::vector<double> s, std::vector<double> b,
                                   std::size_t n) {
  if (s.size() != n * n || b.size() != n) {
    throw std::invalid_argument("cholesky_solve: shape mismatch");
  }
  // S = L L', stored in the lower triangle of s.
  for (std::size_t j = 0; j < n; ++j) {
    double d = s[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= s[j * n + k] * s[j * n + k];
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw SingularDesign("normal matrix is not positive definite (rank deficiency beyond jitter)");
    }
    const double ljj = std::sqrt(d);
    s[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = s[i * n + j];
      for (std::size_t k = 0; k < j; ++k) v -= s[i * n + k] * s[j * n + k];
      s[i * n + j] = v / ljj;
    }
  }
  // Forward solve L z = b.
  for (std::size_t i = 0; i < n; ++i) {
    double v = b[i];
    for (std::size_t k = 0; k < i; ++k) v -= s[i * n + k] * b[k];
    b[i] = v / s[i * n + i];
  }
  // Back solve L' x = z.
  for (std::size_t ii = n; ii-- > 0;) {
    double v = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) v -= s[k * n + ii] * b[k];
    b[ii] = v / s[ii * n + ii];
  }
  return b;
}

std::vector<double> wls_solve(const Matrix& design, const std::vector<double>& y,
                              const std::vector<double>* weights, double jitter) {
  const std::size_t n = design.rows;
  const std::size_t p = design.cols;
  if (y.size() != n) throw std::invalid_argument("wls_solve: y length mismatch");
  if (weights && weights->size() != n) {
    throw std::invalid_argument("wls_solve: weights length mismatch");
  }
  std::vector<double> ata(p * p, 0.0);
  std::vector<double> aty(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights ? (*weights)[i] : 1.0;
    if (w == 0.0) continue;
    const double* row = design.data.data() + i * p;
    for (std::size_t a = 0; a < p; ++a) {
      const double wa = w * row[a];
      aty[a] += wa * y[i];
      for (std::size_t b = a; b < p; ++b) ata[a * p + b] += wa * row[b];
    }
  }
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = 0; b < a; ++b) ata[a * p + b] = ata[b * p + a];
    ata[a * p + a] += jitter;
  }
  return cholesky_solve(std::move(ata), std::move(aty), p);
}

}  // namespace gpsinfer
