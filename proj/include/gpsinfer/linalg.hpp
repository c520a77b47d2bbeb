#pragma once

// Small dense matrix plus the one solver this project needs: weighted least
// squares through the normal equations with a fixed ridge jitter. Every design
// here is tiny (a dozen columns at most), so a plain Cholesky is exact enough
// and keeps behaviour bit-for-bit deterministic.

#include <cstddef>
#include <vector>

namespace gpsinfer {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// Solves (A'WA + jitter*I) beta = A'Wy for beta. `weights` may be nullptr
// (all ones). Throws SingularDesign if the jittered normal matrix is not
// positive definite, std::invalid_argument on shape mismatches.
std::vector<double> wls_solve(const Matrix& design, const std::vector<double>& y,
                              const std::vector<double>* weights, double jitter);

// In-place Cholesky solve of S x = b for symmetric positive definite S
// (row-major, n x n). Throws SingularDesign on a non-positive pivot.
std::vector<double> cholesky_solve(std::vector<double> s, std::vector<double> b,
                                   std::size_t n);

}  // namespace gpsinfer
