#pragma once

#include <cstddef>
#include <vector>

namespace corrsim {

/// Dense row-major matrix, small enough to live in one vector.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct JacobiOptions {
  double tol = 1e-12;
  int max_sweeps = 10000;
};

/// Singular values in descending order, via one-sided (Hestenes) Jacobi rotations.
/// Throws NumericError carrying the largest remaining column coherence if
/// max_sweeps is reached first.
std::vector<double> singular_values(const Matrix& a, const JacobiOptions& opts = {});

}  // namespace corrsim
