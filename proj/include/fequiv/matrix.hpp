#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fequiv {

// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> values);

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

// Bitwise equality of two double ranges (distinguishes -0.0 from 0.0).
bool bit_equal(std::span<const double> a, std::span<const double> b);

// Maximum absolute entry-wise difference; ranges must have equal length.
double linf_distance(std::span<const double> a, std::span<const double> b);

// Maps a double to an integer key whose ordering is a total order consistent
// with < on non-NaN values, ordering -0.0 before +0.0.
long long total_order_key(double x) noexcept;

}  // namespace fequiv
