#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "goodset/error.hpp"

namespace goodset {

// Dense row-major matrix. Small enough on purpose: the solvers only need
// row views and (rows, cols) bookkeeping; factorizations live behind oracle.cpp.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data.data() + i * cols, cols);
  }
  std::span<double> row(std::size_t i) {
    return std::span<double>(data.data() + i * cols, cols);
  }
};

}  // namespace goodset
