#pragma once

// Seeded generators for property tests.

#include <cstdint>
#include <random>

#include "peapod/spin.hpp"

namespace peapod::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }

  Matrix complex_matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = cplx(normal(), normal());
    }
    return m;
  }
  Matrix hermitian(Eigen::Index dim, double scale = 1.0) {
    const Matrix a = complex_matrix(dim, dim);
    return (0.5 * scale) * (a + a.adjoint());
  }
  Matrix unitary(Eigen::Index dim) {
    return complex_matrix(dim, dim).householderQr().householderQ();
  }
  Vector state(Eigen::Index dim) {
    Vector v = complex_matrix(dim, 1).col(0);
    return v / v.norm();
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline Matrix identity(Eigen::Index dim) { return Matrix::Identity(dim, dim); }

}  // namespace peapod::testing
