#pragma once

#include <cstdint>
#include <random>

#include "lsa/numkit.hpp"

namespace lsa::test {

inline DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  DenseMatrix m(rows, cols);
  for (double& v : m.data()) v = normal(rng);
  return m;
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

inline DenseMatrix random_orthogonal(std::size_t n, std::uint64_t seed) {
  return svd(random_matrix(n, n, seed)).u;
}

inline double orthonormality_error(const DenseMatrix& q) {
  return max_abs_difference(transpose_times(q, q), DenseMatrix::identity(q.cols()));
}

}  // namespace lsa::test
