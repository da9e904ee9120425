#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace occafs {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent seed from (base, a, b), so parallel work items get
// uncorrelated streams regardless of scheduling order.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t s = base;
  std::uint64_t h = splitmix64(s);
  s ^= a * 0xd1b54a32d192ed03ULL + 0x9e3779b97f4a7c15ULL;
  h ^= splitmix64(s);
  s ^= b * 0x2545f4914f6cdd1dULL + 0x632be59bd9b4e019ULL;
  h ^= splitmix64(s);
  return h;
}

// Standard normal entries, filled column by column (fixed order keeps results
// reproducible for a given engine state).
inline Eigen::MatrixXd gaussian_matrix(std::mt19937_64& rng, Eigen::Index rows,
                                       Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd G(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) G(i, j) = normal(rng);
  return G;
}

}  // namespace occafs
