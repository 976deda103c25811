// Deterministic random helpers for identity suites and randomized tests.
// splitmix64 core so that a fixed seed reproduces bit-identical streams.
#pragma once

#include <cstdint>

#include "emm/voigt.hpp"

namespace emm {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double normal() {
    // Box-Muller; fresh pair every call keeps the stream position simple.
    const double u1 = std::max(uniform(), 1e-300);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  Vector normal_vector(int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  Matrix normal_matrix(int rows, int cols) {
    Matrix a(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) a(i, j) = normal();
    return a;
  }

  // Random m x m SPD matrix with spectrum in [lmin, lmax].
  Matrix spd(int m, double lmin = 0.1, double lmax = 10.0) {
    Eigen::HouseholderQR<Matrix> qr(normal_matrix(m, m));
    Matrix q = qr.householderQ();
    Vector l(m);
    for (int i = 0; i < m; ++i) l(i) = uniform(lmin, lmax);
    Matrix k = q * l.asDiagonal() * q.transpose();
    return 0.5 * (k + k.transpose());
  }

  // Random symmetric d x d matrix with entries of order 1.
  Matrix symmetric(int d) {
    Matrix a = normal_matrix(d, d);
    return 0.5 * (a + a.transpose());
  }

 private:
  std::uint64_t state_;
};

}  // namespace emm
