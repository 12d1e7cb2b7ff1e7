// Shared fixtures for the unit suites.
#pragma once

#include <cmath>
#include <random>

#include "decohere/states.hpp"
#include "oracle/brute_force.hpp"

namespace decohere::testing {

inline DensityMatrix named(std::string_view name) {
  return density_from_pure(make_named_state(parse_state_name(name)));
}

inline oracle::Grid to_grid(const DensityMatrix& rho) {
  oracle::Grid g = oracle::zeros(rho.dim());
  for (std::size_t i = 0; i < rho.dim(); ++i)
    for (std::size_t j = 0; j < rho.dim(); ++j) g[i][j] = rho(i, j);
  return g;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline double max_abs_diff(const DensityMatrix& a, const oracle::Grid& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) worst = std::max(worst, std::abs(a(i, j) - b[i][j]));
  return worst;
}

// Random mixed state of given rank: normalized G G^dagger with complex Gaussian G.
inline DensityMatrix random_density(int n, std::mt19937_64& rng, int rank = 0) {
  const Eigen::Index d = Eigen::Index{1} << n;
  const Eigen::Index r = rank > 0 ? rank : d;
  std::normal_distribution<double> g;
  Matrix m(d, r);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < r; ++j) m(i, j) = Complex(g(rng), g(rng));
  Matrix rho = m * m.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(n, 0.5 * (rho + rho.adjoint()));
}

inline PureState random_pure(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vector v(Eigen::Index{1} << n);
  for (auto& x : v) x = Complex(g(rng), g(rng));
  return PureState(n, v / v.norm());
}

inline DensityMatrix single_qubit(Complex a, Complex b) {
  Vector v(2);
  v << a, b;
  return density_from_pure(PureState(1, v / v.norm()));
}

}  // namespace decohere::testing
