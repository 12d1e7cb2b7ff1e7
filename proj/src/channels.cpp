#include "decohere/channels.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace decohere {

double DephasingSpec::gamma_for(int qubit) const {
  const auto it = gamma_overrides.find(qubit);
  return it == gamma_overrides.end() ? gamma : it->second;
}

double dephase_prob(double gamma, double ell) {
  if (!(gamma >= 0.0) || !(ell >= 0.0))
    throw std::invalid_argument("dephasing rate and thickness must be non-negative");
  const double p = -0.5 * std::expm1(-gamma * ell * ell);
  return std::min(p, 0.5);
}

std::vector<double> dephasing_probabilities(const DephasingSpec& spec, int n_qubits) {
  std::vector<double> p(static_cast<std::size_t>(n_qubits), 0.0);
  for (int q : spec.targets.labels()) {
    if (q >= n_qubits) throw std::invalid_argument("dephasing target out of range");
    p[static_cast<std::size_t>(q)] = dephase_prob(spec.gamma_for(q), spec.ell);
  }
  return p;
}

DensityMatrix apply_dephasing(const DensityMatrix& rho, std::span<const double> p_per_qubit) {
  const int n = rho.n_qubits();
  if (p_per_qubit.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("need one dephasing probability per qubit");
  std::vector<double> keep(p_per_qubit.size());
  for (std::size_t q = 0; q < keep.size(); ++q) {
    const double p = p_per_qubit[q];
    if (!(p >= 0.0 && p <= 0.5)) throw std::invalid_argument("dephasing probability outside [0, 1/2]");
    keep[q] = 1.0 - 2.0 * p;
  }

  // scale[x] = product of keep[q] over set bits of x = i XOR j
  const std::size_t d = rho.dim();
  std::vector<double> scale(d, 1.0);
  for (std::size_t x = 1; x < d; ++x) {
    const int low = std::countr_zero(x);
    scale[x] = scale[x & (x - 1)] * keep[static_cast<std::size_t>(n - 1 - low)];
  }

  Matrix out = rho.matrix();
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < d; ++i)
      if (i != j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *= scale[i ^ j];
  return DensityMatrix::trusted(n, std::move(out));
}

DensityMatrix apply_dephasing(const DensityMatrix& rho, const DephasingSpec& spec) {
  const auto p = dephasing_probabilities(spec, rho.n_qubits());
  return apply_dephasing(rho, std::span<const double>(p));
}

DensityMatrix apply_dephasing_p(const DensityMatrix& rho, const QubitSet& targets, double p) {
  std::vector<double> per_qubit(static_cast<std::size_t>(rho.n_qubits()), 0.0);
  for (int q : targets.labels()) {
    if (q >= rho.n_qubits()) throw std::invalid_argument("dephasing target out of range");
    per_qubit[static_cast<std::size_t>(q)] = p;
  }
  return apply_dephasing(rho, std::span<const double>(per_qubit));
}

DensityMatrix apply_dephasing_kraus(const DensityMatrix& rho, std::span<const double> p_per_qubit) {
  const int n = rho.n_qubits();
  if (p_per_qubit.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("need one dephasing probability per qubit");
  const auto d = static_cast<Eigen::Index>(rho.dim());
  Matrix current = rho.matrix();
  for (int q = 0; q < n; ++q) {
    const double p = p_per_qubit[static_cast<std::size_t>(q)];
    if (p == 0.0) continue;
    Matrix z = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      z(i, i) = ((static_cast<std::size_t>(i) >> (n - 1 - q)) & 1U) ? -1.0 : 1.0;
    current = (1.0 - p) * current + p * (z * current * z);
  }
  return DensityMatrix::trusted(n, std::move(current));
}

}  // namespace decohere
