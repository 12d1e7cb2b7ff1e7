// Per-qubit dephasing: rho -> (1 - p) rho + p Z rho Z on each target, with
// the quartz-plate law p(ell) = (1 - exp(-gamma ell^2)) / 2.
//
// gamma is in units of lambda0^-2 and ell in units of lambda0 (780 nm).
#pragma once

#include <map>
#include <span>
#include <vector>

#include "decohere/states.hpp"

namespace decohere {

struct DephasingSpec {
  double gamma = 0.0;
  double ell = 0.0;
  QubitSet targets;
  /// Optional per-qubit rate replacing `gamma` for that target.
  std::map<int, double> gamma_overrides;

  double gamma_for(int qubit) const;
};

/// Throws std::invalid_argument on negative inputs. Result lies in [0, 1/2].
double dephase_prob(double gamma, double ell);

/// Per-qubit p for every qubit in the register (0 for non-targets).
std::vector<double> dephasing_probabilities(const DephasingSpec& spec, int n_qubits);

/// Off-diagonal scaling: element (i, j) is multiplied by prod (1 - 2 p_q)
/// over qubits q where i and j differ. `p_per_qubit` has one entry per qubit.
DensityMatrix apply_dephasing(const DensityMatrix& rho, std::span<const double> p_per_qubit);
DensityMatrix apply_dephasing(const DensityMatrix& rho, const DephasingSpec& spec);
/// Same p on every qubit in `targets`.
DensityMatrix apply_dephasing_p(const DensityMatrix& rho, const QubitSet& targets, double p);

/// Reference path: sequential Kraus application with explicit Z_q operators.
DensityMatrix apply_dephasing_kraus(const DensityMatrix& rho, std::span<const double> p_per_qubit);

}  // namespace decohere
