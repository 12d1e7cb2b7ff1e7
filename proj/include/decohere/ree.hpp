// Relative entropy of entanglement with respect to fully separable states.
//
// The separable candidate is an explicit ensemble
//     sigma = sum_j p_j |a_j><a_j| (x) |b_j><b_j| (x) |c_j><c_j| ...
// with every single-qubit factor written in Bloch angles
//     |a> = (cos(theta/2), e^{i phi} sin(theta/2)).
// The solver alternates a convex weight update (factors fixed) with a
// line-searched descent on the angles (weights fixed), from several random
// starts plus one start built from the eigenbases of the single-qubit
// marginals, and returns the best S(rho || sigma) found. The result is an upper
// bound on the true minimum.
#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "decohere/states.hpp"

namespace decohere {

struct ReeOptions {
  /// Ensemble size; 0 selects 4 * 2^n.
  int ensemble_size = 0;
  /// Random starts; one deterministic start is always added.
  int restarts = 24;
  int max_iters = 2000;
  /// Stop a restart once one outer iteration lowers the objective by less than this.
  double tol = 1e-8;
  std::uint64_t seed = 0;
  /// Results below this are reported as exactly zero entanglement.
  double zero_floor = 1e-6;
  /// Worker threads for independent restarts.
  int threads = 1;
};

class SeparableEnsemble {
 public:
  /// `angles` holds (theta, phi) per member and qubit: index 2 * (j * n + q).
  /// Weights must be non-negative and sum to 1 within 1e-9; they are
  /// renormalized exactly.
  SeparableEnsemble(int n_qubits, std::vector<double> weights, std::vector<double> angles);

  /// Builds the ensemble from explicit single-qubit kets (normalized on input).
  static SeparableEnsemble from_factors(
      int n_qubits, std::vector<double> weights,
      const std::vector<std::vector<std::array<Complex, 2>>>& factors);

  /// Haar-random factors with uniform weights.
  static SeparableEnsemble random(int n_qubits, int members, std::mt19937_64& rng);

  int n_qubits() const { return n_qubits_; }
  int size() const { return static_cast<int>(weights_.size()); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& angles() const { return angles_; }
  double theta(int member, int qubit) const { return angles_[angle_index(member, qubit)]; }
  double phi(int member, int qubit) const { return angles_[angle_index(member, qubit) + 1]; }

  /// Single-qubit ket with the first nonzero amplitude real and non-negative.
  std::array<Complex, 2> factor(int member, int qubit) const;
  /// Product ket of one member.
  Vector member_ket(int member) const;
  Matrix assemble() const;
  DensityMatrix density() const;

  SeparableEnsemble with_weights(std::vector<double> weights) const;
  SeparableEnsemble with_angles(std::vector<double> angles) const;

 private:
  std::size_t angle_index(int member, int qubit) const {
    return 2 * (static_cast<std::size_t>(member) * static_cast<std::size_t>(n_qubits_) +
                static_cast<std::size_t>(qubit));
  }

  int n_qubits_;
  std::vector<double> weights_;
  std::vector<double> angles_;
};

struct ReeResult {
  /// Best S(rho || sigma_star) found (raw, not floored).
  double value = 0.0;
  /// `value`, or exactly 0 when value < zero_floor.
  double floored_value = 0.0;
  DensityMatrix sigma_star;
  int iterations = 0;
  int restarts_used = 0;
  bool converged = false;
  /// Worst random-restart optimum minus the best optimum found.
  double spread = 0.0;
  /// Optima of the random restarts, in seed order.
  std::vector<double> restart_values;
  /// Optimum reached from the marginal-eigenbasis start.
  double warm_start_value = 0.0;
};

/// S(rho || sigma) for the ensemble's sigma, mixed with 1e-12 of the
/// maximally mixed state to keep the logarithm finite.
double ree_objective(const DensityMatrix& rho, const SeparableEnsemble& ensemble);

/// d objective / d p_j (factors fixed).
std::vector<double> ree_weight_gradient(const DensityMatrix& rho, const SeparableEnsemble& ensemble);
/// d objective / d angle, laid out like SeparableEnsemble::angles().
std::vector<double> ree_factor_gradient(const DensityMatrix& rho, const SeparableEnsemble& ensemble);

/// Folds members whose product kets coincide up to phase into one member.
SeparableEnsemble merge_duplicate_members(const SeparableEnsemble& ensemble);

/// One descent step on the weights with factors fixed. The objective never
/// increases; duplicate members are merged first.
SeparableEnsemble ree_fixed_states_weight_step(const DensityMatrix& rho,
                                               const SeparableEnsemble& ensemble);

struct FactorStepResult {
  SeparableEnsemble ensemble;
  bool accepted = false;
  double step = 0.0;
  double objective = 0.0;
};

/// One Armijo-backtracked descent step on the factor angles with weights
/// fixed, starting from `initial_step`. A rejected step returns the input.
FactorStepResult ree_factor_step(const DensityMatrix& rho, const SeparableEnsemble& ensemble,
                                 double initial_step = 1.0);

/// Solved in a canonical qubit order, so relabelling the input qubits leaves
/// the value unchanged. Throws std::invalid_argument unless 2 <= n_qubits <= 4.
ReeResult ree(const DensityMatrix& rho, const ReeOptions& options = {});

}  // namespace decohere
