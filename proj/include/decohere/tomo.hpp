// Simulated polarization tomography on n qubits.
//
// Every qubit is measured in X, Y or Z, giving 3^n product settings with 2^n
// outcomes each. Setting index s enumerates base-3 digits with qubit 0 most
// significant (X = 0, Y = 1, Z = 2); outcome bit 0 is the +1 eigenstate.
// Reconstruction is linear inversion of the Pauli expectations followed by a
// Frobenius-nearest projection onto unit-trace PSD matrices.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "decohere/measures.hpp"
#include "decohere/states.hpp"

namespace decohere {

enum class PauliBasis { X = 0, Y = 1, Z = 2 };

inline constexpr int kMaxTomographyQubits = 6;

std::size_t setting_count(int n_qubits);
std::vector<PauliBasis> setting_bases(std::size_t setting, int n_qubits);
std::string setting_label(std::size_t setting, int n_qubits);
/// Inverse of setting_label; throws std::invalid_argument on bad labels.
std::size_t parse_setting_label(const std::string& label);

enum class SamplingMode { Multinomial, Exact };

struct CountTable {
  int n_qubits = 0;
  std::uint64_t shots_per_setting = 0;
  /// counts[setting][outcome]
  std::vector<std::vector<std::uint64_t>> counts;
  /// Exact mode: the Born probabilities the counts were rounded from. The
  /// reconstruction uses these, so exact mode is the N -> infinity limit.
  std::optional<std::vector<std::vector<double>>> exact_probabilities;

  bool exact() const { return exact_probabilities.has_value(); }
  /// Throws std::invalid_argument when settings are missing or a setting's
  /// counts do not sum to shots_per_setting.
  void validate() const;
};

struct TomoResult {
  DensityMatrix rho_hat;
  std::optional<double> fidelity_vs_target;
  /// Sum of the negative eigenvalues removed by the PSD projection (as a positive number).
  double eigen_clip_mass = 0.0;
};

std::vector<double> born_probabilities(const DensityMatrix& rho, std::size_t setting);

/// Multinomial draws per setting from one generator seeded with `seed`. In
/// exact mode counts are N * p rounded by largest remainder and the seed is unused.
CountTable sample_counts(const DensityMatrix& rho, std::uint64_t shots, std::uint64_t seed,
                         SamplingMode mode = SamplingMode::Multinomial);

/// Linear-inversion estimate before projection (Hermitian, unit trace).
Matrix linear_inversion(const CountTable& table);

/// Nearest unit-trace PSD matrix in Frobenius norm to a unit-trace Hermitian
/// matrix: negative eigenvalues are zeroed and their mass spread uniformly
/// over the surviving ones. Returns the projected matrix and the clipped mass.
std::pair<Matrix, double> project_to_density(const Matrix& hermitian);

TomoResult reconstruct(const CountTable& table);
TomoResult reconstruct(const CountTable& table, const DensityMatrix& target);

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, clamped to [0, 1].
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

struct BootstrapOptions {
  std::uint64_t shots = 100000;
  int resamples = 100;
  std::uint64_t seed = 0;
  SamplingMode mode = SamplingMode::Multinomial;
  MeasureOptions measures;
  int threads = 1;
};

/// Simulates `resamples` independent tomography runs of `target` (resample b
/// seeded with seed + b) and returns the mean of each measure with its sample
/// standard deviation in `sigma`.
MeasureRecord bootstrap_measures(const DensityMatrix& target, const BootstrapOptions& options);

/// CSV with header `setting,outcome_bits,count`, one row per setting/outcome.
void write_counts_csv(std::ostream& out, const CountTable& table);
CountTable read_counts_csv(std::istream& in);

}  // namespace decohere
