// Entropies and the relative-entropy family of coherence/correlation
// measures. All values are in nats.
//
//   C   = S(rho_d) - S(rho)                total coherence
//   C_L = S(pi_d(rho)) - S(pi(rho))        local coherence
//   C_G = C - C_L                          global coherence
//   T   = S(pi(rho)) - S(rho)              mutual information
//   K   = S(pi(rho_d)) - S(rho_d)          classical correlations
//   M   = C + K = T + C_L                  hookup
//   E   = min over fully separable sigma of S(rho || sigma)   (see ree.hpp)
#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "decohere/ree.hpp"
#include "decohere/states.hpp"

namespace decohere {

double von_neumann_entropy(const DensityMatrix& rho);

/// Entropy of the diagonal of rho (Shannon entropy of the populations).
double diagonal_entropy(const DensityMatrix& rho);

/// S(rho || sigma). Returns +infinity when supp(rho) is not contained in
/// supp(sigma) (sigma eigenvalue below 1e-12 carrying rho weight above 1e-12).
double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);

double total_coherence(const DensityMatrix& rho);
double local_coherence(const DensityMatrix& rho);
double global_coherence(const DensityMatrix& rho);
double mutual_information(const DensityMatrix& rho);
double classical_correlations(const DensityMatrix& rho);

/// Evaluates both C + K and T + C_L, throws NumericalError if they differ by
/// more than 1e-9, and returns their mean.
double hookup(const DensityMatrix& rho);

enum class Quantity { E, C, CG, CL, T, K, M };
inline constexpr std::array<Quantity, 7> kAllQuantities = {
    Quantity::E, Quantity::C, Quantity::CG, Quantity::CL, Quantity::T, Quantity::K, Quantity::M};

/// CSV column label: E, C, CG, CL, T, K, M.
std::string_view label(Quantity q);
std::optional<Quantity> parse_quantity(std::string_view text);

struct MeasureRecord {
  double E = 0.0;
  double C = 0.0;
  double CG = 0.0;
  double CL = 0.0;
  double T = 0.0;
  double K = 0.0;
  double M = 0.0;
  /// One-sigma uncertainties, present only for Monte-Carlo estimates.
  std::optional<std::array<double, 7>> sigma;
  /// False when E was skipped (left at 0).
  bool has_entanglement = false;
  /// Diagnostics of the entanglement solve for a single-state evaluation.
  std::optional<ReeResult> ree;
  /// C + K and T + C_L before averaging into M.
  double M_via_coherence = 0.0;
  double M_via_correlations = 0.0;

  double get(Quantity q) const;
  void set(Quantity q, double value);
};

struct MeasureOptions {
  bool compute_entanglement = true;
  ReeOptions ree;
};

/// Fills all seven scalars; E comes from the separable-state solver unless
/// disabled, in which case it is left at 0 and `ree` stays empty.
MeasureRecord all_measures(const DensityMatrix& rho, const MeasureOptions& options = {});

/// Checks C = C_G + C_L and M consistency (1e-9) and, when E was computed,
/// E <= C + tolerance. Returns an empty string on success, else a description.
std::string check_record_invariants(const MeasureRecord& record, double e_tolerance = 1e-9);

/// Converts every value (and uncertainty) from nats to bits.
MeasureRecord to_bits(MeasureRecord record);

}  // namespace decohere
