// Dense n-qubit states and the structural maps used by every measure.
//
// Basis convention: computational-basis index with qubit 0 (label A) as the
// most significant bit, so |abc> has index 4a + 2b + c on three qubits.
#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace decohere {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr int kMaxQubits = 10;

/// Raised when a numerical routine cannot produce a trustworthy result
/// (eigenvalues too negative, identities violated, solver divergence).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ordered, duplicate-free set of qubit labels in [0, n).
class QubitSet {
 public:
  QubitSet() = default;
  QubitSet(std::vector<int> labels, int n_qubits);
  static QubitSet all(int n_qubits);

  const std::vector<int>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  bool contains(int label) const;
  /// Bit mask in index space (qubit q <-> bit n-1-q).
  std::size_t mask(int n_qubits) const;

 private:
  std::vector<int> labels_;
};

class PureState {
 public:
  /// Throws std::invalid_argument unless the vector has length 2^n and unit norm.
  PureState(int n_qubits, Vector amplitudes);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }
  const Vector& amplitudes() const { return amplitudes_; }
  Complex operator[](std::size_t index) const { return amplitudes_[static_cast<Eigen::Index>(index)]; }

 private:
  int n_qubits_;
  Vector amplitudes_;
};

/// Trace-one PSD Hermitian matrix on n qubits; immutable once built.
class DensityMatrix {
 public:
  /// Validates Hermiticity (1e-12), unit trace (1e-12) and PSD (min eig >= -1e-10).
  DensityMatrix(int n_qubits, Matrix elements);

  /// Skips validation. For internal use where the construction guarantees
  /// the invariants up to round-off (channel outputs, tensor products).
  static DensityMatrix trusted(int n_qubits, Matrix elements);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return static_cast<std::size_t>(elements_.rows()); }
  const Matrix& matrix() const { return elements_; }
  Complex operator()(std::size_t i, std::size_t j) const {
    return elements_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  bool is_diagonal() const;

 private:
  struct Unchecked {};
  DensityMatrix(int n_qubits, Matrix elements, Unchecked);

  int n_qubits_;
  Matrix elements_;
};

struct NamedState {
  enum class Kind { W, Wbar, WWbar, Star, GHZ, Dicke, BasisKet };
  Kind kind = Kind::WWbar;
  int n = 3;
  int k = 0;
  std::string bits;  // BasisKet only

  static NamedState ghz(int n) { return {Kind::GHZ, n, 0, {}}; }
  static NamedState dicke(int n, int k) { return {Kind::Dicke, n, k, {}}; }
  static NamedState basis_ket(std::string bits) {
    const int n = static_cast<int>(bits.size());
    return {Kind::BasisKet, n, 0, std::move(bits)};
  }
  static NamedState of(Kind kind) { return {kind, 3, 0, {}}; }
};

/// Parses `w`, `wbar`, `wwbar`, `star`, `ghz:N`, `dicke:N:K`, `ket:0101`.
NamedState parse_state_name(std::string_view text);
std::string to_string(const NamedState& name);

PureState make_named_state(const NamedState& name);
DensityMatrix density_from_pure(const PureState& psi);

/// Projects qubit q onto (|0> + |1>)/sqrt(2), removes it, renormalizes.
/// Throws NumericalError when the projected norm is below 1e-12.
PureState project_qubit_plus(const PureState& psi, int qubit);

/// Kronecker product; the first argument's qubits are more significant.
DensityMatrix tensor(const DensityMatrix& first, const DensityMatrix& second);
DensityMatrix partial_trace(const DensityMatrix& rho, const QubitSet& keep);
DensityMatrix partial_transpose(const DensityMatrix& rho, int qubit);
/// Relabels qubits: qubit k of the result is qubit order[k] of rho.
DensityMatrix permute_qubits(const DensityMatrix& rho, const std::vector<int>& order);
DensityMatrix dephased_diagonal(const DensityMatrix& rho);
/// pi(rho): tensor product of all single-qubit marginals in qubit order.
DensityMatrix product_of_marginals(const DensityMatrix& rho);
DensityMatrix maximally_mixed(int n_qubits);

struct EigenSystem {
  Eigen::VectorXd values;  // ascending
  Matrix vectors;          // columns are orthonormal eigenvectors
};

/// Throws std::invalid_argument when ||H - H^dagger||_max > 1e-10.
EigenSystem eig_hermitian(const Matrix& hermitian);

/// Eigenvalues of a density matrix with [-1e-10, 0) clamped to zero.
/// Throws NumericalError for anything more negative.
Eigen::VectorXd clamped_spectrum(const Matrix& rho);

double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace decohere
