#include "decohere/states.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>

namespace decohere {
namespace {

constexpr double kNormTol = 1e-12;
constexpr double kHermitianTol = 1e-12;
constexpr double kTraceTol = 1e-12;
constexpr double kPsdTol = 1e-10;
constexpr double kEigHermitianTol = 1e-10;

std::size_t dim_of(int n_qubits) { return std::size_t{1} << n_qubits; }

void check_register(int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits)
    throw std::invalid_argument("register size must be in [1, " + std::to_string(kMaxQubits) +
                                "], got " + std::to_string(n_qubits));
}

int parse_int(std::string_view text) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw std::invalid_argument("not an integer: '" + std::string(text) + "'");
  return value;
}

PureState from_support(int n_qubits, const std::vector<std::size_t>& support) {
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(dim_of(n_qubits)));
  const double a = 1.0 / std::sqrt(static_cast<double>(support.size()));
  for (std::size_t index : support) amps[static_cast<Eigen::Index>(index)] = a;
  return PureState(n_qubits, std::move(amps));
}

}  // namespace

QubitSet::QubitSet(std::vector<int> labels, int n_qubits) : labels_(std::move(labels)) {
  std::sort(labels_.begin(), labels_.end());
  if (std::adjacent_find(labels_.begin(), labels_.end()) != labels_.end())
    throw std::invalid_argument("duplicate qubit label");
  for (int q : labels_)
    if (q < 0 || q >= n_qubits)
      throw std::invalid_argument("qubit label " + std::to_string(q) + " out of range for " +
                                  std::to_string(n_qubits) + " qubits");
}

QubitSet QubitSet::all(int n_qubits) {
  std::vector<int> labels(static_cast<std::size_t>(n_qubits));
  for (int q = 0; q < n_qubits; ++q) labels[static_cast<std::size_t>(q)] = q;
  return QubitSet(std::move(labels), n_qubits);
}

bool QubitSet::contains(int label) const {
  return std::binary_search(labels_.begin(), labels_.end(), label);
}

std::size_t QubitSet::mask(int n_qubits) const {
  std::size_t m = 0;
  for (int q : labels_) m |= std::size_t{1} << (n_qubits - 1 - q);
  return m;
}

PureState::PureState(int n_qubits, Vector amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
  check_register(n_qubits);
  if (static_cast<std::size_t>(amplitudes_.size()) != dim_of(n_qubits))
    throw std::invalid_argument("amplitude vector length must be 2^n");
  if (std::abs(amplitudes_.squaredNorm() - 1.0) > kNormTol)
    throw std::invalid_argument("pure state is not normalized");
}

DensityMatrix::DensityMatrix(int n_qubits, Matrix elements, Unchecked)
    : n_qubits_(n_qubits), elements_(std::move(elements)) {}

DensityMatrix DensityMatrix::trusted(int n_qubits, Matrix elements) {
  return DensityMatrix(n_qubits, std::move(elements), Unchecked{});
}

DensityMatrix::DensityMatrix(int n_qubits, Matrix elements)
    : n_qubits_(n_qubits), elements_(std::move(elements)) {
  check_register(n_qubits);
  const auto d = static_cast<Eigen::Index>(dim_of(n_qubits));
  if (elements_.rows() != d || elements_.cols() != d)
    throw std::invalid_argument("density matrix must be 2^n x 2^n");
  if ((elements_ - elements_.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol)
    throw std::invalid_argument("density matrix is not Hermitian");
  if (std::abs(elements_.trace() - Complex{1.0, 0.0}) > kTraceTol)
    throw std::invalid_argument("density matrix does not have unit trace");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(elements_, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -kPsdTol)
    throw std::invalid_argument("density matrix is not positive semidefinite");
}

bool DensityMatrix::is_diagonal() const {
  for (Eigen::Index j = 0; j < elements_.cols(); ++j)
    for (Eigen::Index i = 0; i < elements_.rows(); ++i)
      if (i != j && elements_(i, j) != Complex{0.0, 0.0}) return false;
  return true;
}

NamedState parse_state_name(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::vector<std::string_view> parts;
  std::string_view rest(lower);
  while (true) {
    const auto colon = rest.find(':');
    parts.push_back(rest.substr(0, colon));
    if (colon == std::string_view::npos) break;
    rest.remove_prefix(colon + 1);
  }
  const std::string_view head = parts.front();
  using Kind = NamedState::Kind;
  if (parts.size() == 1) {
    if (head == "w") return NamedState::of(Kind::W);
    if (head == "wbar") return NamedState::of(Kind::Wbar);
    if (head == "wwbar") return NamedState::of(Kind::WWbar);
    if (head == "star") return NamedState::of(Kind::Star);
  }
  if (head == "ghz" && parts.size() == 2) return NamedState::ghz(parse_int(parts[1]));
  if (head == "dicke" && parts.size() == 3)
    return NamedState::dicke(parse_int(parts[1]), parse_int(parts[2]));
  if (head == "ket" && parts.size() == 2) return NamedState::basis_ket(std::string(parts[1]));
  throw std::invalid_argument("unknown state name '" + std::string(text) + "'");
}

std::string to_string(const NamedState& name) {
  using Kind = NamedState::Kind;
  switch (name.kind) {
    case Kind::W: return "w";
    case Kind::Wbar: return "wbar";
    case Kind::WWbar: return "wwbar";
    case Kind::Star: return "star";
    case Kind::GHZ: return "ghz:" + std::to_string(name.n);
    case Kind::Dicke: return "dicke:" + std::to_string(name.n) + ":" + std::to_string(name.k);
    case Kind::BasisKet: return "ket:" + name.bits;
  }
  return "?";
}

PureState make_named_state(const NamedState& name) {
  using Kind = NamedState::Kind;
  switch (name.kind) {
    case Kind::W: return from_support(3, {0b001, 0b010, 0b100});
    case Kind::Wbar: return from_support(3, {0b110, 0b101, 0b011});
    case Kind::WWbar: return from_support(3, {0b001, 0b010, 0b100, 0b110, 0b101, 0b011});
    case Kind::Star: return from_support(3, {0b000, 0b100, 0b101, 0b111});
    case Kind::GHZ: {
      check_register(name.n);
      return from_support(name.n, {0, dim_of(name.n) - 1});
    }
    case Kind::Dicke: {
      check_register(name.n);
      if (name.k < 0 || name.k > name.n)
        throw std::invalid_argument("Dicke excitation count must satisfy 0 <= k <= n");
      std::vector<std::size_t> support;
      for (std::size_t i = 0; i < dim_of(name.n); ++i)
        if (std::popcount(i) == name.k) support.push_back(i);
      return from_support(name.n, support);
    }
    case Kind::BasisKet: {
      const int n = static_cast<int>(name.bits.size());
      check_register(n);
      std::size_t index = 0;
      for (char c : name.bits) {
        if (c != '0' && c != '1') throw std::invalid_argument("basis ket must be a bit string");
        index = (index << 1) | static_cast<std::size_t>(c - '0');
      }
      return from_support(n, {index});
    }
  }
  throw std::invalid_argument("unknown state kind");
}

DensityMatrix density_from_pure(const PureState& psi) {
  return DensityMatrix::trusted(psi.n_qubits(), psi.amplitudes() * psi.amplitudes().adjoint());
}

PureState project_qubit_plus(const PureState& psi, int qubit) {
  const int n = psi.n_qubits();
  if (n < 2) throw std::invalid_argument("projection needs at least two qubits");
  if (qubit < 0 || qubit >= n) throw std::invalid_argument("qubit label out of range");
  const int shift = n - 1 - qubit;
  const std::size_t low_mask = (std::size_t{1} << shift) - 1;
  Vector out = Vector::Zero(static_cast<Eigen::Index>(dim_of(n - 1)));
  for (std::size_t i = 0; i < psi.dim(); ++i) {
    const std::size_t reduced = ((i >> (shift + 1)) << shift) | (i & low_mask);
    out[static_cast<Eigen::Index>(reduced)] += psi[i] / std::sqrt(2.0);
  }
  const double norm = out.norm();
  if (norm < 1e-12) throw NumericalError("projection onto |+> has zero norm");
  return PureState(n - 1, out / norm);
}

DensityMatrix tensor(const DensityMatrix& first, const DensityMatrix& second) {
  const auto da = static_cast<Eigen::Index>(first.dim());
  const auto db = static_cast<Eigen::Index>(second.dim());
  Matrix out(da * db, da * db);
  for (Eigen::Index i = 0; i < da; ++i)
    for (Eigen::Index j = 0; j < da; ++j)
      out.block(i * db, j * db, db, db) = first.matrix()(i, j) * second.matrix();
  return DensityMatrix::trusted(first.n_qubits() + second.n_qubits(), std::move(out));
}

DensityMatrix partial_trace(const DensityMatrix& rho, const QubitSet& keep) {
  if (keep.empty()) throw std::invalid_argument("partial trace needs a non-empty keep set");
  const int n = rho.n_qubits();
  for (int q : keep.labels())
    if (q >= n) throw std::invalid_argument("keep label out of range");
  const std::size_t keep_mask = keep.mask(n);
  const std::size_t traced_mask = (dim_of(n) - 1) & ~keep_mask;
  const int k = static_cast<int>(keep.size());

  // compress kept bits of a full index into a reduced index
  auto reduce = [&](std::size_t index) {
    std::size_t r = 0;
    for (int q : keep.labels()) r = (r << 1) | ((index >> (n - 1 - q)) & 1U);
    return r;
  };

  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dim_of(k)), static_cast<Eigen::Index>(dim_of(k)));
  const Matrix& m = rho.matrix();
  for (std::size_t i = 0; i < rho.dim(); ++i) {
    const std::size_t ri = reduce(i);
    const std::size_t traced = i & traced_mask;
    // j ranges over indices sharing the traced bits of i
    for (std::size_t kept_bits = keep_mask;; kept_bits = (kept_bits - 1) & keep_mask) {
      const std::size_t j = traced | kept_bits;
      out(static_cast<Eigen::Index>(ri), static_cast<Eigen::Index>(reduce(j))) +=
          m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (kept_bits == 0) break;
    }
  }
  return DensityMatrix::trusted(k, std::move(out));
}

DensityMatrix partial_transpose(const DensityMatrix& rho, int qubit) {
  const int n = rho.n_qubits();
  if (qubit < 0 || qubit >= n) throw std::invalid_argument("qubit label out of range");
  const std::size_t bit = std::size_t{1} << (n - 1 - qubit);
  Matrix out(rho.matrix().rows(), rho.matrix().cols());
  for (std::size_t i = 0; i < rho.dim(); ++i) {
    for (std::size_t j = 0; j < rho.dim(); ++j) {
      const std::size_t ti = (i & ~bit) | (j & bit);
      const std::size_t tj = (j & ~bit) | (i & bit);
      out(static_cast<Eigen::Index>(ti), static_cast<Eigen::Index>(tj)) = rho(i, j);
    }
  }
  return DensityMatrix::trusted(n, std::move(out));
}

DensityMatrix permute_qubits(const DensityMatrix& rho, const std::vector<int>& order) {
  const int n = rho.n_qubits();
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  if (static_cast<int>(order.size()) != n || std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() ||
      sorted.front() < 0 || sorted.back() >= n)
    throw std::invalid_argument("qubit order must be a permutation of 0..n-1");
  std::vector<std::size_t> source(rho.dim());
  for (std::size_t i = 0; i < rho.dim(); ++i) {
    std::size_t old = 0;
    for (int k = 0; k < n; ++k)
      if ((i >> (n - 1 - k)) & 1U) old |= std::size_t{1} << (n - 1 - order[static_cast<std::size_t>(k)]);
    source[i] = old;
  }
  Matrix out(rho.matrix().rows(), rho.matrix().cols());
  for (std::size_t i = 0; i < rho.dim(); ++i)
    for (std::size_t j = 0; j < rho.dim(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rho(source[i], source[j]);
  return DensityMatrix::trusted(n, std::move(out));
}

DensityMatrix dephased_diagonal(const DensityMatrix& rho) {
  Matrix out = Matrix::Zero(rho.matrix().rows(), rho.matrix().cols());
  out.diagonal() = rho.matrix().diagonal();
  return DensityMatrix::trusted(rho.n_qubits(), std::move(out));
}

DensityMatrix product_of_marginals(const DensityMatrix& rho) {
  const int n = rho.n_qubits();
  DensityMatrix out = partial_trace(rho, QubitSet({0}, n));
  for (int q = 1; q < n; ++q) out = tensor(out, partial_trace(rho, QubitSet({q}, n)));
  return out;
}

DensityMatrix maximally_mixed(int n_qubits) {
  check_register(n_qubits);
  const auto d = static_cast<Eigen::Index>(dim_of(n_qubits));
  return DensityMatrix::trusted(n_qubits, Matrix::Identity(d, d) / static_cast<double>(d));
}

EigenSystem eig_hermitian(const Matrix& hermitian) {
  if (hermitian.rows() != hermitian.cols()) throw std::invalid_argument("matrix is not square");
  if (hermitian.size() > 0 &&
      (hermitian - hermitian.adjoint()).cwiseAbs().maxCoeff() > kEigHermitianTol)
    throw std::invalid_argument("matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian);
  if (solver.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Eigen::VectorXd clamped_spectrum(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(rho, Eigen::EigenvaluesOnly);
  Eigen::VectorXd values = solver.eigenvalues();
  for (double& v : values) {
    if (v < -kPsdTol) throw NumericalError("density matrix has eigenvalue " + std::to_string(v));
    v = std::max(v, 0.0);
  }
  return values;
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix() - b.matrix(), Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

}  // namespace decohere
