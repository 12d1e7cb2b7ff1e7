#include "decohere/tomo.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "decohere/parallel.hpp"

namespace decohere {
namespace {

void check_tomography_register(int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxTomographyQubits)
    throw std::invalid_argument("tomography supports 1 to " + std::to_string(kMaxTomographyQubits) +
                                " qubits");
}

// Rows are the bra vectors of the eigenbasis: row 0 the +1 outcome.
Eigen::Matrix2cd basis_change(PauliBasis basis) {
  const double h = 1.0 / std::sqrt(2.0);
  const Complex i{0.0, 1.0};
  Eigen::Matrix2cd u;
  switch (basis) {
    case PauliBasis::X: u << h, h, h, -h; break;
    case PauliBasis::Y: u << h, -i * h, h, i * h; break;
    case PauliBasis::Z: u << 1.0, 0.0, 0.0, 1.0; break;
  }
  return u;
}

Matrix setting_unitary(std::size_t setting, int n_qubits) {
  Matrix u = Matrix::Identity(1, 1);
  for (PauliBasis b : setting_bases(setting, n_qubits)) {
    const Eigen::Matrix2cd f = basis_change(b);
    Matrix next(u.rows() * 2, u.cols() * 2);
    for (Eigen::Index r = 0; r < u.rows(); ++r)
      for (Eigen::Index c = 0; c < u.cols(); ++c) next.block(2 * r, 2 * c, 2, 2) = u(r, c) * f;
    u = std::move(next);
  }
  return u;
}

// Largest-remainder rounding of shots * p to integers summing to shots.
std::vector<std::uint64_t> round_counts(const std::vector<double>& p, std::uint64_t shots) {
  std::vector<std::uint64_t> counts(p.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::uint64_t assigned = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double ideal = static_cast<double>(shots) * p[k];
    counts[k] = static_cast<std::uint64_t>(std::floor(ideal));
    assigned += counts[k];
    remainders.emplace_back(ideal - std::floor(ideal), k);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < shots && r < remainders.size(); ++r, ++assigned)
    ++counts[remainders[r].second];
  return counts;
}

// Shifted by the first sample so identical resamples give exactly zero.
double sample_std(const std::vector<double>& xs) {
  const double shift = xs.front();
  double sum = 0.0, ss = 0.0;
  for (double x : xs) {
    sum += x - shift;
    ss += (x - shift) * (x - shift);
  }
  const auto b = static_cast<double>(xs.size());
  return std::sqrt(std::max(ss - sum * sum / b, 0.0) / (b - 1.0));
}

// Roots of eigenvalues, with round-off noise near zero treated as zero.
Eigen::VectorXd clipped_roots(const Eigen::VectorXd& values) {
  const double floor = 16.0 * std::numeric_limits<double>::epsilon() * std::max(values.cwiseAbs().maxCoeff(), 1.0);
  return values.unaryExpr([floor](double v) { return v > floor ? std::sqrt(v) : 0.0; });
}

}  // namespace

std::size_t setting_count(int n_qubits) {
  std::size_t count = 1;
  for (int q = 0; q < n_qubits; ++q) count *= 3;
  return count;
}

std::vector<PauliBasis> setting_bases(std::size_t setting, int n_qubits) {
  std::vector<PauliBasis> bases(static_cast<std::size_t>(n_qubits));
  for (int q = n_qubits - 1; q >= 0; --q) {
    bases[static_cast<std::size_t>(q)] = static_cast<PauliBasis>(setting % 3);
    setting /= 3;
  }
  return bases;
}

std::string setting_label(std::size_t setting, int n_qubits) {
  std::string label;
  for (PauliBasis b : setting_bases(setting, n_qubits)) label += "XYZ"[static_cast<int>(b)];
  return label;
}

std::size_t parse_setting_label(const std::string& label) {
  if (label.empty()) throw std::invalid_argument("empty setting label");
  std::size_t index = 0;
  for (char c : label) {
    const auto pos = std::string_view("XYZ").find(c);
    if (pos == std::string_view::npos) throw std::invalid_argument("bad setting label '" + label + "'");
    index = index * 3 + pos;
  }
  return index;
}

void CountTable::validate() const {
  check_tomography_register(n_qubits);
  if (shots_per_setting == 0) throw std::invalid_argument("count table has no shots");
  if (counts.size() != setting_count(n_qubits))
    throw std::invalid_argument("count table must contain all 3^n settings");
  const std::size_t outcomes = std::size_t{1} << n_qubits;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    if (counts[s].size() != outcomes)
      throw std::invalid_argument("setting " + setting_label(s, n_qubits) + " has wrong outcome count");
    if (std::accumulate(counts[s].begin(), counts[s].end(), std::uint64_t{0}) != shots_per_setting)
      throw std::invalid_argument("counts of setting " + setting_label(s, n_qubits) +
                                  " do not sum to the shot count");
  }
}

std::vector<double> born_probabilities(const DensityMatrix& rho, std::size_t setting) {
  const int n = rho.n_qubits();
  check_tomography_register(n);
  if (setting >= setting_count(n)) throw std::invalid_argument("setting index out of range");
  const Matrix u = setting_unitary(setting, n);
  const Eigen::VectorXd diag = (u * rho.matrix() * u.adjoint()).diagonal().real();
  std::vector<double> p(static_cast<std::size_t>(diag.size()));
  double total = 0.0;
  for (Eigen::Index k = 0; k < diag.size(); ++k) {
    p[static_cast<std::size_t>(k)] = std::max(diag[k], 0.0);
    total += p[static_cast<std::size_t>(k)];
  }
  for (double& x : p) x /= total;
  return p;
}

CountTable sample_counts(const DensityMatrix& rho, std::uint64_t shots, std::uint64_t seed,
                         SamplingMode mode) {
  if (shots < 1) throw std::invalid_argument("need at least one shot per setting");
  const int n = rho.n_qubits();
  check_tomography_register(n);
  CountTable table;
  table.n_qubits = n;
  table.shots_per_setting = shots;
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> probabilities;
  for (std::size_t s = 0; s < setting_count(n); ++s) {
    const std::vector<double> p = born_probabilities(rho, s);
    if (mode == SamplingMode::Exact) {
      table.counts.push_back(round_counts(p, shots));
      probabilities.push_back(p);
      continue;
    }
    // sequential conditional binomials
    std::vector<std::uint64_t> counts(p.size(), 0);
    std::uint64_t remaining = shots;
    double mass = 1.0;
    for (std::size_t k = 0; k + 1 < p.size() && remaining > 0; ++k) {
      const double ratio = mass > 0.0 ? std::clamp(p[k] / mass, 0.0, 1.0) : 0.0;
      std::binomial_distribution<std::uint64_t> draw(remaining, ratio);
      counts[k] = draw(rng);
      remaining -= counts[k];
      mass -= p[k];
    }
    counts.back() += remaining;
    table.counts.push_back(std::move(counts));
  }
  if (mode == SamplingMode::Exact) table.exact_probabilities = std::move(probabilities);
  return table;
}

Matrix linear_inversion(const CountTable& table) {
  table.validate();
  const int n = table.n_qubits;
  const std::size_t d = std::size_t{1} << n;
  const std::size_t settings = setting_count(n);

  // outcome frequencies per setting
  std::vector<std::vector<double>> freq(settings, std::vector<double>(d));
  for (std::size_t s = 0; s < settings; ++s)
    for (std::size_t k = 0; k < d; ++k)
      freq[s][k] = table.exact() ? (*table.exact_probabilities)[s][k]
                                 : static_cast<double>(table.counts[s][k]) /
                                       static_cast<double>(table.shots_per_setting);

  // Pauli string index: base-4 digits (I, X, Y, Z), qubit 0 most significant.
  std::size_t strings = 1;
  for (int q = 0; q < n; ++q) strings *= 4;
  Matrix rho = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  std::vector<int> ops(static_cast<std::size_t>(n));
  for (std::size_t p = 0; p < strings; ++p) {
    for (int q = n - 1, rest = static_cast<int>(p); q >= 0; --q, rest /= 4)
      ops[static_cast<std::size_t>(q)] = rest % 4;

    // average the expectation over every setting that measures this string
    double sum = 0.0;
    int compatible = 0;
    for (std::size_t s = 0; s < settings; ++s) {
      const auto bases = setting_bases(s, n);
      bool ok = true;
      std::size_t sign_mask = 0;
      for (int q = 0; q < n; ++q) {
        const int op = ops[static_cast<std::size_t>(q)];
        if (op == 0) continue;
        if (static_cast<int>(bases[static_cast<std::size_t>(q)]) != op - 1) ok = false;
        sign_mask |= std::size_t{1} << (n - 1 - q);
      }
      if (!ok) continue;
      ++compatible;
      for (std::size_t k = 0; k < d; ++k)
        sum += (std::popcount(k & sign_mask) % 2 ? -1.0 : 1.0) * freq[s][k];
    }
    const double expectation = sum / compatible;

    // add expectation * P / d, P built element by element
    std::size_t flip = 0;
    for (int q = 0; q < n; ++q)
      if (ops[static_cast<std::size_t>(q)] == 1 || ops[static_cast<std::size_t>(q)] == 2)
        flip |= std::size_t{1} << (n - 1 - q);
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t j = i ^ flip;
      Complex v{1.0, 0.0};
      for (int q = 0; q < n; ++q) {
        const int bi = static_cast<int>((i >> (n - 1 - q)) & 1U);
        switch (ops[static_cast<std::size_t>(q)]) {
          case 2: v *= bi ? Complex{0.0, 1.0} : Complex{0.0, -1.0}; break;  // <i|Y|j>
          case 3: v *= bi ? -1.0 : 1.0; break;
          default: break;
        }
      }
      rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
          expectation * v / static_cast<double>(d);
    }
  }
  return rho;
}

std::pair<Matrix, double> project_to_density(const Matrix& hermitian) {
  const EigenSystem sys = eig_hermitian(0.5 * (hermitian + hermitian.adjoint()));
  const Eigen::Index d = sys.values.size();
  double clipped = 0.0;
  for (double v : sys.values) clipped += std::max(-v, 0.0);

  // Eigenvalues ascending: zero from the bottom while the running
  // redistribution would still leave them negative.
  Eigen::VectorXd lambda = sys.values;
  double carried = 0.0;
  Eigen::Index first_kept = 0;
  while (first_kept < d &&
         lambda[first_kept] + carried / static_cast<double>(d - first_kept) < 0.0) {
    carried += lambda[first_kept];
    lambda[first_kept] = 0.0;
    ++first_kept;
  }
  const double shift = carried / static_cast<double>(d - first_kept);
  for (Eigen::Index i = first_kept; i < d; ++i) lambda[i] += shift;
  Matrix out = sys.vectors * lambda.asDiagonal() * sys.vectors.adjoint();
  return {0.5 * (out + out.adjoint()), clipped};
}

TomoResult reconstruct(const CountTable& table) {
  auto [matrix, clipped] = project_to_density(linear_inversion(table));
  return TomoResult{DensityMatrix(table.n_qubits, std::move(matrix)), std::nullopt, clipped};
}

TomoResult reconstruct(const CountTable& table, const DensityMatrix& target) {
  TomoResult result = reconstruct(table);
  result.fidelity_vs_target = fidelity(result.rho_hat, target);
  return result;
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.n_qubits() != sigma.n_qubits()) throw std::invalid_argument("fidelity of mismatched registers");
  const EigenSystem sys = eig_hermitian(rho.matrix());
  const Matrix sqrt_rho = sys.vectors * clipped_roots(sys.values).asDiagonal() * sys.vectors.adjoint();
  Matrix inner = sqrt_rho * sigma.matrix() * sqrt_rho;
  inner = 0.5 * (inner + inner.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(inner, Eigen::EigenvaluesOnly);
  const double trace = clipped_roots(solver.eigenvalues()).sum();
  return std::clamp(trace * trace, 0.0, 1.0);
}

MeasureRecord bootstrap_measures(const DensityMatrix& target, const BootstrapOptions& options) {
  if (options.resamples < 2) throw std::invalid_argument("bootstrap needs at least two resamples");
  const auto b_count = static_cast<std::size_t>(options.resamples);
  std::vector<std::optional<MeasureRecord>> records(b_count);
  parallel_for(b_count, options.threads, [&](std::size_t b) {
    const CountTable table = sample_counts(target, options.shots, options.seed + b, options.mode);
    records[b] = all_measures(reconstruct(table).rho_hat, options.measures);
  });

  MeasureRecord out;
  std::array<double, 7> sigma{};
  for (std::size_t qi = 0; qi < kAllQuantities.size(); ++qi) {
    const Quantity q = kAllQuantities[qi];
    std::vector<double> xs;
    for (const auto& r : records) xs.push_back(r->get(q));
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    out.set(q, mean);
    sigma[qi] = sample_std(xs);
  }
  double via_coherence = 0.0, via_correlations = 0.0;
  for (const auto& r : records) {
    via_coherence += r->M_via_coherence;
    via_correlations += r->M_via_correlations;
  }
  out.M_via_coherence = via_coherence / static_cast<double>(b_count);
  out.M_via_correlations = via_correlations / static_cast<double>(b_count);
  out.sigma = sigma;
  out.has_entanglement = options.measures.compute_entanglement;
  return out;
}

void write_counts_csv(std::ostream& out, const CountTable& table) {
  table.validate();
  out << "setting,outcome_bits,count\n";
  const int n = table.n_qubits;
  for (std::size_t s = 0; s < table.counts.size(); ++s) {
    const std::string label = setting_label(s, n);
    for (std::size_t k = 0; k < table.counts[s].size(); ++k) {
      std::string bits;
      for (int q = 0; q < n; ++q) bits += ((k >> (n - 1 - q)) & 1U) ? '1' : '0';
      out << label << ',' << bits << ',' << table.counts[s][k] << '\n';
    }
  }
}

CountTable read_counts_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "setting,outcome_bits,count")
    throw std::invalid_argument("count CSV must start with header 'setting,outcome_bits,count'");
  std::map<std::size_t, std::map<std::size_t, std::uint64_t>> rows;
  int n = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string label, bits, count;
    if (!std::getline(ss, label, ',') || !std::getline(ss, bits, ',') || !std::getline(ss, count))
      throw std::invalid_argument("malformed count row '" + line + "'");
    if (n == 0) n = static_cast<int>(label.size());
    if (static_cast<int>(label.size()) != n || static_cast<int>(bits.size()) != n)
      throw std::invalid_argument("inconsistent register size in row '" + line + "'");
    std::size_t outcome = 0;
    for (char c : bits) {
      if (c != '0' && c != '1') throw std::invalid_argument("bad outcome bits '" + bits + "'");
      outcome = (outcome << 1) | static_cast<std::size_t>(c - '0');
    }
    std::size_t used = 0;
    const unsigned long long value = std::stoull(count, &used);
    if (used != count.size()) throw std::invalid_argument("bad count '" + count + "'");
    auto& slot = rows[parse_setting_label(label)];
    if (!slot.emplace(outcome, value).second)
      throw std::invalid_argument("duplicate row for " + label + "," + bits);
  }
  check_tomography_register(n);
  CountTable table;
  table.n_qubits = n;
  const std::size_t d = std::size_t{1} << n;
  for (std::size_t s = 0; s < setting_count(n); ++s) {
    const auto it = rows.find(s);
    if (it == rows.end()) throw std::invalid_argument("missing setting " + setting_label(s, n));
    std::vector<std::uint64_t> counts(d, 0);
    for (const auto& [outcome, value] : it->second) counts[outcome] = value;
    table.counts.push_back(std::move(counts));
  }
  table.shots_per_setting =
      std::accumulate(table.counts[0].begin(), table.counts[0].end(), std::uint64_t{0});
  table.validate();
  return table;
}

}  // namespace decohere
