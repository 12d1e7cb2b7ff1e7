#include "decohere/measures.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace decohere {
namespace {

constexpr double kSupportTol = 1e-12;
constexpr double kIdentityTol = 1e-9;

double entropy_of(const Eigen::VectorXd& probabilities) {
  double s = 0.0;
  for (double p : probabilities)
    if (p > 0.0) s -= p * std::log(p);
  return s;
}

// S(pi(rho)) and S(pi_d(rho)) from the single-qubit marginals.
struct MarginalEntropies {
  double full = 0.0;
  double dephased = 0.0;
};

MarginalEntropies marginal_entropies(const DensityMatrix& rho) {
  MarginalEntropies out;
  for (int q = 0; q < rho.n_qubits(); ++q) {
    const DensityMatrix marginal = partial_trace(rho, QubitSet({q}, rho.n_qubits()));
    out.full += von_neumann_entropy(marginal);
    out.dephased += diagonal_entropy(marginal);
  }
  return out;
}

}  // namespace

double von_neumann_entropy(const DensityMatrix& rho) {
  return entropy_of(clamped_spectrum(rho.matrix()));
}

double diagonal_entropy(const DensityMatrix& rho) {
  Eigen::VectorXd diagonal = rho.matrix().diagonal().real();
  for (double& p : diagonal) {
    if (p < -1e-10) throw NumericalError("negative population on the diagonal");
    p = std::max(p, 0.0);
  }
  return entropy_of(diagonal);
}

double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.n_qubits() != sigma.n_qubits())
    throw std::invalid_argument("relative entropy of states on different registers");
  const double neg_entropy = -von_neumann_entropy(rho);
  constexpr double inf = std::numeric_limits<double>::infinity();

  if (sigma.is_diagonal()) {
    double cross = 0.0;
    for (std::size_t i = 0; i < rho.dim(); ++i) {
      const double w = rho(i, i).real();
      const double s = sigma(i, i).real();
      if (s < kSupportTol) {
        if (w > kSupportTol) return inf;
        if (w > 0.0 && s > 0.0) cross += w * std::log(s);
        continue;
      }
      cross += w * std::log(s);
    }
    return std::max(neg_entropy - cross, 0.0);
  }

  const EigenSystem sys = eig_hermitian(sigma.matrix());
  const Matrix rotated = sys.vectors.adjoint() * rho.matrix() * sys.vectors;
  double cross = 0.0;
  for (Eigen::Index i = 0; i < sys.values.size(); ++i) {
    const double w = rotated(i, i).real();
    const double s = sys.values[i];
    if (s < kSupportTol) {
      if (w > kSupportTol) return inf;
      if (w > 0.0) cross += w * std::log(std::max(s, 1e-14));
      continue;
    }
    cross += w * std::log(s);
  }
  return std::max(neg_entropy - cross, 0.0);
}

double total_coherence(const DensityMatrix& rho) {
  return std::max(diagonal_entropy(rho) - von_neumann_entropy(rho), 0.0);
}

double local_coherence(const DensityMatrix& rho) {
  const auto m = marginal_entropies(rho);
  return std::max(m.dephased - m.full, 0.0);
}

double global_coherence(const DensityMatrix& rho) {
  return total_coherence(rho) - local_coherence(rho);
}

double mutual_information(const DensityMatrix& rho) {
  return std::max(marginal_entropies(rho).full - von_neumann_entropy(rho), 0.0);
}

double classical_correlations(const DensityMatrix& rho) {
  // marginals of rho_d are the dephased marginals of rho
  return std::max(marginal_entropies(rho).dephased - diagonal_entropy(rho), 0.0);
}

double hookup(const DensityMatrix& rho) {
  const double via_coherence = total_coherence(rho) + classical_correlations(rho);
  const double via_correlations = mutual_information(rho) + local_coherence(rho);
  if (std::abs(via_coherence - via_correlations) > kIdentityTol)
    throw NumericalError("hookup routes disagree: C + K = " + std::to_string(via_coherence) +
                         ", T + C_L = " + std::to_string(via_correlations));
  return 0.5 * (via_coherence + via_correlations);
}

std::string_view label(Quantity q) {
  switch (q) {
    case Quantity::E: return "E";
    case Quantity::C: return "C";
    case Quantity::CG: return "CG";
    case Quantity::CL: return "CL";
    case Quantity::T: return "T";
    case Quantity::K: return "K";
    case Quantity::M: return "M";
  }
  return "?";
}

std::optional<Quantity> parse_quantity(std::string_view text) {
  for (Quantity q : kAllQuantities)
    if (label(q) == text) return q;
  return std::nullopt;
}

double MeasureRecord::get(Quantity q) const {
  switch (q) {
    case Quantity::E: return E;
    case Quantity::C: return C;
    case Quantity::CG: return CG;
    case Quantity::CL: return CL;
    case Quantity::T: return T;
    case Quantity::K: return K;
    case Quantity::M: return M;
  }
  return 0.0;
}

void MeasureRecord::set(Quantity q, double value) {
  switch (q) {
    case Quantity::E: E = value; break;
    case Quantity::C: C = value; break;
    case Quantity::CG: CG = value; break;
    case Quantity::CL: CL = value; break;
    case Quantity::T: T = value; break;
    case Quantity::K: K = value; break;
    case Quantity::M: M = value; break;
  }
}

MeasureRecord all_measures(const DensityMatrix& rho, const MeasureOptions& options) {
  MeasureRecord r;
  const double s_rho = von_neumann_entropy(rho);
  const double s_diag = diagonal_entropy(rho);
  const auto marg = marginal_entropies(rho);

  r.C = std::max(s_diag - s_rho, 0.0);
  r.CL = std::max(marg.dephased - marg.full, 0.0);
  r.CG = r.C - r.CL;
  r.T = std::max(marg.full - s_rho, 0.0);
  r.K = std::max(marg.dephased - s_diag, 0.0);
  r.M_via_coherence = r.C + r.K;
  r.M_via_correlations = r.T + r.CL;
  if (std::abs(r.M_via_coherence - r.M_via_correlations) > kIdentityTol)
    throw NumericalError("hookup routes disagree");
  r.M = 0.5 * (r.M_via_coherence + r.M_via_correlations);

  if (options.compute_entanglement) {
    r.ree = ree(rho, options.ree);
    r.E = r.ree->floored_value;
    r.has_entanglement = true;
  }
  return r;
}

std::string check_record_invariants(const MeasureRecord& r, double e_tolerance) {
  std::ostringstream out;
  out.precision(17);
  if (std::abs(r.C - (r.CG + r.CL)) > kIdentityTol)
    out << "C != CG + CL (" << r.C << " vs " << r.CG + r.CL << "); ";
  if (std::abs(r.M_via_coherence - r.M_via_correlations) > kIdentityTol)
    out << "C + K != T + CL (" << r.M_via_coherence << " vs " << r.M_via_correlations << "); ";
  if (std::abs(r.M - r.M_via_coherence) > kIdentityTol) out << "M inconsistent; ";
  if (r.has_entanglement && r.E > r.C + e_tolerance)
    out << "E > C (" << r.E << " > " << r.C << "); ";
  return out.str();
}

MeasureRecord to_bits(MeasureRecord record) {
  const double scale = 1.0 / std::numbers::ln2;
  for (Quantity q : kAllQuantities) record.set(q, record.get(q) * scale);
  record.M_via_coherence *= scale;
  record.M_via_correlations *= scale;
  if (record.sigma)
    for (double& s : *record.sigma) s *= scale;
  return record;
}

}  // namespace decohere
