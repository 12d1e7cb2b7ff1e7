#include "decohere/ree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "decohere/measures.hpp"
#include "decohere/parallel.hpp"

namespace decohere {
namespace {

constexpr double kMix = 1e-12;        // weight of I/d mixed into sigma
constexpr double kEigFloor = 1e-14;   // floor on sigma's eigenvalues before log
constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 50;
constexpr double kMaxStep = 1e4;
// Directional slopes below this are round-off; the point counts as stationary.
constexpr double kStationary = 1e-20;

using Ket2 = std::array<Complex, 2>;

Ket2 raw_factor(double theta, double phi) {
  return {Complex{std::cos(0.5 * theta), 0.0}, std::polar(std::sin(0.5 * theta), phi)};
}

Ket2 d_theta_factor(double theta, double phi) {
  return {Complex{-0.5 * std::sin(0.5 * theta), 0.0}, std::polar(0.5 * std::cos(0.5 * theta), phi)};
}

Ket2 d_phi_factor(double theta, double phi) {
  return {Complex{0.0, 0.0}, Complex{0.0, 1.0} * std::polar(std::sin(0.5 * theta), phi)};
}

Vector product_ket(const std::vector<Ket2>& factors) {
  const int n = static_cast<int>(factors.size());
  const auto d = Eigen::Index{1} << n;
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    Complex a{1.0, 0.0};
    for (int q = 0; q < n; ++q) a *= factors[static_cast<std::size_t>(q)][(i >> (n - 1 - q)) & 1];
    v[i] = a;
  }
  return v;
}

struct Evaluation {
  double objective = 0.0;
  Eigen::VectorXd lambda;
  Matrix vectors;
  Matrix rotated_rho;
};

// Fixed data of one solve: rho and its entropy.
class Problem {
 public:
  explicit Problem(const DensityMatrix& rho)
      : rho_(rho.matrix()), entropy_(von_neumann_entropy(rho)), n_(rho.n_qubits()) {}

  int n_qubits() const { return n_; }

  Matrix mixed_sigma(const Matrix& sigma) const {
    const auto d = sigma.rows();
    return (1.0 - kMix) * sigma + (kMix / static_cast<double>(d)) * Matrix::Identity(d, d);
  }

  Evaluation evaluate(const SeparableEnsemble& ensemble) const {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(mixed_sigma(ensemble.assemble()));
    Evaluation ev;
    ev.lambda = solver.eigenvalues().cwiseMax(kEigFloor);
    ev.vectors = solver.eigenvectors();
    ev.rotated_rho = ev.vectors.adjoint() * rho_ * ev.vectors;
    double cross = 0.0;
    for (Eigen::Index i = 0; i < ev.lambda.size(); ++i)
      cross += ev.rotated_rho(i, i).real() * std::log(ev.lambda[i]);
    ev.objective = -entropy_ - cross;
    return ev;
  }

  // Derivative of Tr(rho ln sigma') with respect to the unmixed sigma:
  // (1 - mix) * U (L o U^dag rho U) U^dag, L the first divided difference of ln.
  Matrix log_derivative(const Evaluation& ev) const {
    const auto d = ev.lambda.size();
    Matrix weighted(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index k = 0; k < d; ++k) {
        const double a = ev.lambda[i], b = ev.lambda[k];
        const double rel = (a - b) / b;
        const double divided = std::abs(rel) < 1e-8 ? (1.0 - 0.5 * rel) / b
                                                    : (std::log(a) - std::log(b)) / (a - b);
        weighted(i, k) = divided * ev.rotated_rho(i, k);
      }
    }
    return (1.0 - kMix) * (ev.vectors * weighted * ev.vectors.adjoint());
  }

  // -d objective / d p_j
  std::vector<double> weight_pull(const SeparableEnsemble& ensemble, const Matrix& g) const {
    std::vector<double> pull(static_cast<std::size_t>(ensemble.size()));
    for (int j = 0; j < ensemble.size(); ++j) {
      const Vector v = ensemble.member_ket(j);
      pull[static_cast<std::size_t>(j)] = v.dot(g * v).real();
    }
    return pull;
  }

  // 2 Re <dv/dx | G | v> for every angle; the objective gradient is -p_j times this.
  std::vector<double> angle_pull(const SeparableEnsemble& ensemble, const Matrix& g) const {
    const int n = ensemble.n_qubits();
    std::vector<double> pull(ensemble.angles().size());
    std::vector<Ket2> factors(static_cast<std::size_t>(n));
    for (int j = 0; j < ensemble.size(); ++j) {
      for (int q = 0; q < n; ++q)
        factors[static_cast<std::size_t>(q)] = raw_factor(ensemble.theta(j, q), ensemble.phi(j, q));
      const Vector gv = g * product_ket(factors);
      for (int q = 0; q < n; ++q) {
        const Ket2 saved = factors[static_cast<std::size_t>(q)];
        const std::size_t base = 2 * (static_cast<std::size_t>(j) * static_cast<std::size_t>(n) +
                                      static_cast<std::size_t>(q));
        factors[static_cast<std::size_t>(q)] = d_theta_factor(ensemble.theta(j, q), ensemble.phi(j, q));
        pull[base] = 2.0 * product_ket(factors).dot(gv).real();
        factors[static_cast<std::size_t>(q)] = d_phi_factor(ensemble.theta(j, q), ensemble.phi(j, q));
        pull[base + 1] = 2.0 * product_ket(factors).dot(gv).real();
        factors[static_cast<std::size_t>(q)] = saved;
      }
    }
    return pull;
  }

  struct Step {
    SeparableEnsemble ensemble;
    Evaluation eval;
    bool accepted;
    double step;
  };

  Step weight_step(const SeparableEnsemble& input, const Evaluation* known) const {
    SeparableEnsemble ensemble = merge_duplicate_members(input);
    const bool merged = ensemble.size() != input.size();
    const Evaluation ev = (known && !merged) ? *known : evaluate(ensemble);
    const std::vector<double> pull = weight_pull(ensemble, log_derivative(ev));
    const auto& p = ensemble.weights();

    double mass = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) mass += p[j] * pull[j];
    std::vector<double> direction(p.size());
    double slope = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      direction[j] = p[j] * pull[j] / mass - p[j];
      slope -= direction[j] * pull[j];
    }
    if (!(slope < -kStationary)) return {ensemble, ev, false, 0.0};

    double t = 1.0;
    for (int k = 0; k < kMaxBacktracks; ++k, t *= 0.5) {
      std::vector<double> trial(p.size());
      double total = 0.0;
      for (std::size_t j = 0; j < p.size(); ++j) {
        trial[j] = std::max(p[j] + t * direction[j], 0.0);
        total += trial[j];
      }
      for (double& w : trial) w /= total;
      SeparableEnsemble candidate = ensemble.with_weights(std::move(trial));
      Evaluation trial_eval = evaluate(candidate);
      if (trial_eval.objective <= ev.objective + kArmijo * t * slope)
        return {std::move(candidate), std::move(trial_eval), true, t};
    }
    return {ensemble, ev, false, 0.0};
  }

  Step factor_step(const SeparableEnsemble& ensemble, double initial_step,
                   const Evaluation* known) const {
    const Evaluation ev = known ? *known : evaluate(ensemble);
    const std::vector<double> pull = angle_pull(ensemble, log_derivative(ev));
    const int n = ensemble.n_qubits();

    // Descent direction: the negative gradient divided by each member's weight.
    std::vector<double> direction(pull.size());
    double slope = 0.0;
    for (int j = 0; j < ensemble.size(); ++j) {
      const double p = ensemble.weights()[static_cast<std::size_t>(j)];
      for (int a = 0; a < 2 * n; ++a) {
        const std::size_t i = static_cast<std::size_t>(j * 2 * n + a);
        direction[i] = pull[i];
        slope -= p * pull[i] * pull[i];
      }
    }
    if (!(slope < -kStationary)) return {ensemble, ev, false, 0.0};

    double t = initial_step;
    for (int k = 0; k < kMaxBacktracks; ++k, t *= 0.5) {
      std::vector<double> trial = ensemble.angles();
      for (std::size_t i = 0; i < trial.size(); ++i) trial[i] += t * direction[i];
      SeparableEnsemble candidate = ensemble.with_angles(std::move(trial));
      Evaluation trial_eval = evaluate(candidate);
      if (trial_eval.objective <= ev.objective + kArmijo * t * slope)
        return {std::move(candidate), std::move(trial_eval), true, t};
    }
    return {ensemble, ev, false, 0.0};
  }

 private:
  Matrix rho_;
  double entropy_;
  int n_;
};

struct RestartOutcome {
  SeparableEnsemble ensemble;
  double objective;
  int iterations;
  bool converged;
};

RestartOutcome run_restart(const Problem& problem, SeparableEnsemble ensemble, const ReeOptions& options) {
  Evaluation current = problem.evaluate(ensemble);
  double step = 1.0;
  int iterations = 0;
  bool converged = false;
  while (iterations < options.max_iters) {
    ++iterations;
    const double previous = current.objective;
    auto weighted = problem.weight_step(ensemble, &current);
    auto moved = problem.factor_step(weighted.ensemble, step, &weighted.eval);
    if (moved.accepted) {
      step = std::min(2.0 * moved.step, kMaxStep);
      ensemble = std::move(moved.ensemble);
      current = std::move(moved.eval);
    } else {
      step = 1.0;
      ensemble = std::move(weighted.ensemble);
      current = std::move(weighted.eval);
    }
    if (previous - current.objective < options.tol) {
      converged = true;
      break;
    }
  }
  return {std::move(ensemble), current.objective, iterations, converged};
}

// Products of the eigenvectors of the single-qubit marginals, weighted by the
// diagonal of rho in that product basis. Exact for product pure states.
SeparableEnsemble local_eigenbasis_start(const DensityMatrix& rho) {
  const int n = rho.n_qubits();
  std::vector<std::array<Ket2, 2>> bases(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q) {
    const EigenSystem sys = eig_hermitian(partial_trace(rho, QubitSet({q}, n)).matrix());
    for (Eigen::Index k = 0; k < 2; ++k)
      bases[static_cast<std::size_t>(q)][static_cast<std::size_t>(k)] = {sys.vectors(0, k), sys.vectors(1, k)};
  }
  const std::size_t d = std::size_t{1} << n;
  std::vector<std::vector<Ket2>> factors(d);
  std::vector<double> weights(d);
  double total = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (int q = 0; q < n; ++q) factors[i].push_back(bases[static_cast<std::size_t>(q)][(i >> (n - 1 - q)) & 1]);
    const Vector v = product_ket(factors[i]);
    weights[i] = std::max(v.dot(rho.matrix() * v).real(), 0.0);
    total += weights[i];
  }
  for (double& w : weights) w /= total;
  return SeparableEnsemble::from_factors(n, std::move(weights), factors);
}

}  // namespace

SeparableEnsemble::SeparableEnsemble(int n_qubits, std::vector<double> weights,
                                     std::vector<double> angles)
    : n_qubits_(n_qubits), weights_(std::move(weights)), angles_(std::move(angles)) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) throw std::invalid_argument("bad register size");
  if (weights_.empty()) throw std::invalid_argument("ensemble must have at least one member");
  if (angles_.size() != 2 * weights_.size() * static_cast<std::size_t>(n_qubits))
    throw std::invalid_argument("angle array does not match ensemble shape");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw std::invalid_argument("ensemble weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("ensemble weights must sum to 1");
  for (double& w : weights_) w /= total;
}

SeparableEnsemble SeparableEnsemble::from_factors(
    int n_qubits, std::vector<double> weights,
    const std::vector<std::vector<std::array<Complex, 2>>>& factors) {
  if (factors.size() != weights.size())
    throw std::invalid_argument("need one factor list per ensemble member");
  std::vector<double> angles;
  angles.reserve(2 * factors.size() * static_cast<std::size_t>(n_qubits));
  for (const auto& member : factors) {
    if (member.size() != static_cast<std::size_t>(n_qubits))
      throw std::invalid_argument("need one factor per qubit");
    for (const auto& ket : member) {
      const double norm = std::hypot(std::abs(ket[0]), std::abs(ket[1]));
      if (norm < 1e-12) throw std::invalid_argument("zero factor ket");
      const double a = std::abs(ket[0]) / norm, b = std::abs(ket[1]) / norm;
      const double phi = (a > 0.0 && b > 0.0) ? std::arg(ket[1]) - std::arg(ket[0]) : 0.0;
      angles.push_back(2.0 * std::atan2(b, a));
      angles.push_back(phi);
    }
  }
  return SeparableEnsemble(n_qubits, std::move(weights), std::move(angles));
}

SeparableEnsemble SeparableEnsemble::random(int n_qubits, int members, std::mt19937_64& rng) {
  if (members < 1) throw std::invalid_argument("ensemble size must be positive");
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> angles;
  angles.reserve(2 * static_cast<std::size_t>(members) * static_cast<std::size_t>(n_qubits));
  for (int j = 0; j < members; ++j) {
    for (int q = 0; q < n_qubits; ++q) {
      angles.push_back(std::acos(1.0 - 2.0 * uniform(rng)));
      angles.push_back(2.0 * std::numbers::pi * uniform(rng));
    }
  }
  std::vector<double> weights(static_cast<std::size_t>(members), 1.0 / members);
  return SeparableEnsemble(n_qubits, std::move(weights), std::move(angles));
}

std::array<Complex, 2> SeparableEnsemble::factor(int member, int qubit) const {
  Ket2 ket = raw_factor(theta(member, qubit), phi(member, qubit));
  const std::size_t lead = std::abs(ket[0]) > 0.0 ? 0 : 1;
  const Complex gauge = std::conj(ket[lead]) / std::abs(ket[lead]);
  ket[0] *= gauge;
  ket[1] *= gauge;
  return ket;
}

Vector SeparableEnsemble::member_ket(int member) const {
  std::vector<Ket2> factors(static_cast<std::size_t>(n_qubits_));
  for (int q = 0; q < n_qubits_; ++q)
    factors[static_cast<std::size_t>(q)] = raw_factor(theta(member, q), phi(member, q));
  return product_ket(factors);
}

Matrix SeparableEnsemble::assemble() const {
  const auto d = Eigen::Index{1} << n_qubits_;
  Matrix kets(d, size());
  for (int j = 0; j < size(); ++j)
    kets.col(j) = std::sqrt(weights_[static_cast<std::size_t>(j)]) * member_ket(j);
  return kets * kets.adjoint();
}

DensityMatrix SeparableEnsemble::density() const {
  return DensityMatrix::trusted(n_qubits_, assemble());
}

SeparableEnsemble SeparableEnsemble::with_weights(std::vector<double> weights) const {
  return SeparableEnsemble(n_qubits_, std::move(weights), angles_);
}

SeparableEnsemble SeparableEnsemble::with_angles(std::vector<double> angles) const {
  return SeparableEnsemble(n_qubits_, weights_, std::move(angles));
}

double ree_objective(const DensityMatrix& rho, const SeparableEnsemble& ensemble) {
  return Problem(rho).evaluate(ensemble).objective;
}

std::vector<double> ree_weight_gradient(const DensityMatrix& rho, const SeparableEnsemble& ensemble) {
  const Problem problem(rho);
  auto pull = problem.weight_pull(ensemble, problem.log_derivative(problem.evaluate(ensemble)));
  for (double& g : pull) g = -g;
  return pull;
}

std::vector<double> ree_factor_gradient(const DensityMatrix& rho, const SeparableEnsemble& ensemble) {
  const Problem problem(rho);
  auto pull = problem.angle_pull(ensemble, problem.log_derivative(problem.evaluate(ensemble)));
  const std::size_t per_member = 2 * static_cast<std::size_t>(ensemble.n_qubits());
  for (std::size_t i = 0; i < pull.size(); ++i) pull[i] *= -ensemble.weights()[i / per_member];
  return pull;
}

SeparableEnsemble merge_duplicate_members(const SeparableEnsemble& ensemble) {
  std::vector<int> kept;
  std::vector<Vector> kept_kets;
  std::vector<double> weights;
  for (int j = 0; j < ensemble.size(); ++j) {
    const Vector v = ensemble.member_ket(j);
    bool merged = false;
    for (std::size_t k = 0; k < kept.size(); ++k) {
      if (std::norm(kept_kets[k].dot(v)) >= 1.0 - 1e-12) {
        weights[k] += ensemble.weights()[static_cast<std::size_t>(j)];
        merged = true;
        break;
      }
    }
    if (!merged) {
      kept.push_back(j);
      kept_kets.push_back(v);
      weights.push_back(ensemble.weights()[static_cast<std::size_t>(j)]);
    }
  }
  if (kept.size() == static_cast<std::size_t>(ensemble.size())) return ensemble;
  const int n = ensemble.n_qubits();
  std::vector<double> angles;
  for (int j : kept)
    for (int q = 0; q < n; ++q) {
      angles.push_back(ensemble.theta(j, q));
      angles.push_back(ensemble.phi(j, q));
    }
  return SeparableEnsemble(n, std::move(weights), std::move(angles));
}

SeparableEnsemble ree_fixed_states_weight_step(const DensityMatrix& rho,
                                               const SeparableEnsemble& ensemble) {
  return Problem(rho).weight_step(ensemble, nullptr).ensemble;
}

FactorStepResult ree_factor_step(const DensityMatrix& rho, const SeparableEnsemble& ensemble,
                                 double initial_step) {
  auto step = Problem(rho).factor_step(ensemble, initial_step, nullptr);
  return {std::move(step.ensemble), step.accepted, step.step, step.eval.objective};
}

namespace {

bool lexicographically_less(const Matrix& a, const Matrix& b) {
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const Complex x = a.data()[k];
    const Complex y = b.data()[k];
    if (x.real() != y.real()) return x.real() < y.real();
    if (x.imag() != y.imag()) return x.imag() < y.imag();
  }
  return false;
}

// Qubit order whose relabelled matrix is lexicographically smallest. Solving
// in this frame makes the result independent of how the input was labelled.
std::vector<int> canonical_order(const DensityMatrix& rho) {
  std::vector<int> order(static_cast<std::size_t>(rho.n_qubits()));
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> best = order;
  Matrix best_matrix = rho.matrix();
  while (std::next_permutation(order.begin(), order.end())) {
    Matrix candidate = permute_qubits(rho, order).matrix();
    if (lexicographically_less(candidate, best_matrix)) {
      best = order;
      best_matrix = std::move(candidate);
    }
  }
  return best;
}

}  // namespace

ReeResult ree(const DensityMatrix& input, const ReeOptions& options) {
  const int n = input.n_qubits();
  if (n < 2 || n > 4)
    throw std::invalid_argument("entanglement solver supports 2 to 4 qubits, got " + std::to_string(n));
  if (options.restarts < 1 || options.max_iters < 1)
    throw std::invalid_argument("restarts and max_iters must be positive");
  const int members = options.ensemble_size > 0 ? options.ensemble_size : 4 * (1 << n);

  const std::vector<int> order = canonical_order(input);
  std::vector<int> inverse(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) inverse[static_cast<std::size_t>(order[k])] = static_cast<int>(k);
  const DensityMatrix rho = permute_qubits(input, order);

  const Problem problem(rho);
  // Random starts seeded seed + r, then one deterministic warm start.
  std::vector<std::optional<RestartOutcome>> outcomes(static_cast<std::size_t>(options.restarts) + 1);
  parallel_for(outcomes.size(), options.threads, [&](std::size_t r) {
    if (r == static_cast<std::size_t>(options.restarts)) {
      outcomes[r] = run_restart(problem, local_eigenbasis_start(rho), options);
      return;
    }
    std::mt19937_64 rng(options.seed + r);
    outcomes[r] = run_restart(problem, SeparableEnsemble::random(n, members, rng), options);
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < outcomes.size(); ++r)
    if (outcomes[r]->objective < outcomes[best]->objective) best = r;
  std::vector<double> values;
  for (int r = 0; r < options.restarts; ++r) values.push_back(outcomes[static_cast<std::size_t>(r)]->objective);
  const double worst_random = *std::max_element(values.begin(), values.end());
  const RestartOutcome& winner = *outcomes[best];

  DensityMatrix sigma_star =
      DensityMatrix::trusted(n, problem.mixed_sigma(winner.ensemble.assemble()));
  double value = relative_entropy(rho, sigma_star);
  bool converged = winner.converged;
  if (!std::isfinite(value)) {
    value = winner.objective;
    converged = false;
  }
  return ReeResult{
      .value = value,
      .floored_value = value < options.zero_floor ? 0.0 : value,
      .sigma_star = permute_qubits(sigma_star, inverse),
      .iterations = winner.iterations,
      .restarts_used = options.restarts,
      .converged = converged,
      .spread = worst_random - outcomes[best]->objective,
      .restart_values = std::move(values),
      .warm_start_value = outcomes.back()->objective,
  };
}

}  // namespace decohere
