#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "decohere/channels.hpp"
#include "decohere/measures.hpp"
#include "decohere/ree.hpp"
#include "helpers.hpp"
#include "oracle/frozen_values.hpp"

using namespace decohere;
using decohere::testing::named;

namespace {

using Ket2 = std::array<Complex, 2>;

DensityMatrix bell_times_zero() {
  Vector v = Vector::Zero(8);
  v[0] = v[6] = 1.0 / std::sqrt(2.0);  // (|00> + |11>)|0>
  return density_from_pure(PureState(3, v));
}

DensityMatrix bell_pair() {
  Vector v = Vector::Zero(4);
  v[0] = v[3] = 1.0 / std::sqrt(2.0);
  return density_from_pure(PureState(2, v));
}

Ket2 random_ket(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return {Complex(g(rng), g(rng)), Complex(g(rng), g(rng))};
}

// Mixture of `members` random product kets on n qubits.
SeparableEnsemble random_separable(int n, int members, std::mt19937_64& rng) {
  std::vector<std::vector<Ket2>> factors(static_cast<std::size_t>(members));
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> weights;
  double total = 0.0;
  for (auto& member : factors) {
    for (int q = 0; q < n; ++q) member.push_back(random_ket(rng));
    weights.push_back(u(rng));
    total += weights.back();
  }
  for (double& w : weights) w /= total;
  return SeparableEnsemble::from_factors(n, weights, factors);
}

double reduced_entropy(const PureState& psi) {
  return von_neumann_entropy(partial_trace(density_from_pure(psi), QubitSet({0}, psi.n_qubits())));
}

}  // namespace

TEST_CASE("ensemble construction and gauge") {
  std::mt19937_64 rng(1);
  const SeparableEnsemble e = SeparableEnsemble::random(3, 5, rng);
  CHECK(e.size() == 5);
  double total = 0.0;
  for (double w : e.weights()) total += w;
  CHECK(std::abs(total - 1.0) < 1e-12);
  for (int j = 0; j < e.size(); ++j)
    for (int q = 0; q < 3; ++q) {
      const Ket2 f = e.factor(j, q);
      CHECK(std::abs(std::norm(f[0]) + std::norm(f[1]) - 1.0) < 1e-12);
      CHECK(f[0].imag() == doctest::Approx(0.0));
      CHECK(f[0].real() >= 0.0);
    }
  CHECK_NOTHROW(DensityMatrix(3, e.assemble()));

  CHECK_THROWS_AS(SeparableEnsemble(2, {0.5, 0.6}, std::vector<double>(8, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(SeparableEnsemble(2, {1.0}, std::vector<double>(3, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(SeparableEnsemble(2, {1.5, -0.5}, std::vector<double>(8, 0.0)), std::invalid_argument);
}

TEST_CASE("from_factors reproduces the requested kets") {
  std::mt19937_64 rng(2);
  const Ket2 a = random_ket(rng), b = random_ket(rng);
  const SeparableEnsemble e = SeparableEnsemble::from_factors(2, {1.0}, {{a, b}});
  Vector expected(4);
  const double na = std::sqrt(std::norm(a[0]) + std::norm(a[1]));
  const double nb = std::sqrt(std::norm(b[0]) + std::norm(b[1]));
  for (int i = 0; i < 4; ++i) expected[i] = a[static_cast<std::size_t>(i >> 1)] * b[static_cast<std::size_t>(i & 1)] / (na * nb);
  CHECK(std::abs(std::abs(expected.dot(e.member_ket(0))) - 1.0) < 1e-12);
}

TEST_CASE("analytic gradients match central differences") {
  std::mt19937_64 rng(3);
  const double h = 1e-5;
  for (int trial = 0; trial < 4; ++trial) {
    const int n = 2 + trial % 2;
    const DensityMatrix rho = testing::random_density(n, rng);
    const SeparableEnsemble e = SeparableEnsemble::random(n, 4 << n, rng);

    const auto grad = ree_factor_gradient(rho, e);
    double worst = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) {
      auto plus = e.angles(), minus = e.angles();
      plus[i] += h;
      minus[i] -= h;
      const double fd = (ree_objective(rho, e.with_angles(plus)) - ree_objective(rho, e.with_angles(minus))) / (2 * h);
      worst = std::max(worst, std::abs(fd - grad[i]));
    }
    CHECK(worst <= 1e-6);

    // weights: directional derivative along e_0 - e_j keeps the sum fixed
    const auto wgrad = ree_weight_gradient(rho, e);
    for (int j = 1; j < e.size(); j += 5) {
      auto plus = e.weights(), minus = e.weights();
      plus[0] += h;
      plus[static_cast<std::size_t>(j)] -= h;
      minus[0] -= h;
      minus[static_cast<std::size_t>(j)] += h;
      const double fd = (ree_objective(rho, e.with_weights(plus)) - ree_objective(rho, e.with_weights(minus))) / (2 * h);
      CHECK(std::abs(fd - (wgrad[0] - wgrad[static_cast<std::size_t>(j)])) <= 1e-6);
    }
  }
}

TEST_CASE("duplicate members are merged") {
  const Ket2 zero{1.0, 0.0}, plus{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
  const SeparableEnsemble e = SeparableEnsemble::from_factors(2, {0.3, 0.7}, {{zero, plus}, {zero, plus}});
  const SeparableEnsemble merged = merge_duplicate_members(e);
  REQUIRE(merged.size() == 1);
  CHECK(merged.weights()[0] == doctest::Approx(1.0));
  const SeparableEnsemble stepped = ree_fixed_states_weight_step(bell_pair(), e);
  CHECK(stepped.size() == 1);
  CHECK(stepped.weights()[0] == doctest::Approx(1.0));
}

TEST_CASE("weight step fixed point and descent") {
  std::mt19937_64 rng(4);
  // separable rho given exactly by the ensemble: nothing to improve
  const SeparableEnsemble exact = random_separable(2, 3, rng);
  const SeparableEnsemble after = ree_fixed_states_weight_step(exact.density(), exact);
  for (int j = 0; j < exact.size(); ++j)
    CHECK(std::abs(after.weights()[static_cast<std::size_t>(j)] - exact.weights()[static_cast<std::size_t>(j)]) < 1e-8);

  // Bell pair from a random start with m = 8: strict decrease, then monotone
  const DensityMatrix bell = bell_pair();
  SeparableEnsemble e = SeparableEnsemble::random(2, 8, rng);
  double previous = ree_objective(bell, e);
  e = ree_fixed_states_weight_step(bell, e);
  double current = ree_objective(bell, e);
  CHECK(current < previous);
  for (int k = 0; k < 20; ++k) {
    previous = current;
    e = ree_fixed_states_weight_step(bell, e);
    current = ree_objective(bell, e);
    CHECK(current <= previous + 1e-12);
  }
}

TEST_CASE("factor step") {
  std::mt19937_64 rng(5);
  const SeparableEnsemble exact = random_separable(3, 8, rng);
  CHECK_FALSE(ree_factor_step(exact.density(), exact).accepted);

  const DensityMatrix rho = named("wwbar");
  SeparableEnsemble e = SeparableEnsemble::random(3, 32, rng);
  double previous = ree_objective(rho, e);
  for (int k = 0; k < 20; ++k) {
    const FactorStepResult r = ree_factor_step(rho, e);
    if (r.accepted) CHECK(r.objective <= previous + 1e-10);
    CHECK(std::abs(r.objective - ree_objective(rho, r.ensemble)) < 1e-12);
    e = r.ensemble;
    previous = r.objective;
  }
}

TEST_CASE("entanglement of reference states") {
  std::mt19937_64 rng(6);
  const DensityMatrix product = tensor(tensor(density_from_pure(testing::random_pure(1, rng)),
                                              density_from_pure(testing::random_pure(1, rng))),
                                       density_from_pure(testing::random_pure(1, rng)));
  const ReeResult p = ree(product);
  CHECK(p.value <= 1e-6);
  CHECK(p.floored_value == 0.0);
  CHECK(p.spread <= 1e-4);

  const ReeResult b = ree(bell_times_zero());
  CHECK(std::abs(b.value - std::numbers::ln2) <= 1e-3);
  CHECK(b.spread <= 1e-4);

  const ReeResult g = ree(named("ghz:3"));
  CHECK(std::abs(g.value - std::numbers::ln2) <= 1e-3);
  CHECK(g.spread <= 1e-4);
  CHECK(g.restarts_used == 24);
  CHECK(g.restart_values.size() == 24);
}

TEST_CASE("random two-qubit pure states match the reduced entropy") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 4; ++trial) {
    const PureState psi = testing::random_pure(2, rng);
    ReeOptions options;
    options.restarts = 8;
    const ReeResult r = ree(density_from_pure(psi), options);
    CHECK(std::abs(r.value - reduced_entropy(psi)) <= 1e-3);
  }
}

TEST_CASE("separable mixtures have no entanglement") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 4; ++trial) {
    const SeparableEnsemble mix = random_separable(3, 2 + 2 * trial, rng);
    const ReeResult r = ree(mix.density());
    CHECK(r.value <= 1e-4);
  }
}

TEST_CASE("result soundness") {
  const DensityMatrix rho = apply_dephasing(named("star"), {2.06e-5, 150.0, QubitSet::all(3), {}});
  const ReeResult r = ree(rho);
  CHECK(r.value >= -1e-9);
  CHECK(std::abs(relative_entropy(rho, r.sigma_star) - r.value) <= 1e-9);
  CHECK_NOTHROW(DensityMatrix(3, r.sigma_star.matrix()));
  CHECK(r.value < total_coherence(rho));
}

TEST_CASE("wwbar with m = 32 stays below its coherence") {
  ReeOptions options;
  options.ensemble_size = 32;
  const ReeResult r = ree(named("wwbar"), options);
  CHECK(r.value < oracle::WWBAR_C);
  CHECK(r.value > 0.5);
}

TEST_CASE("seeded solves are reproducible across thread counts") {
  const DensityMatrix rho = apply_dephasing(named("wwbar"), {2.21e-5, 120.0, QubitSet::all(3), {}});
  ReeOptions options;
  options.restarts = 6;
  options.seed = 99;
  const ReeResult a = ree(rho, options);
  options.threads = 3;
  const ReeResult b = ree(rho, options);
  CHECK(a.value == b.value);
  CHECK(a.iterations == b.iterations);
  CHECK(a.restart_values == b.restart_values);
  options.seed = 100;
  CHECK(ree(rho, options).restart_values != a.restart_values);
}

TEST_CASE("relabelling qubits leaves the value unchanged") {
  const DensityMatrix rho = apply_dephasing(named("star"), {2.06e-5, 100.0, QubitSet({0}, 3), {}});
  ReeOptions options;
  options.restarts = 4;
  const ReeResult a = ree(rho, options);
  const ReeResult b = ree(permute_qubits(rho, {1, 0, 2}), options);
  CHECK(a.value == b.value);
  CHECK(std::abs(relative_entropy(rho, a.sigma_star) - a.value) <= 1e-9);
}

TEST_CASE("solver argument validation") {
  CHECK_THROWS_AS(ree(named("ket:0")), std::invalid_argument);
  CHECK_THROWS_AS(ree(named("ghz:5")), std::invalid_argument);
  ReeOptions bad;
  bad.restarts = 0;
  CHECK_THROWS_AS(ree(named("ghz:2"), bad), std::invalid_argument);
}

TEST_CASE("iteration cap is reported as non-convergence") {
  ReeOptions options;
  options.max_iters = 2;
  options.restarts = 2;
  const ReeResult r = ree(named("wwbar"), options);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 2);
}

TEST_CASE("random product kets solve to zero") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 3; ++trial) {
    const DensityMatrix product = tensor(tensor(density_from_pure(testing::random_pure(1, rng)),
                                                density_from_pure(testing::random_pure(1, rng))),
                                         density_from_pure(testing::random_pure(1, rng)));
    ReeOptions options;
    options.restarts = 2;
    const ReeResult r = ree(product, options);
    CHECK(r.value <= 1e-6);
    CHECK(r.floored_value == 0.0);
  }
}
