// decohere: command-line front end.
//
//   decohere state --name star --bits
//   decohere sweep --state wwbar --targets all --gamma 2.21e-5 --ell 0:250:26 --out w.csv
//   decohere fit --in w.csv --out rates.csv
//   decohere ree --name ghz:3
//   decohere tomo --name wwbar --shots 100000 --seed 7
//
// Exit status: 0 success, 1 usage error, 2 numerical failure.
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "decohere/channels.hpp"
#include "decohere/harness.hpp"
#include "decohere/measures.hpp"
#include "decohere/ree.hpp"
#include "decohere/tomo.hpp"

using namespace decohere;

namespace {

constexpr int kUsageError = 1;
constexpr int kNumericalError = 2;

struct DephasingArgs {
  double gamma = 0.0;
  double ell = 0.0;
  std::string targets = "all";
};

void add_dephasing(CLI::App* app, DephasingArgs& args) {
  app->add_option("--gamma", args.gamma, "dephasing rate (lambda0^-2)")->check(CLI::NonNegativeNumber);
  app->add_option("--ell", args.ell, "plate thickness (lambda0)")->check(CLI::NonNegativeNumber);
  app->add_option("--targets", args.targets, "dephased qubits: all, A, B, C, ... or indices");
}

void add_ree(CLI::App* app, ReeOptions& ree) {
  app->add_option("--restarts", ree.restarts, "solver restarts")->check(CLI::PositiveNumber);
  app->add_option("--max-iters", ree.max_iters, "iterations per restart")->check(CLI::PositiveNumber);
  app->add_option("--tol", ree.tol, "per-iteration objective decrease to stop at")->check(CLI::PositiveNumber);
  app->add_option("--zero-floor", ree.zero_floor, "report values below this as 0")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--ensemble-size", ree.ensemble_size, "separable ensemble size (0: 4 * 2^n)")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--ree-threads", ree.threads, "threads across restarts")->check(CLI::PositiveNumber);
}

DensityMatrix build_state(const std::string& name, const DephasingArgs& d) {
  DensityMatrix rho = density_from_pure(make_named_state(parse_state_name(name)));
  if (d.ell == 0.0 || d.gamma == 0.0) return rho;
  DephasingSpec spec;
  spec.gamma = d.gamma;
  spec.ell = d.ell;
  spec.targets = parse_targets(d.targets, rho.n_qubits());
  return apply_dephasing(rho, spec);
}

void print_matrix(std::ostream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      char cell[64];
      std::snprintf(cell, sizeof cell, "%+.6f%+.6fi", m(i, j).real(), m(i, j).imag());
      out << (j ? "  " : "") << cell;
    }
    out << '\n';
  }
}

void print_record(std::ostream& out, const MeasureRecord& r, bool bits) {
  const MeasureRecord shown = bits ? to_bits(r) : r;
  const char* unit = bits ? "bits" : "nats";
  for (std::size_t k = 0; k < kAllQuantities.size(); ++k) {
    const Quantity q = kAllQuantities[k];
    if (q == Quantity::E && !r.has_entanglement) continue;
    out << std::setw(3) << label(q) << " = " << std::setprecision(12) << shown.get(q);
    if (shown.sigma) out << " +- " << std::setprecision(3) << (*shown.sigma)[k];
    out << ' ' << unit << '\n';
  }
}

// Keys are long option names without the leading dashes; max_iters and
// max-iters both work, and `seed` reaches the global option. Options already
// given on the command line keep their values.
void apply_config_file(CLI::App* app, const std::string& path) {
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(path)) {
    if (!item.parents.empty() || item.name == "config")
      throw std::invalid_argument("unsupported config key '" + item.fullname() + "'");
    std::string name = item.name;
    std::replace(name.begin(), name.end(), '_', '-');
    CLI::Option* opt = app->get_option_no_throw("--" + name);
    if (opt == nullptr && app->get_parent() != nullptr) opt = app->get_parent()->get_option_no_throw("--" + name);
    if (opt == nullptr) throw std::invalid_argument("unknown config key '" + item.name + "'");
    if (opt->count() > 0) continue;
    opt->add_result(item.inputs);
    opt->run_callback();
  }
}

std::string mode_name(SamplingMode mode) { return mode == SamplingMode::Exact ? "exact" : "multinomial"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coherence, correlation and entanglement measures under qubit dephasing"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "global seed")->envname("DECOHERE_SEED");

  // state
  auto* state_cmd = app.add_subcommand("state", "print a named state's matrix and measures");
  std::string state_name;
  bool bits = false, skip_e = false;
  DephasingArgs state_dephasing;
  ReeOptions state_ree;
  state_cmd->add_option("--name", state_name, "w, wbar, wwbar, star, ghz:N, dicke:N:K, ket:BITS")->required();
  state_cmd->add_flag("--bits", bits, "report in bits instead of nats");
  state_cmd->add_flag("--no-entanglement", skip_e, "skip the entanglement solve");
  add_dephasing(state_cmd, state_dephasing);
  add_ree(state_cmd, state_ree);

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "measures along a dephasing sweep, written as CSV");
  std::string sweep_config;
  sweep_cmd->add_option("--config", sweep_config, "key = value file; flags given on the command line win")
      ->check(CLI::ExistingFile);
  SweepConfig sweep;
  std::string grid_text = "0:250:26", sweep_out = "-", tomo_mode = "multinomial";
  std::uint64_t tomo_shots = 0;
  std::optional<std::uint64_t> tomo_seed;
  int tomo_resamples = 100;
  bool sweep_skip_e = false;
  sweep_cmd->add_option("--state", sweep.state, "state name");
  sweep_cmd->add_option("--targets", sweep.targets, "dephased qubits");
  sweep_cmd->add_option("--gamma", sweep.gamma, "dephasing rate (lambda0^-2)")->check(CLI::NonNegativeNumber);
  sweep_cmd->add_option("--ell", grid_text, "grid start:stop:count (lambda0)");
  sweep_cmd->add_option("--out", sweep_out, "output CSV, - for stdout");
  sweep_cmd->add_option("--threads", sweep.threads, "grid points evaluated in parallel")
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_flag("--no-entanglement", sweep_skip_e, "skip the entanglement solve");
  sweep_cmd->add_option("--tomo-shots", tomo_shots, "shots per setting; 0 disables tomography");
  sweep_cmd->add_option("--tomo-resamples", tomo_resamples, "bootstrap resamples")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--tomo-seed", tomo_seed, "tomography seed (default: --seed)");
  sweep_cmd->add_option("--tomo-mode", tomo_mode, "multinomial or exact")
      ->check(CLI::IsMember({"multinomial", "exact"}));
  add_ree(sweep_cmd, sweep.ree);

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "decay rates from a sweep CSV and the ordering check");
  std::string fit_in, fit_out = "-", convention = "semilog", fit_state, fit_targets = "all";
  ReeOptions fit_ree;
  fit_cmd->add_option("--in", fit_in, "sweep CSV")->required();
  fit_cmd->add_option("--out", fit_out, "rates CSV, - for stdout");
  fit_cmd->add_option("--convention", convention, "semilog or asymptote")
      ->check(CLI::IsMember({"semilog", "asymptote"}));
  fit_cmd->add_option("--state", fit_state, "state of the sweep, for exact asymptotes");
  fit_cmd->add_option("--targets", fit_targets, "targets of the sweep, for exact asymptotes");
  add_ree(fit_cmd, fit_ree);

  // ree
  auto* ree_cmd = app.add_subcommand("ree", "relative entropy of entanglement with diagnostics");
  std::string ree_name;
  DephasingArgs ree_dephasing;
  ReeOptions ree_options;
  ree_cmd->add_option("--name", ree_name, "state name")->required();
  add_dephasing(ree_cmd, ree_dephasing);
  add_ree(ree_cmd, ree_options);

  // tomo
  auto* tomo_cmd = app.add_subcommand("tomo", "simulate tomography, reconstruct, report fidelity");
  std::string tomo_name, counts_out, counts_in, tomo_cmd_mode = "multinomial";
  DephasingArgs tomo_dephasing;
  std::uint64_t shots = 100000;
  int bootstrap = 0;
  tomo_cmd->add_option("--name", tomo_name, "state name (target)")->required();
  add_dephasing(tomo_cmd, tomo_dephasing);
  tomo_cmd->add_option("--shots", shots, "shots per setting")->check(CLI::PositiveNumber);
  tomo_cmd->add_option("--mode", tomo_cmd_mode, "multinomial or exact")
      ->check(CLI::IsMember({"multinomial", "exact"}));
  tomo_cmd->add_option("--counts-out", counts_out, "write the simulated counts CSV");
  tomo_cmd->add_option("--counts-in", counts_in, "reconstruct from this counts CSV instead of simulating");
  tomo_cmd->add_option("--bootstrap", bootstrap, "resamples for error bars (0: none)")
      ->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*state_cmd) {
      const DensityMatrix rho = build_state(state_name, state_dephasing);
      state_ree.seed = seed;
      const MeasureRecord r = all_measures(rho, MeasureOptions{!skip_e, state_ree});
      std::cout << to_string(parse_state_name(state_name)) << " (" << rho.n_qubits() << " qubits)\n";
      print_matrix(std::cout, rho.matrix());
      print_record(std::cout, r, bits);
      const std::string problems = check_record_invariants(r, 1e-6);
      if (!problems.empty()) {
        std::cerr << "invariant check failed: " << problems << '\n';
        return kNumericalError;
      }
      return 0;
    }

    if (*sweep_cmd) {
      if (!sweep_config.empty()) apply_config_file(sweep_cmd, sweep_config);
      sweep.grid = parse_grid(grid_text);
      sweep.compute_entanglement = !sweep_skip_e;
      sweep.ree.seed = seed;
      if (tomo_shots > 0)
        sweep.tomo = TomoSettings{tomo_shots, tomo_resamples, tomo_seed.value_or(seed),
                                  tomo_mode == "exact" ? SamplingMode::Exact : SamplingMode::Multinomial};
      const SweepTable table = run_sweep(sweep);
      for (std::size_t i : table.flagged_rows())
        std::cerr << "warning: entanglement solve did not converge at ell = " << table.rows[i].ell << '\n';
      if (sweep_out == "-") {
        write_sweep_csv(std::cout, table);
      } else {
        std::ofstream out(sweep_out, std::ios::binary);
        if (!out) throw std::invalid_argument("cannot open " + sweep_out);
        write_sweep_csv(out, table);
        std::cerr << table.rows.size() << " rows written to " << sweep_out << '\n';
      }
      return 0;
    }

    if (*fit_cmd) {
      std::ifstream in(fit_in, std::ios::binary);
      if (!in) throw std::invalid_argument("cannot open " + fit_in);
      const SweepTable table = read_sweep_csv(in);
      std::optional<MeasureRecord> asymptotes;
      if (!fit_state.empty()) {
        SweepConfig config;
        config.state = fit_state;
        config.targets = fit_targets;
        config.ree = fit_ree;
        config.ree.seed = seed;
        asymptotes = exact_asymptotes(config);
      }
      const auto fits = fit_all(table, asymptotes, parse_convention(convention));
      if (fit_out == "-") {
        write_rates_csv(std::cout, fits);
      } else {
        std::ofstream out(fit_out, std::ios::binary);
        if (!out) throw std::invalid_argument("cannot open " + fit_out);
        write_rates_csv(out, fits);
      }
      std::cerr << verify_ordering(fits).summary() << '\n';
      return 0;
    }

    if (*ree_cmd) {
      const DensityMatrix rho = build_state(ree_name, ree_dephasing);
      ree_options.seed = seed;
      const ReeResult r = ree(rho, ree_options);
      std::cout << std::setprecision(12) << "E           = " << r.floored_value << " nats\n"
                << "raw value   = " << r.value << '\n'
                << "spread      = " << std::setprecision(3) << r.spread << '\n'
                << "iterations  = " << r.iterations << '\n'
                << "restarts    = " << r.restarts_used << '\n'
                << "converged   = " << (r.converged ? "yes" : "no") << '\n'
                << "warm start  = " << std::setprecision(10) << r.warm_start_value << '\n'
                << "restart values:";
      for (double v : r.restart_values) std::cout << ' ' << std::setprecision(10) << v;
      std::cout << '\n';
      if (!r.converged) {
        std::cerr << "entanglement solve did not converge\n";
        return kNumericalError;
      }
      return 0;
    }

    if (*tomo_cmd) {
      const DensityMatrix target = build_state(tomo_name, tomo_dephasing);
      const SamplingMode mode = tomo_cmd_mode == "exact" ? SamplingMode::Exact : SamplingMode::Multinomial;
      CountTable table;
      if (!counts_in.empty()) {
        std::ifstream in(counts_in, std::ios::binary);
        if (!in) throw std::invalid_argument("cannot open " + counts_in);
        table = read_counts_csv(in);
        if (table.n_qubits != target.n_qubits())
          throw std::invalid_argument("counts and target have different qubit counts");
      } else {
        table = sample_counts(target, shots, seed, mode);
      }
      if (!counts_out.empty()) {
        std::ofstream out(counts_out, std::ios::binary);
        if (!out) throw std::invalid_argument("cannot open " + counts_out);
        write_counts_csv(out, table);
      }
      const TomoResult result = reconstruct(table, target);
      std::cout << "mode            = " << (table.exact() ? "exact" : mode_name(mode)) << '\n'
                << "shots/setting   = " << table.shots_per_setting << '\n'
                << std::setprecision(8) << "fidelity        = " << *result.fidelity_vs_target << '\n'
                << "trace distance  = " << trace_distance(result.rho_hat, target) << '\n'
                << "eigen clip mass = " << std::setprecision(3) << result.eigen_clip_mass << '\n';
      if (bootstrap >= 2) {
        BootstrapOptions boot;
        boot.shots = shots;
        boot.resamples = bootstrap;
        boot.seed = seed;
        boot.mode = mode;
        boot.measures.compute_entanglement = target.n_qubits() >= 2 && target.n_qubits() <= 4;
        boot.measures.ree.seed = seed;
        print_record(std::cout, bootstrap_measures(target, boot), false);
      } else {
        MeasureOptions options;
        options.compute_entanglement = target.n_qubits() >= 2 && target.n_qubits() <= 4;
        options.ree.seed = seed;
        print_record(std::cout, all_measures(result.rho_hat, options), false);
      }
      return 0;
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}
