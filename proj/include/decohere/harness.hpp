// Dephasing sweeps over the plate thickness ell, decay-rate fits on
// ln Q versus ell^2, the rate-ordering check and the CSV formats.
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "decohere/measures.hpp"
#include "decohere/ree.hpp"
#include "decohere/tomo.hpp"

namespace decohere {

/// Evenly spaced ell values, `count` points from start to stop inclusive.
struct EllGrid {
  double start = 0.0;
  double stop = 250.0;
  int count = 26;

  /// Throws std::invalid_argument unless count >= 4 and stop > start >= 0.
  void validate() const;
  std::vector<double> points() const;
};

/// Parses `start:stop:count`.
EllGrid parse_grid(std::string_view text);

/// Parses `all`, letters (`A`, `BC`), digits (`0`, `0,2`) or comma lists of either.
QubitSet parse_targets(std::string_view text, int n_qubits);

struct TomoSettings {
  std::uint64_t shots = 100000;
  int resamples = 100;
  std::uint64_t seed = 0;
  SamplingMode mode = SamplingMode::Multinomial;
};

struct SweepConfig {
  std::string state = "wwbar";
  double gamma = 2.21e-5;
  std::string targets = "all";
  EllGrid grid;
  bool compute_entanglement = true;
  ReeOptions ree;
  /// Empty: ideal channel output only.
  std::optional<TomoSettings> tomo;
  /// Sweep points evaluated concurrently.
  int threads = 1;

  void validate() const;
};

struct SweepRow {
  double ell = 0.0;
  double ell_sq = 0.0;
  MeasureRecord record;
  /// Set when the entanglement solve at this point did not converge.
  bool flagged = false;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  bool has_uncertainties = false;

  std::vector<double> column(Quantity q) const;
  std::vector<std::size_t> flagged_rows() const;
};

/// The dephased state at one grid point.
DensityMatrix sweep_state(const SweepConfig& config, double ell);

/// One row per grid point, in grid order.
SweepTable run_sweep(const SweepConfig& config);

/// All measures of the p = 1/2 limit on the configured targets.
MeasureRecord exact_asymptotes(const SweepConfig& config);

/// Header `ell,ell_sq,E,C,CG,CL,T,K,M` plus `dE..dM` when uncertainties are
/// present; 17 significant digits, LF line endings.
void write_sweep_csv(std::ostream& out, const SweepTable& table);
SweepTable read_sweep_csv(std::istream& in);

/// Semilog: least squares of ln Q against ell^2, the asymptote only bounds
/// which points are used. AsymptoteSubtracted: least squares of ln(Q - Q_inf).
enum class FitConvention { Semilog, AsymptoteSubtracted };

std::string_view label(FitConvention convention);
FitConvention parse_convention(std::string_view text);

enum class FitStatus { Ok, TooFewPoints };

struct DecayFit {
  Quantity quantity = Quantity::C;
  double gamma_fit = 0.0;
  double intercept = 0.0;
  double asymptote = 0.0;
  int points_used = 0;
  double residual_rms = 0.0;
  FitStatus status = FitStatus::TooFewPoints;

  bool ok() const { return status == FitStatus::Ok; }
};

/// Uses the points with Q - Q_inf > max(1e-4 (Q(0) - Q_inf), 1e-7) and
/// reports gamma_fit = -slope. Fewer than 3 such points gives TooFewPoints.
DecayFit fit_decay(const std::vector<SweepRow>& rows, Quantity quantity, double asymptote,
                   FitConvention convention = FitConvention::Semilog);

/// Fits every quantity. Without asymptotes, Semilog takes Q_inf = 0 and
/// AsymptoteSubtracted takes the last row as Q_inf.
std::vector<DecayFit> fit_all(const SweepTable& table, const std::optional<MeasureRecord>& asymptotes,
                              FitConvention convention = FitConvention::Semilog);

struct OrderingReport {
  bool pass = false;
  /// (quantity, rate) in decreasing rate order; K carries rate 0.
  std::vector<std::pair<Quantity, double>> ranked;
  /// e.g. "Gamma(CG) > Gamma(C)" for each broken link, or a missing-fit note.
  std::vector<std::string> violations;

  std::string summary() const;
};

/// Checks Gamma(E) > Gamma(CG) > Gamma(C) > Gamma(CL) > Gamma(T) > Gamma(K) = 0.
OrderingReport verify_ordering(const std::vector<DecayFit>& fits);

/// Header `quantity,gamma_fit,intercept,asymptote,points_used,residual_rms`.
/// Failed fits are written with empty numeric fields.
void write_rates_csv(std::ostream& out, const std::vector<DecayFit>& fits);

/// Decimal with 17 significant digits, locale independent.
std::string format_double(double value);

}  // namespace decohere
