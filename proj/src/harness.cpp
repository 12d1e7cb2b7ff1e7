#include "decohere/harness.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "decohere/channels.hpp"
#include "decohere/parallel.hpp"

namespace decohere {
namespace {

constexpr std::string_view kSweepHeader = "ell,ell_sq,E,C,CG,CL,T,K,M";
constexpr std::string_view kSigmaHeader = ",dE,dC,dCG,dCL,dT,dK,dM";

std::vector<std::string> split(std::string_view text, char delimiter) {
  std::vector<std::string> parts;
  std::size_t begin = 0;
  while (true) {
    const std::size_t end = text.find(delimiter, begin);
    parts.emplace_back(text.substr(begin, end == std::string_view::npos ? std::string_view::npos : end - begin));
    if (end == std::string_view::npos) return parts;
    begin = end + 1;
  }
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return std::string(text.substr(first, last - first + 1));
}

double parse_double(std::string_view text) {
  const std::string s = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw std::invalid_argument("not a number: '" + s + "'");
  return value;
}

int parse_int(std::string_view text) {
  const std::string s = trim(text);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw std::invalid_argument("not an integer: '" + s + "'");
  return value;
}

DensityMatrix ideal_state(const SweepConfig& config) {
  return density_from_pure(make_named_state(parse_state_name(config.state)));
}

const DecayFit* find_fit(const std::vector<DecayFit>& fits, Quantity q) {
  for (const DecayFit& f : fits)
    if (f.quantity == q) return &f;
  return nullptr;
}

}  // namespace

void EllGrid::validate() const {
  if (count < 4) throw std::invalid_argument("ell grid needs at least 4 points");
  if (!(start >= 0.0) || !(stop > start) || !std::isfinite(stop))
    throw std::invalid_argument("ell grid needs stop > start >= 0");
}

std::vector<double> EllGrid::points() const {
  validate();
  std::vector<double> out(static_cast<std::size_t>(count));
  const double step = (stop - start) / (count - 1);
  for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = start + step * k;
  out.back() = stop;
  return out;
}

EllGrid parse_grid(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw std::invalid_argument("ell grid must look like start:stop:count");
  EllGrid grid{parse_double(parts[0]), parse_double(parts[1]), parse_int(parts[2])};
  grid.validate();
  return grid;
}

QubitSet parse_targets(std::string_view text, int n_qubits) {
  const std::string t = trim(text);
  if (t == "all") return QubitSet::all(n_qubits);
  std::vector<int> labels;
  for (const std::string& raw : split(t, ',')) {
    const std::string token = trim(raw);
    if (token.empty()) throw std::invalid_argument("empty dephasing target in '" + t + "'");
    if (std::all_of(token.begin(), token.end(), [](unsigned char c) { return std::isdigit(c); })) {
      labels.push_back(parse_int(token));
      continue;
    }
    for (char c : token) {
      const char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      if (upper < 'A' || upper > 'Z') throw std::invalid_argument("bad dephasing target '" + token + "'");
      labels.push_back(upper - 'A');
    }
  }
  if (labels.empty()) throw std::invalid_argument("no dephasing targets given");
  for (int q : labels)
    if (q >= n_qubits)
      throw std::invalid_argument("dephasing target " + std::to_string(q) + " outside a " +
                                  std::to_string(n_qubits) + "-qubit register");
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return QubitSet(labels, n_qubits);
}

void SweepConfig::validate() const {
  const NamedState name = parse_state_name(state);
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be finite and >= 0");
  parse_targets(targets, name.n);
  grid.validate();
  if (threads < 1) throw std::invalid_argument("threads must be positive");
  if (tomo) {
    if (tomo->shots < 1) throw std::invalid_argument("tomography needs at least one shot");
    if (tomo->resamples < 2) throw std::invalid_argument("tomography needs at least two resamples");
  }
}

std::vector<double> SweepTable::column(Quantity q) const {
  std::vector<double> out;
  for (const SweepRow& row : rows) out.push_back(row.record.get(q));
  return out;
}

std::vector<std::size_t> SweepTable::flagged_rows() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].flagged) out.push_back(i);
  return out;
}

DensityMatrix sweep_state(const SweepConfig& config, double ell) {
  const DensityMatrix ideal = ideal_state(config);
  DephasingSpec spec;
  spec.gamma = config.gamma;
  spec.ell = ell;
  spec.targets = parse_targets(config.targets, ideal.n_qubits());
  return apply_dephasing(ideal, spec);
}

SweepTable run_sweep(const SweepConfig& config) {
  config.validate();
  const DensityMatrix ideal = ideal_state(config);
  DephasingSpec spec;
  spec.gamma = config.gamma;
  spec.targets = parse_targets(config.targets, ideal.n_qubits());
  const MeasureOptions measure_options{config.compute_entanglement, config.ree};

  const std::vector<double> ells = config.grid.points();
  SweepTable table;
  table.rows.resize(ells.size());
  table.has_uncertainties = config.tomo.has_value();
  parallel_for(ells.size(), config.threads, [&](std::size_t i) {
    DephasingSpec point = spec;
    point.ell = ells[i];
    const DensityMatrix rho = apply_dephasing(ideal, point);
    SweepRow& row = table.rows[i];
    row.ell = ells[i];
    row.ell_sq = ells[i] * ells[i];
    if (config.tomo) {
      BootstrapOptions boot;
      boot.shots = config.tomo->shots;
      boot.resamples = config.tomo->resamples;
      boot.seed = config.tomo->seed;
      boot.mode = config.tomo->mode;
      boot.measures = measure_options;
      row.record = bootstrap_measures(rho, boot);
    } else {
      row.record = all_measures(rho, measure_options);
      row.flagged = row.record.ree && !row.record.ree->converged;
    }
  });
  return table;
}

MeasureRecord exact_asymptotes(const SweepConfig& config) {
  config.validate();
  const DensityMatrix ideal = ideal_state(config);
  const DensityMatrix limit =
      apply_dephasing_p(ideal, parse_targets(config.targets, ideal.n_qubits()), 0.5);
  return all_measures(limit, MeasureOptions{config.compute_entanglement, config.ree});
}

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value, std::chars_format::general, 17);
  return std::string(buffer, result.ptr);
}

void write_sweep_csv(std::ostream& out, const SweepTable& table) {
  out << kSweepHeader;
  if (table.has_uncertainties) out << kSigmaHeader;
  out << '\n';
  for (const SweepRow& row : table.rows) {
    out << format_double(row.ell) << ',' << format_double(row.ell_sq);
    for (Quantity q : kAllQuantities) out << ',' << format_double(row.record.get(q));
    if (table.has_uncertainties) {
      if (!row.record.sigma) throw std::invalid_argument("row without uncertainties in an uncertainty table");
      for (double s : *row.record.sigma) out << ',' << format_double(s);
    }
    out << '\n';
  }
}

SweepTable read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty sweep CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  SweepTable table;
  const std::string with_sigma = std::string(kSweepHeader) + std::string(kSigmaHeader);
  if (line == with_sigma) {
    table.has_uncertainties = true;
  } else if (line != kSweepHeader) {
    throw std::invalid_argument("unexpected sweep CSV header '" + line + "'");
  }
  const std::size_t columns = table.has_uncertainties ? 16 : 9;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != columns)
      throw std::invalid_argument("line " + std::to_string(line_number) + ": expected " +
                                  std::to_string(columns) + " columns");
    SweepRow row;
    row.ell = parse_double(cells[0]);
    row.ell_sq = parse_double(cells[1]);
    for (std::size_t k = 0; k < kAllQuantities.size(); ++k)
      row.record.set(kAllQuantities[k], parse_double(cells[2 + k]));
    row.record.has_entanglement = true;
    if (table.has_uncertainties) {
      std::array<double, 7> sigma{};
      for (std::size_t k = 0; k < sigma.size(); ++k) sigma[k] = parse_double(cells[9 + k]);
      row.record.sigma = sigma;
    }
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw std::invalid_argument("sweep CSV has no rows");
  return table;
}

std::string_view label(FitConvention convention) {
  return convention == FitConvention::Semilog ? "semilog" : "asymptote";
}

FitConvention parse_convention(std::string_view text) {
  if (text == "semilog") return FitConvention::Semilog;
  if (text == "asymptote") return FitConvention::AsymptoteSubtracted;
  throw std::invalid_argument("fit convention must be 'semilog' or 'asymptote'");
}

DecayFit fit_decay(const std::vector<SweepRow>& rows, Quantity quantity, double asymptote,
                   FitConvention convention) {
  DecayFit fit;
  fit.quantity = quantity;
  fit.asymptote = asymptote;
  if (rows.empty()) return fit;

  const auto first = std::min_element(rows.begin(), rows.end(),
                                      [](const SweepRow& a, const SweepRow& b) { return a.ell < b.ell; });
  const double epsilon = std::max(1e-4 * (first->record.get(quantity) - asymptote), 1e-7);

  std::vector<double> xs, ys;
  for (const SweepRow& row : rows) {
    const double q = row.record.get(quantity);
    if (!(q - asymptote > epsilon)) continue;
    xs.push_back(row.ell_sq);
    ys.push_back(convention == FitConvention::Semilog ? std::log(q) : std::log(q - asymptote));
  }
  if (xs.size() < 3) return fit;

  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) return fit;
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    ss += r * r;
  }
  fit.gamma_fit = 0.0 - slope;
  fit.intercept = intercept;
  fit.points_used = static_cast<int>(xs.size());
  fit.residual_rms = std::sqrt(ss / n);
  fit.status = std::isfinite(fit.gamma_fit) ? FitStatus::Ok : FitStatus::TooFewPoints;
  return fit;
}

std::vector<DecayFit> fit_all(const SweepTable& table, const std::optional<MeasureRecord>& asymptotes,
                              FitConvention convention) {
  std::vector<DecayFit> fits;
  for (Quantity q : kAllQuantities) {
    double q_inf = 0.0;
    if (asymptotes)
      q_inf = asymptotes->get(q);
    else if (convention == FitConvention::AsymptoteSubtracted && !table.rows.empty())
      q_inf = table.rows.back().record.get(q);
    fits.push_back(fit_decay(table.rows, q, q_inf, convention));
  }
  return fits;
}

std::string OrderingReport::summary() const {
  std::ostringstream out;
  out << (pass ? "ORDERING PASS:" : "ORDERING FAIL:");
  for (std::size_t i = 0; i < ranked.size(); ++i)
    out << (i == 0 ? " " : " > ") << "Gamma(" << label(ranked[i].first) << ")=" << ranked[i].second;
  for (const std::string& v : violations) out << "; violated " << v;
  return out.str();
}

OrderingReport verify_ordering(const std::vector<DecayFit>& fits) {
  constexpr std::array<Quantity, 6> chain = {Quantity::E, Quantity::CG, Quantity::C,
                                             Quantity::CL, Quantity::T, Quantity::K};
  OrderingReport report;
  std::vector<std::optional<double>> rates;
  for (Quantity q : chain) {
    if (q == Quantity::K) {
      rates.emplace_back(0.0);
      continue;
    }
    const DecayFit* fit = find_fit(fits, q);
    if (fit == nullptr || !fit->ok()) {
      report.violations.push_back("no fit for " + std::string(label(q)));
      rates.emplace_back();
      continue;
    }
    rates.emplace_back(fit->gamma_fit);
  }
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    if (!rates[i] || !rates[i + 1]) continue;
    if (!(*rates[i] > *rates[i + 1]))
      report.violations.push_back("Gamma(" + std::string(label(chain[i])) + ") > Gamma(" +
                                  std::string(label(chain[i + 1])) + ")");
  }
  for (std::size_t i = 0; i < chain.size(); ++i)
    if (rates[i]) report.ranked.emplace_back(chain[i], *rates[i]);
  std::stable_sort(report.ranked.begin(), report.ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  report.pass = report.violations.empty();
  return report;
}

void write_rates_csv(std::ostream& out, const std::vector<DecayFit>& fits) {
  out << "quantity,gamma_fit,intercept,asymptote,points_used,residual_rms\n";
  for (const DecayFit& f : fits) {
    out << label(f.quantity) << ',';
    if (f.ok())
      out << format_double(f.gamma_fit) << ',' << format_double(f.intercept) << ',';
    else
      out << ",,";
    out << format_double(f.asymptote) << ',' << f.points_used << ',';
    if (f.ok()) out << format_double(f.residual_rms);
    out << '\n';
  }
}

}  // namespace decohere
