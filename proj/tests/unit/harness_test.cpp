#include <doctest.h>

#include <cmath>
#include <sstream>

#include "decohere/harness.hpp"
#include "oracle/frozen_values.hpp"

using namespace decohere;

namespace {

std::vector<SweepRow> synthetic(double amplitude, double gamma, double asymptote, Quantity q) {
  std::vector<SweepRow> rows;
  for (double ell = 0.0; ell <= 250.0; ell += 10.0) {
    SweepRow row;
    row.ell = ell;
    row.ell_sq = ell * ell;
    row.record.set(q, asymptote + amplitude * std::exp(-gamma * ell * ell));
    rows.push_back(row);
  }
  return rows;
}

DecayFit made_fit(Quantity q, double rate) {
  DecayFit f;
  f.quantity = q;
  f.gamma_fit = rate;
  f.points_used = 10;
  f.status = FitStatus::Ok;
  return f;
}

SweepConfig quick(std::string state, std::string targets, std::string grid) {
  SweepConfig c;
  c.state = std::move(state);
  c.targets = std::move(targets);
  c.grid = parse_grid(grid);
  c.compute_entanglement = false;
  return c;
}

std::string csv_of(const SweepTable& t) {
  std::ostringstream out;
  write_sweep_csv(out, t);
  return out.str();
}

}  // namespace

TEST_CASE("grid parsing") {
  const EllGrid g = parse_grid("0:250:26");
  const auto pts = g.points();
  CHECK(pts.size() == 26);
  CHECK(pts.front() == 0.0);
  CHECK(pts[1] == 10.0);
  CHECK(pts.back() == 250.0);
  CHECK_THROWS_AS(parse_grid("0:250:3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("10:10:5"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("-1:10:5"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("0:10"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("0:ten:5"), std::invalid_argument);
}

TEST_CASE("target parsing") {
  CHECK(parse_targets("all", 3).labels() == std::vector<int>{0, 1, 2});
  CHECK(parse_targets("C", 3).labels() == std::vector<int>{2});
  CHECK(parse_targets("b", 3).labels() == std::vector<int>{1});
  CHECK(parse_targets("AC", 3).labels() == std::vector<int>{0, 2});
  CHECK(parse_targets("2,0", 3).labels() == std::vector<int>{0, 2});
  CHECK_THROWS_AS(parse_targets("D", 3), std::invalid_argument);
  CHECK_THROWS_AS(parse_targets("3", 3), std::invalid_argument);
  CHECK_THROWS_AS(parse_targets("", 3), std::invalid_argument);
  CHECK_THROWS_AS(parse_targets("A-", 3), std::invalid_argument);
}

TEST_CASE("fit of an exact exponential") {
  const auto rows = synthetic(0.5, 3e-5, 0.0, Quantity::C);
  const DecayFit f = fit_decay(rows, Quantity::C, 0.0);
  REQUIRE(f.ok());
  CHECK(std::abs(f.gamma_fit - 3e-5) / 3e-5 < 1e-8);
  CHECK(std::abs(f.intercept - std::log(0.5)) < 1e-9);
  CHECK(f.points_used == 26);
  CHECK(f.residual_rms < 1e-12);
}

TEST_CASE("asymptote-subtracted fit recovers the rate") {
  const auto rows = synthetic(0.8, 4.5e-5, 0.3, Quantity::T);
  const DecayFit f = fit_decay(rows, Quantity::T, 0.3, FitConvention::AsymptoteSubtracted);
  REQUIRE(f.ok());
  CHECK(std::abs(f.gamma_fit - 4.5e-5) / 4.5e-5 < 1e-8);
  CHECK(f.asymptote == 0.3);
  // the semilog convention on the same data sees a slower, curved decay
  const DecayFit s = fit_decay(rows, Quantity::T, 0.3, FitConvention::Semilog);
  CHECK(s.gamma_fit < f.gamma_fit);
}

TEST_CASE("saturated tails are excluded and short fits refused") {
  // reaches Q_inf within 1e-4 of the initial gap after ell ~ 180
  const auto rows = synthetic(1.0, 3e-4, 0.0, Quantity::C);
  const DecayFit f = fit_decay(rows, Quantity::C, 0.0);
  REQUIRE(f.ok());
  CHECK(f.points_used < 26);
  CHECK(std::abs(f.gamma_fit - 3e-4) / 3e-4 < 1e-8);

  const auto flat = synthetic(0.0, 1e-5, 0.4, Quantity::K);
  CHECK(fit_decay(flat, Quantity::K, 0.4).status == FitStatus::TooFewPoints);
  const std::vector<SweepRow> two(rows.begin(), rows.begin() + 2);
  CHECK(fit_decay(two, Quantity::C, 0.0).status == FitStatus::TooFewPoints);
  CHECK(fit_decay({}, Quantity::C, 0.0).status == FitStatus::TooFewPoints);
}

TEST_CASE("ordering verification") {
  std::vector<DecayFit> fits = {made_fit(Quantity::E, 9e-5), made_fit(Quantity::CG, 6e-5),
                                made_fit(Quantity::C, 5e-5), made_fit(Quantity::CL, 4e-5),
                                made_fit(Quantity::T, 2e-5)};
  OrderingReport r = verify_ordering(fits);
  CHECK(r.pass);
  REQUIRE(r.ranked.size() == 6);
  CHECK(r.ranked.front().first == Quantity::E);
  CHECK(r.ranked.back().first == Quantity::K);
  CHECK(r.summary().rfind("ORDERING PASS", 0) == 0);

  fits[2].gamma_fit = 7e-5;  // Gamma(C) > Gamma(CG)
  r = verify_ordering(fits);
  CHECK_FALSE(r.pass);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0] == "Gamma(CG) > Gamma(C)");

  fits.pop_back();
  r = verify_ordering(fits);
  CHECK_FALSE(r.pass);
  CHECK(r.summary().find("no fit for T") != std::string::npos);

  std::vector<DecayFit> negative_t = {made_fit(Quantity::E, 9e-5), made_fit(Quantity::CG, 6e-5),
                                      made_fit(Quantity::C, 5e-5), made_fit(Quantity::CL, 4e-5),
                                      made_fit(Quantity::T, -1e-6)};
  CHECK(verify_ordering(negative_t).violations == std::vector<std::string>{"Gamma(T) > Gamma(K)"});
}

TEST_CASE("sweep rows of wwbar under all-qubit dephasing") {
  const SweepTable t = run_sweep(quick("wwbar", "all", "0:250:26"));
  REQUIRE(t.rows.size() == 26);
  for (std::size_t i = 1; i < t.rows.size(); ++i) CHECK(t.rows[i].ell > t.rows[i - 1].ell);
  const MeasureRecord& r0 = t.rows[0].record;
  CHECK(std::abs(r0.C - oracle::WWBAR_C) < 1e-9);
  CHECK(std::abs(r0.CG - oracle::WWBAR_CG) < 1e-9);
  CHECK(std::abs(r0.CL - oracle::WWBAR_CL) < 1e-9);
  CHECK(std::abs(r0.T - oracle::WWBAR_T) < 1e-9);
  CHECK(std::abs(r0.K - oracle::WWBAR_K) < 1e-9);

  // largest ell with Gamma ell^2 >= 40
  const double ell_max = std::ceil(std::sqrt(40.0 / 2.21e-5));
  const SweepTable deep = run_sweep(quick("wwbar", "all", "0:" + std::to_string(ell_max) + ":5"));
  const MeasureRecord& last = deep.rows.back().record;
  CHECK(last.C <= 1e-9);
  CHECK(std::abs(last.CG) <= 1e-9);
  CHECK(last.CL <= 1e-9);
  CHECK(std::abs(last.T - std::log(4.0 / 3.0)) <= 1e-9);
  CHECK(std::abs(last.K - std::log(4.0 / 3.0)) <= 1e-9);
}

TEST_CASE("exact asymptotes") {
  SweepConfig c = quick("wwbar", "all", "0:250:26");
  c.compute_entanglement = true;
  const MeasureRecord inf = exact_asymptotes(c);
  CHECK(inf.E == 0.0);
  CHECK(inf.C < 1e-12);
  CHECK(std::abs(inf.T - std::log(4.0 / 3.0)) < 1e-12);
  CHECK(std::abs(inf.T - inf.K) < 1e-12);
}

TEST_CASE("single-target wwbar sweeps do not depend on the target") {
  SweepConfig c = quick("wwbar", "A", "0:600:4");
  c.compute_entanglement = true;
  c.ree.restarts = 3;
  const SweepTable a = run_sweep(c);
  for (const char* target : {"B", "C"}) {
    c.targets = target;
    const SweepTable other = run_sweep(c);
    for (std::size_t i = 0; i < a.rows.size(); ++i)
      for (Quantity q : kAllQuantities) {
        CAPTURE(target);
        CAPTURE(label(q));
        CHECK(std::abs(a.rows[i].record.get(q) - other.rows[i].record.get(q)) <= 1e-12);
      }
  }
}

TEST_CASE("sweeps are reproducible across thread counts") {
  SweepConfig c = quick("star", "all", "0:200:4");
  c.compute_entanglement = true;
  c.ree.restarts = 3;
  c.ree.seed = 17;
  const std::string one = csv_of(run_sweep(c));
  c.threads = 3;
  CHECK(csv_of(run_sweep(c)) == one);
  c.ree.threads = 2;
  CHECK(csv_of(run_sweep(c)) == one);
}

TEST_CASE("solver trouble flags rows without failing the sweep") {
  SweepConfig c = quick("wwbar", "all", "0:100:4");
  c.compute_entanglement = true;
  c.ree.restarts = 1;
  c.ree.max_iters = 2;
  const SweepTable t = run_sweep(c);
  CHECK(t.rows.size() == 4);
  CHECK(t.flagged_rows().size() == 4);
}

TEST_CASE("CSV round trip is digit exact") {
  const SweepTable t = run_sweep(quick("star", "C", "0:900:7"));
  const std::string first = csv_of(t);
  CHECK(first.rfind("ell,ell_sq,E,C,CG,CL,T,K,M\n", 0) == 0);
  CHECK(first.find('\r') == std::string::npos);
  std::istringstream in(first);
  const SweepTable back = read_sweep_csv(in);
  CHECK(csv_of(back) == first);

  std::ostringstream r1, r2;
  write_rates_csv(r1, fit_all(t, std::nullopt));
  write_rates_csv(r2, fit_all(back, std::nullopt));
  CHECK(r1.str() == r2.str());
  CHECK(r1.str().rfind("quantity,gamma_fit,intercept,asymptote,points_used,residual_rms\n", 0) == 0);

  std::istringstream bad("ell,ell_sq,E\n0,0,0\n");
  CHECK_THROWS_AS(read_sweep_csv(bad), std::invalid_argument);
  std::istringstream short_row("ell,ell_sq,E,C,CG,CL,T,K,M\n0,0,1\n");
  CHECK_THROWS_AS(read_sweep_csv(short_row), std::invalid_argument);
}

TEST_CASE("tomography-backed sweeps carry uncertainties") {
  SweepConfig c = quick("wwbar", "all", "0:200:4");
  c.tomo = TomoSettings{2000, 3, 5, SamplingMode::Multinomial};
  const SweepTable t = run_sweep(c);
  CHECK(t.has_uncertainties);
  const std::string text = csv_of(t);
  CHECK(text.rfind("ell,ell_sq,E,C,CG,CL,T,K,M,dE,dC,dCG,dCL,dT,dK,dM\n", 0) == 0);
  std::istringstream in(text);
  const SweepTable back = read_sweep_csv(in);
  CHECK(back.has_uncertainties);
  CHECK(csv_of(back) == text);
  for (const SweepRow& row : t.rows) CHECK((*row.record.sigma)[1] > 0.0);
}

TEST_CASE("config validation") {
  SweepConfig c;
  c.state = "nope";
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SweepConfig{};
  c.gamma = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SweepConfig{};
  c.targets = "D";
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SweepConfig{};
  c.grid.count = 2;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SweepConfig{};
  c.tomo = TomoSettings{};
  c.tomo->resamples = 1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("number formatting is exact and locale free") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(250.0) == "250");
  CHECK(format_double(2.21e-5) == "2.2099999999999998e-05");
  for (double x : {1.0 / 3.0, 6.02e23, -0.0, 1e-300}) {
    double back = 0.0;
    std::istringstream(format_double(x)) >> back;
    CHECK(back == x);
  }
}
