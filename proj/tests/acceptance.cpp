// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed here.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "gridclear/analysis.hpp"
#include "gridclear/error.hpp"
#include "gridclear/market.hpp"
#include "gridclear/pricing.hpp"
#include "gridclear/scenario_io.hpp"
#include "gridclear/settlement.hpp"
#include "oracles.hpp"

using namespace gridclear;
using namespace gridclear::testing;
namespace fs = std::filesystem;

namespace {

constexpr double kPaperRel = 1e-4;     // table values, relative
constexpr double kFlowAbs = 0.005;     // printed two-decimal flow, MW
constexpr double kPropertyTol = 1e-6;  // orderings and conservation
constexpr double kUcRel = 1e-9;        // commitment objective vs enumeration
constexpr double kLpTol = 1e-6;        // duality gap and complementary slackness
constexpr double kRuntimeSeconds = 1.0;
constexpr int kRandomScenarios = 60;
constexpr int kUcInstances = 120;
constexpr int kRandomLps = 250;

// Collects the reasons a criterion failed.
class Check {
 public:
  void near(const std::string& what, double got, double want, double rel = kPaperRel) {
    if (std::abs(got - want) > rel * std::max(1.0, std::abs(want))) fail(what, got, want);
  }
  void near_abs(const std::string& what, double got, double want, double tol) {
    if (std::abs(got - want) > tol) fail(what, got, want);
  }
  void that(bool ok, const std::string& what) {
    if (!ok) problems_.push_back(what);
  }
  bool ok() const { return problems_.empty(); }
  std::string summary() const {
    std::string s;
    for (std::size_t i = 0; i < problems_.size() && i < 4; ++i) s += (i ? "; " : "") + problems_[i];
    if (problems_.size() > 4) s += "; +" + std::to_string(problems_.size() - 4) + " more";
    return s;
  }

 private:
  void fail(const std::string& what, double got, double want) {
    std::ostringstream os;
    os << what << " = " << got << " (expected " << want << ")";
    problems_.push_back(os.str());
  }
  std::vector<std::string> problems_;
};

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (id < 10 ? " " : "") << id << "  " << title;
  if (!o.detail.empty()) std::cout << "  [" << o.detail << "]";
  std::cout << std::endl;
}

Outcome verdict(const Check& c, const std::string& ok_detail) { return {c.ok(), c.ok() ? ok_detail : c.summary()}; }

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::map<std::string, double> numeric_metrics(const fs::path& p) {
  std::map<std::string, double> m;
  for (const auto& r : read_csv(p)) {
    if (r.size() != 2) continue;
    try {
      m[r[0]] = std::stod(r[1]);
    } catch (const std::exception&) {
    }
  }
  return m;
}

int run_cli(const std::string& args, const fs::path& out_dir) {
  const std::string cmd = std::string("\"") + GRIDCLEAR_CLI_PATH + "\" " + args + " --no-timestamp --out \"" +
                          out_dir.string() + "\" >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

double surplus_of(const Network& net, std::span<const GeneratorSpec> gens, const DispatchResult& r) {
  double s = 0.0;
  for (std::size_t b = 0; b < net.bus_count(); ++b) s += net.buses()[b].wtp * r.served_load_mw(b);
  for (std::size_t g = 0; g < gens.size(); ++g) s -= gens[g].ic * r.gen_mw[g];
  return s;
}

Outcome criterion_nodal() {
  Check c;
  const auto dir = fs::temp_directory_path() / "gridclear_acceptance_1";
  fs::remove_all(dir);
  const auto t0 = std::chrono::steady_clock::now();
  const int code = run_cli("clear \"" + data_path("fourbus.scn") + "\" --scheme nodal", dir);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.that(code == 0, "exit code " + std::to_string(code));
  c.that(secs < kRuntimeSeconds, "runtime " + std::to_string(secs) + " s");

  const std::vector<double> mw{175, 100, 225, 300}, lmp{10, 25, 40, 50};
  const auto dispatch = read_csv(dir / "fourbus_nodal_dispatch.csv");
  c.that(dispatch.size() == 5, "dispatch rows");
  for (std::size_t g = 0; g + 1 < dispatch.size() && g < 4; ++g) c.near("P" + std::to_string(g + 1), std::stod(dispatch[g + 1][3]), mw[g]);
  const auto prices = read_csv(dir / "fourbus_nodal_prices.csv");
  c.that(prices.size() == 5, "price rows");
  for (std::size_t b = 0; b + 1 < prices.size() && b < 4; ++b) c.near("LMP " + prices[b + 1][0], std::stod(prices[b + 1][1]), lmp[b]);
  auto m = numeric_metrics(dir / "fourbus_nodal_summary.csv");
  c.near("cost", m["total_cost"], 26750);
  c.near("revenue", m["generator_revenue"], 28250);
  c.near("payment", m["consumer_total_payment"], 40000);
  c.near("rent", m["congestion_rent"], 11750);
  c.near("surplus", m["social_surplus"], 53250);

  // Full precision through the library.
  const auto sc = load_scenario(data_path("fourbus.scn"));
  const auto o = run_scheme(sc, MarketScheme::nodal);
  for (std::size_t g = 0; g < 4; ++g) c.near("api P" + std::to_string(g + 1), o.dispatch.gen_mw[g], mw[g]);
  for (std::size_t b = 0; b < 4; ++b) c.near("api LMP", o.prices->prices[0][b], lmp[b]);
  c.near("api rent", o.settlement->congestion_rent, 11750);
  std::ostringstream d;
  d.precision(3);
  d << "CLI " << secs << " s";
  return verdict(c, d.str());
}

Outcome criterion_zonal_infeasible() {
  Check c;
  const auto sc = load_scenario(data_path("fourbus.scn"));
  const auto o = run_scheme(sc, MarketScheme::zonal);
  const std::vector<double> mw{200, 100, 200, 300};
  for (std::size_t g = 0; g < 4; ++g) c.near("P" + std::to_string(g + 1), o.dispatch.gen_mw[g], mw[g]);
  c.near("price Z1", o.prices->price(0, "Z1"), 40);
  c.near("price Z2", o.prices->price(0, "Z2"), 50);
  const auto l13 = *sc.network.find_line("L13");
  // Independent DC flow of the zonal dispatch.
  std::vector<OracleLine> lines;
  for (std::size_t l = 0; l < sc.network.line_count(); ++l)
    lines.push_back({sc.network.from_index(l), sc.network.to_index(l), sc.network.lines()[l].reactance});
  const auto inj = net_injection(sc.network, sc.generator_specs(), o.dispatch);
  const auto flows = btheta_flows(sc.network.bus_count(), lines, inj, sc.network.slack_index());
  c.near_abs("oracle flow L13", flows[l13], 500.0 / 3.0, 1e-6);
  c.near_abs("reported flow L13", o.dispatch.line_flow_mw[l13], 166.67, kFlowAbs);
  c.that(!o.dispatch.physically_feasible, "zonal dispatch reported physically feasible");
  c.that(!o.dispatch.violations.empty() && o.dispatch.violations[0].find("L13") != std::string::npos,
         "violation does not name L13");
  const auto dir = fs::temp_directory_path() / "gridclear_acceptance_2";
  fs::remove_all(dir);
  const int code = run_cli("clear \"" + data_path("fourbus.scn") + "\" --scheme zonal", dir);
  c.that(code == 2, "exit code " + std::to_string(code));
  return verdict(c, "L13 166.67 MW > 150 MW, exit 2");
}

Outcome criterion_tie270() {
  Check c;
  auto sc = load_scenario(data_path("fourbus.scn"));
  sc.network = sc.network.with_interface_limit("TIE", 270.0);
  const auto o = run_scheme(sc, MarketScheme::zonal);
  const std::vector<double> mw{180, 90, 0, 530};
  for (std::size_t g = 0; g < 4; ++g) c.near("P" + std::to_string(g + 1), o.dispatch.gen_mw[g], mw[g]);
  c.near("price Z1", o.prices->price(0, "Z1"), 10);
  c.near("price Z2", o.prices->price(0, "Z2"), 50);
  c.near("cost", o.dispatch.total_cost, 29200);
  c.near("rent", o.settlement->congestion_rent, 10800);
  c.near("surplus", o.settlement->social_surplus, 50800);
  c.that(o.dispatch.physically_feasible, "tie-270 dispatch overloads a line");
  return verdict(c, "pro-rata split 180/90");
}

Outcome criterion_forced() {
  Check c;
  const auto sc = load_scenario(data_path("fourbus.scn"));
  const auto o = run_scheme(sc, MarketScheme::zonal_forced);
  const std::vector<double> mw{175, 100, 225, 300};
  for (std::size_t g = 0; g < 4; ++g) c.near("P" + std::to_string(g + 1), o.dispatch.gen_mw[g], mw[g]);
  c.near("price Z1", o.prices->price(0, "Z1"), 10);
  c.near("price Z2", o.prices->price(0, "Z2"), 50);
  c.near("uplift", o.settlement->total_uplift, 6750);
  c.near("consumer total", o.settlement->consumer_total_payment, 46750);
  c.near("rent", o.settlement->congestion_rent, 20000);
  c.near("surplus", o.settlement->social_surplus, 53250);
  return verdict(c, "P3 uplift 6750");
}

Outcome criterion_twobus() {
  Check c;
  const auto sc = load_scenario(data_path("twobus.scn"));
  const auto cp = run_scheme(sc, MarketScheme::copper_plate);
  c.near("copper SMP", cp.smp->smp[0], 90);
  double area_a = 0.0, area_b = 0.0;
  for (std::size_t g = 0; g < sc.generators.size(); ++g)
    (sc.generators[g].spec.bus_id == "A" ? area_a : area_b) += cp.dispatch.gen_mw[g];
  c.near("copper area A", area_a, 700);
  c.near("copper area B", area_b, 300);
  const auto uni = run_scheme(sc, MarketScheme::uniform);
  c.near("constrained SMP", uni.smp->smp[0], 100);
  const auto nodal = run_scheme(sc, MarketScheme::nodal);
  c.near("nodal price A", nodal.prices->price(0, "A"), 75);
  c.near("nodal price B", nodal.prices->price(0, "B"), 100);
  return verdict(c, "90 -> 100, price_A 75");
}

Outcome criterion_surplus_ordering() {
  Check c;
  std::mt19937_64 rng(20240601);
  int scenarios = 0, forced_checked = 0;
  for (int trial = 0; trial < kRandomScenarios; ++trial) {
    const auto rc = random_case(rng, 10);
    const ConstraintRegime nodal_reg{"N", ClearingMode::nodal, "ALL", true, 0, 0};
    const ConstraintRegime zonal_reg{"Z", ClearingMode::zonal, "ALL", true, 0, 0};
    const auto n = clear_nodal(rc.net, rc.gens, nodal_reg);
    const auto z = clear_zonal(rc.net, rc.gens, zonal_reg);
    const auto cp = clear_copper_plate(rc.net, rc.gens);
    if (!n.feasible || !z.feasible || !cp.feasible) {
      c.that(false, "trial " + std::to_string(trial) + " did not clear");
      continue;
    }
    ++scenarios;
    const double tol = kPropertyTol * std::max(1.0, std::abs(n.objective_value));
    c.that(cp.objective_value <= z.objective_value + tol, "copper > zonal in trial " + std::to_string(trial));
    c.that(z.objective_value <= n.objective_value + tol, "zonal > nodal in trial " + std::to_string(trial));
    const double sn = surplus_of(rc.net, rc.gens, n);

    // Operator bounds: the nodal schedule itself, then random pins on single units.
    std::vector<std::vector<GeneratorSpec>> variants;
    auto pinned = rc.gens;
    for (std::size_t g = 0; g < pinned.size(); ++g) pinned[g].forced_min = pinned[g].forced_max = n.gen_mw[g];
    variants.push_back(pinned);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 4; ++k) {
      auto v = rc.gens;
      const auto g = std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng);
      const double level = std::round(v[g].p_max * u(rng));
      if (u(rng) < 0.5) v[g].forced_min = level; else v[g].forced_max = level;
      variants.push_back(std::move(v));
    }
    for (const auto& v : variants) {
      const auto f = clear_with_forced_bounds(rc.net, v, zonal_reg);
      if (!f.feasible || !f.physically_feasible) continue;
      ++forced_checked;
      c.that(sn >= surplus_of(rc.net, v, f) - tol, "forced surplus above nodal in trial " + std::to_string(trial));
    }
  }
  c.that(scenarios >= 50, "only " + std::to_string(scenarios) + " scenarios");
  return verdict(c, std::to_string(scenarios) + " scenarios, " + std::to_string(forced_checked) +
                        " feasible forced-bound clearings, 0 violations");
}

Outcome criterion_uc_oracle() {
  Check c;
  std::mt19937_64 rng(777);
  int compared = 0, feasible = 0;
  for (int trial = 0; trial < kUcInstances; ++trial) {
    const auto inst = random_uc_instance(rng, 4, 4);
    std::vector<OracleUcUnit> units;
    for (const auto& u : inst.units)
      units.push_back({u.spec.p_min, u.spec.p_max, u.spec.ic, u.spec.nlc, u.spec.suc, u.min_up_h, u.min_down_h,
                       u.initially_on, u.initial_hours});
    std::vector<double> load;
    for (const auto& h : inst.loads) load.push_back(h[0]);
    const auto ref = brute_force_uc(units, load, std::vector<double>(load.size(), inst.reserve_mw));
    const ConstraintRegime reg{"UC", ClearingMode::copper_plate, kAllLinesProfile, true, inst.reserve_mw, 0.0};
    const auto s = solve_uc(inst.net, inst.units, inst.loads, reg);
    ++compared;
    if (s.feasible != ref.has_value()) {
      c.that(false, "feasibility disagrees in instance " + std::to_string(trial));
      continue;
    }
    if (!ref) continue;
    ++feasible;
    c.near("instance " + std::to_string(trial) + " cost", s.total_cost, ref->cost, kUcRel);
  }
  c.that(compared >= 100, "fewer than 100 instances");
  return verdict(c, std::to_string(compared) + " instances (" + std::to_string(feasible) +
                        " feasible) equal to enumeration at 1e-9 relative");
}

Outcome criterion_dauc_ruc() {
  Check c;
  const auto sc = load_scenario(data_path("fivebus_ruc.scn"));
  const auto o = run_dauc_ruc(sc);
  c.that(o.failure.empty(), o.failure);
  const auto& r = o.result;
  c.that(r.dauc.feasible && r.ruc.feasible, "a pass is infeasible");
  if (!c.ok()) return verdict(c, "");
  c.that(r.ruc.total_cost >= r.dauc.total_cost - kPropertyTol, "RUC cheaper than DAUC");
  for (std::size_t t = 0; t < r.dauc.hours; ++t) {
    double net = 0.0;
    for (const auto& g : r.record.delta_mw) net += g[t];
    c.near_abs("hour " + std::to_string(t) + " net redispatch", net, 0.0, kPropertyTol);
  }
  std::map<std::string, RedispatchZoneRow> zone;
  for (const auto& row : o.table.rows) zone[row.zone] = row;
  c.that(zone["A"].constrained_off_mwh > zone["A"].constrained_on_mwh, "export zone A is not COFF-dominant");
  c.that(zone["B"].constrained_on_mwh > zone["B"].constrained_off_mwh, "import zone B is not CON-dominant");
  std::ostringstream d;
  d << "cost " << r.dauc.total_cost << " -> " << r.ruc.total_cost << "; A off " << zone["A"].constrained_off_mwh
    << " / on " << zone["A"].constrained_on_mwh << "; B on " << zone["B"].constrained_on_mwh << " / off "
    << zone["B"].constrained_off_mwh << " MWh";
  return verdict(c, d.str());
}

Outcome criterion_bidding() {
  Check c;
  const auto sc = load_scenario(data_path("twobus.scn"));
  const auto gens = sc.generator_specs();
  const auto& req = sc.run.bid_deviations.at(0);
  const auto rows = run_bid_deviations(sc, {req});
  const auto g = *sc.find_generator(req.gen_id);

  // Truthful and deviated clearings re-solved here; costs always at true ic.
  auto deviated = gens;
  deviated[g].ic = req.offered_ic;
  auto true_cost = [&](const DispatchResult& r) {
    double s = 0.0;
    for (std::size_t k = 0; k < gens.size(); ++k) s += gens[k].ic * r.gen_mw[k];
    return s;
  };
  for (const auto& d : rows) {
    const bool nodal = d.scheme == PricingScheme::nodal;
    const auto reg = sc.regime_for(nodal ? MarketScheme::nodal : MarketScheme::uniform);
    const auto truthful = clear(sc.network, gens, reg);
    const auto dev = clear(sc.network, deviated, reg);
    const double price = nodal ? dev.price_at_bus(sc.network.bus_index(gens[g].bus_id))
                               : form_smp(sc.network, deviated, dev).smp[0];
    const double profit = (price - gens[g].ic) * dev.gen_mw[g];
    const double welfare = true_cost(truthful) - true_cost(dev);
    const std::string tag = nodal ? "nodal" : "uniform";
    c.near(tag + " profit", d.deviated_profit, profit, 1e-9);
    c.near(tag + " welfare delta", d.welfare_delta(), welfare, 1e-9);
    c.that(welfare <= kPropertyTol, tag + " welfare delta positive");
    if (nodal)
      c.that(profit <= kPropertyTol, "nodal deviation is profitable");
    else
      c.that(profit > 0.0, "uniform deviation is not profitable");
  }
  std::ostringstream d;
  d << "uniform profit " << rows[0].deviated_profit << ", nodal profit " << rows[1].deviated_profit
    << ", welfare delta " << rows[0].welfare_delta();
  return verdict(c, d.str());
}

Outcome criterion_lp_duality() {
  Check c;
  std::mt19937_64 rng(4242);
  double worst_gap = 0.0, worst_cs = 0.0;
  int solved = 0;
  bool deterministic = true;
  for (int trial = 0; trial < kRandomLps; ++trial) {
    const auto lp = random_feasible_lp(rng, 30);
    const auto a = lp::solve(lp);
    const auto b = lp::solve(lp);
    if (a.status != lp::Status::optimal) {
      c.that(false, "LP " + std::to_string(trial) + " not optimal");
      continue;
    }
    ++solved;
    const auto chk = check_duality(lp, a);
    worst_gap = std::max(worst_gap, chk.relative_gap);
    worst_cs = std::max(worst_cs, chk.complementary_slackness);
    c.that(chk.relative_gap <= kLpTol, "gap in LP " + std::to_string(trial));
    c.that(chk.complementary_slackness <= kLpTol, "slackness in LP " + std::to_string(trial));
    c.that(chk.primal_infeasibility <= kLpTol && chk.dual_infeasibility <= kLpTol,
           "infeasible certificate in LP " + std::to_string(trial));
    auto same = [](const std::vector<double>& x, const std::vector<double>& y) {
      return x.size() == y.size() && std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0;
    };
    if (!same(a.primal, b.primal) || !same(a.duals, b.duals) || !same(a.reduced_costs, b.reduced_costs))
      deterministic = false;
  }
  c.that(solved >= 200, "fewer than 200 optimal LPs");
  c.that(deterministic, "repeated solves differ");
  std::ostringstream d;
  d << solved << " LPs, max gap " << worst_gap << ", max slackness " << worst_cs << ", byte-identical reruns";
  return verdict(c, d.str());
}

}  // namespace

int main() {
  std::cout << "gridclear acceptance\n";
  report(1, "four-bus nodal reproduction via CLI", criterion_nodal);
  report(2, "four-bus zonal dispatch is physically infeasible", criterion_zonal_infeasible);
  report(3, "270 MW tie case", criterion_tie270);
  report(4, "forced-bound congestion management", criterion_forced);
  report(5, "two-area uniform and nodal prices", criterion_twobus);
  report(6, "surplus and cost ordering on random networks", criterion_surplus_ordering);
  report(7, "unit commitment equals exhaustive enumeration", criterion_uc_oracle);
  report(8, "DAUC/RUC redispatch asymmetry", criterion_dauc_ruc);
  report(9, "strategic under-bidding", criterion_bidding);
  report(10, "LP duality and determinism", criterion_lp_duality);
  const int before = failures;
  report(11, "national-scale magnitudes replaced by property checks 6-9", [&] {
    return Outcome{before == 0, before == 0 ? "informational; substitutes hold"
                                            : "informational; a substitute criterion failed"};
  });
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
