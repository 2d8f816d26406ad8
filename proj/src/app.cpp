#include "gridclear/app.hpp"

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gridclear/analysis.hpp"
#include "gridclear/error.hpp"
#include "gridclear/market.hpp"
#include "gridclear/report.hpp"
#include "gridclear/scenario_io.hpp"

namespace gridclear {

namespace {

struct CommonFlags {
  std::string input;
  std::string out_dir;
  std::string format = "csv";
  bool no_timestamp = false;
  double tolerance = 0.0;  // 0 keeps the solver defaults
  std::vector<std::string> ttc;
};

void add_common(CLI::App* cmd, CommonFlags& f, const std::string& input_help) {
  cmd->add_option("input", f.input, input_help)->required();
  cmd->add_option("--out", f.out_dir, "Output directory (default: $GRIDCLEAR_OUT, else the current directory)");
  cmd->add_option("--format", f.format, "Report format")->check(CLI::IsMember({"csv", "md"}));
  cmd->add_flag("--no-timestamp", f.no_timestamp, "Omit the generated-at header line");
  cmd->add_option("--tolerance", f.tolerance, "Solver feasibility and optimality tolerance")
      ->check(CLI::PositiveNumber);
}

std::filesystem::path output_dir(const CommonFlags& f) {
  if (!f.out_dir.empty()) return f.out_dir;
  if (const char* env = std::getenv("GRIDCLEAR_OUT"); env && *env) return env;
  return ".";
}

ReportFormat format_of(const CommonFlags& f) { return f.format == "md" ? ReportFormat::markdown : ReportFormat::csv; }

std::string stem_of(const std::string& path) { return std::filesystem::path(path).stem().string(); }

lp::Tolerances tolerances_of(const CommonFlags& f) {
  lp::Tolerances t;
  if (f.tolerance > 0.0) t.feasibility = t.optimality = f.tolerance;
  return t;
}

// Interface limit overrides given as ID=MW.
Scenario load_with_overrides(const CommonFlags& f) {
  auto sc = load_scenario(f.input);
  for (const auto& spec : f.ttc) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--ttc", "expected ID=MW, got '" + spec + "'");
    double mw = 0.0;
    try {
      mw = std::stod(spec.substr(eq + 1));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--ttc", "bad number in '" + spec + "'");
    }
    sc.network = sc.network.with_interface_limit(spec.substr(0, eq), mw);
  }
  return sc;
}

void announce(std::ostream& out, const std::vector<std::filesystem::path>& written) {
  for (const auto& p : written) out << "wrote " << p.string() << "\n";
}

int cmd_clear(const CommonFlags& f, const std::string& scheme_name, std::ostream& out, std::ostream& err) {
  const auto sc = load_with_overrides(f);
  std::optional<MarketScheme> scheme;
  if (scheme_name.empty()) {
    scheme = sc.run.schemes.empty() ? MarketScheme::nodal : sc.run.schemes.front();
  } else {
    scheme = parse_market_scheme(scheme_name);
  }
  DispatchOptions opts;
  opts.tolerances = tolerances_of(f);
  const auto outcome = run_scheme(sc, *scheme, opts);
  announce(out, write_reports(output_dir(f), clear_reports(sc, outcome, format_of(f), stem_of(f.input)),
                              !f.no_timestamp));
  if (outcome.complete()) return kExitOk;
  for (const auto& v : outcome.dispatch.violations) err << "infeasible: " << v << "\n";
  if (!outcome.failure.empty()) err << "infeasible: " << outcome.failure << "\n";
  return kExitInfeasible;
}

int cmd_compare(const CommonFlags& f, const std::vector<std::string>& scheme_names, std::ostream& out,
                std::ostream& err) {
  const auto sc = load_with_overrides(f);
  std::vector<MarketScheme> schemes;
  for (const auto& s : scheme_names) schemes.push_back(*parse_market_scheme(s));
  if (schemes.empty()) schemes = sc.run.schemes;
  if (schemes.empty()) throw CLI::ValidationError("--scheme", "no schemes to compare");
  DispatchOptions opts;
  opts.tolerances = tolerances_of(f);
  std::vector<SchemeOutcome> outcomes;
  for (auto s : schemes) outcomes.push_back(run_scheme(sc, s, opts));
  const auto written =
      write_reports(output_dir(f), compare_reports(sc, outcomes, format_of(f), stem_of(f.input)), !f.no_timestamp);
  out << compare_table_markdown(sc, outcomes);
  announce(out, written);
  bool all = true;
  for (const auto& o : outcomes) {
    if (o.complete()) continue;
    all = false;
    for (const auto& v : o.dispatch.violations) err << "infeasible (" << to_string(o.scheme) << "): " << v << "\n";
    if (!o.failure.empty()) err << "infeasible (" << to_string(o.scheme) << "): " << o.failure << "\n";
  }
  return all ? kExitOk : kExitInfeasible;
}

int cmd_daucruc(const CommonFlags& f, std::ostream& out, std::ostream& err) {
  const auto sc = load_with_overrides(f);
  UcOptions opts;
  opts.tolerances = tolerances_of(f);
  const auto outcome = run_dauc_ruc(sc, opts);
  announce(out, write_reports(output_dir(f), daucruc_reports(sc, outcome, format_of(f), stem_of(f.input)),
                              !f.no_timestamp));
  if (outcome.failure.empty()) return kExitOk;
  err << "infeasible: " << outcome.failure << "\n";
  return kExitInfeasible;
}

int cmd_bidding(const CommonFlags& f, const std::string& gen, std::optional<double> offer, std::ostream& out) {
  const auto sc = load_with_overrides(f);
  std::vector<BidDeviationRequest> reqs = sc.run.bid_deviations;
  if (!gen.empty()) {
    if (!offer) throw CLI::ValidationError("--offer", "--gen needs --offer");
    if (!sc.find_generator(gen)) throw ScenarioError({{"E010", "--gen", "unknown generator '" + gen + "'"}});
    reqs = {{gen, *offer}};
  }
  if (reqs.empty()) throw CLI::ValidationError("--gen", "scenario lists no bid deviations; pass --gen and --offer");
  const auto rows = run_bid_deviations(sc, reqs);
  announce(out, write_reports(output_dir(f), bidding_reports(sc, rows, format_of(f), stem_of(f.input)),
                              !f.no_timestamp));
  return kExitOk;
}

int cmd_stats(const CommonFlags& f, std::ostream& out) {
  const auto series = load_price_series_csv(f.input);
  const auto stats = price_stats(series.prices);
  out << "mean " << fixed2(stats.mean) << "\nmedian " << fixed2(stats.median) << "\np10 " << fixed2(stats.p10)
      << "\np90 " << fixed2(stats.p90) << "\n";
  announce(out, write_reports(output_dir(f), stats_reports(series, stats, format_of(f), stem_of(f.input)),
                              !f.no_timestamp));
  return kExitOk;
}

int cmd_validate(const CommonFlags& f, std::ostream& out) {
  const auto sc = load_scenario(f.input);
  out << "ok: " << f.input << " (" << sc.network.bus_count() << " buses, " << sc.network.line_count() << " lines, "
      << sc.generators.size() << " generators, " << sc.run.horizon_h << " h)\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Electricity market clearing, pricing and settlement over scenario files", "gridclear"};
  app.require_subcommand(1);
  const auto schemes_check = CLI::IsMember({"nodal", "zonal", "zonal_forced", "uniform", "copper_plate"});

  CommonFlags f;
  std::string scheme;
  std::vector<std::string> schemes;
  std::string gen;
  std::optional<double> offer;

  auto* clear = app.add_subcommand("clear", "Clear one scheme and write prices and settlement");
  add_common(clear, f, "Scenario file");
  clear->add_option("--scheme", scheme, "Market scheme (default: first scheme in the scenario)")->check(schemes_check);
  clear->add_option("--ttc", f.ttc, "Override an interface limit, ID=MW");

  auto* compare = app.add_subcommand("compare", "Compare schemes side by side");
  add_common(compare, f, "Scenario file");
  compare->add_option("--scheme", schemes, "Schemes to compare (default: the scenario's list)")->check(schemes_check);
  compare->add_option("--ttc", f.ttc, "Override an interface limit, ID=MW");

  auto* daucruc = app.add_subcommand("daucruc", "Day-ahead and reliability commitment with redispatch settlement");
  add_common(daucruc, f, "Scenario file");

  auto* bidding = app.add_subcommand("bidding", "Unilateral bid deviation under uniform and nodal pricing");
  add_common(bidding, f, "Scenario file");
  bidding->add_option("--gen", gen, "Deviating generator (default: the scenario's bid_deviations)");
  bidding->add_option("--offer", offer, "Offered incremental cost");

  auto* stats = app.add_subcommand("stats", "Order statistics of a price series CSV");
  add_common(stats, f, "Price series CSV (timestamp,price)");

  auto* validate = app.add_subcommand("validate", "Check a scenario file and list every issue");
  validate->add_option("input", f.input, "Scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*clear) return cmd_clear(f, scheme, out, err);
    if (*compare) return cmd_compare(f, schemes, out, err);
    if (*daucruc) return cmd_daucruc(f, out, err);
    if (*bidding) return cmd_bidding(f, gen, offer, out);
    if (*stats) return cmd_stats(f, out);
    if (*validate) return cmd_validate(f, out);
  } catch (const ScenarioError& e) {
    for (const auto& i : e.issues()) err << "error: " << i.to_string() << "\n";
    return kExitUsage;
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace gridclear
