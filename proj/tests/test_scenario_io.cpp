#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "fixtures.hpp"
#include "gridclear/error.hpp"
#include "gridclear/market.hpp"
#include "gridclear/report.hpp"
#include "gridclear/scenario_io.hpp"

using namespace gridclear;
using namespace gridclear::testing;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json fourbus_json() { return json::parse(read_file(data_path("fourbus.scn")), nullptr, true, true); }

// Applies an edit to the bundled four-bus file and returns the issues raised.
ScenarioError issues_after(const std::function<void(json&)>& edit) {
  auto j = fourbus_json();
  edit(j);
  try {
    parse_scenario(j.dump());
  } catch (const ScenarioError& e) {
    return e;
  }
  FAIL("edited scenario was accepted");
  return ScenarioError({});
}

}  // namespace

TEST_CASE("bundled four-bus scenario loads verbatim") {
  const auto sc = load_scenario(data_path("fourbus.scn"));
  const auto& net = sc.network;
  REQUIRE(net.bus_count() == 4);
  CHECK(net.slack_bus() == "4");
  CHECK(net.zones() == std::vector<std::string>{"Z1", "Z2"});
  CHECK(net.lines()[1].id == "L13");
  CHECK(net.lines()[1].limit_mw == 150.0);
  CHECK(net.buses()[3].load_mw == 800.0);
  const std::vector<double> cap{200, 100, 800, 800}, ic{10, 10, 40, 50};
  REQUIRE(sc.generators.size() == 4);
  for (std::size_t g = 0; g < 4; ++g) {
    CHECK(sc.generators[g].spec.p_max == cap[g]);
    CHECK(sc.generators[g].spec.ic == ic[g]);
    CHECK_FALSE(sc.generators[g].spec.forced_min.has_value());
  }
  CHECK(sc.generator_specs()[2].forced_min == 225.0);
  CHECK(sc.run.schemes ==
        std::vector<MarketScheme>{MarketScheme::nodal, MarketScheme::zonal, MarketScheme::zonal_forced});
  CHECK(sc.regime_for(MarketScheme::nodal).name == "NODAL");
  CHECK(sc.regime_for(MarketScheme::zonal_forced).name == "ZONAL");
  const auto cp = sc.regime_for(MarketScheme::copper_plate);
  CHECK(cp.mode == ClearingMode::copper_plate);
  CHECK(cp.monitored_profile == kAllLinesProfile);
}

TEST_CASE("load, serialize, load is the identity") {
  for (const char* name : {"fourbus.scn", "twobus.scn", "fivebus_ruc.scn"}) {
    CAPTURE(name);
    const auto first = load_scenario(data_path(name));
    const auto text = serialize_scenario(first);
    const auto second = parse_scenario(text);
    CHECK(serialize_scenario(second) == text);
    CHECK(second.network.bus_count() == first.network.bus_count());
    CHECK(second.hourly_bus_loads() == first.hourly_bus_loads());
    CHECK(second.run.horizon_h == first.run.horizon_h);
    for (std::size_t g = 0; g < first.generators.size(); ++g) {
      CHECK(second.generators[g].spec.p_min == first.generators[g].spec.p_min);
      CHECK(second.generators[g].min_up_h == first.generators[g].min_up_h);
      CHECK(second.generators[g].initially_on == first.generators[g].initially_on);
    }
  }
}

TEST_CASE("hourly loads follow profiles") {
  const auto sc = load_scenario(data_path("fivebus_ruc.scn"));
  const auto loads = sc.hourly_bus_loads();
  REQUIRE(loads.size() == 3);
  CHECK(loads[1][4] == 330.0);
  CHECK(loads[1][3] == 80.0);
}

TEST_CASE("parse errors carry line and column") {
  try {
    parse_scenario("{\n  \"format\": \"gridclear-scenario/1\",\n  \"network\": [1,,2]\n}");
    FAIL("expected parse error");
  } catch (const ScenarioError& e) {
    REQUIRE(e.issues().size() == 1);
    CHECK(e.issues()[0].code == "E001");
    CHECK(e.issues()[0].message.find("line 3, column 17") != std::string::npos);
    CHECK(e.code() == ErrorCode::scenario);
  }
}

TEST_CASE("every validation code is reachable") {
  CHECK(issues_after([](json& j) { j.erase("generators"); }).has_code("E002"));
  CHECK(issues_after([](json& j) { j["network"]["colour"] = "blue"; }).has_code("E002"));
  CHECK(issues_after([](json& j) { j["network"]["buses"] = json::array(); }).has_code("E003"));
  CHECK(issues_after([](json& j) { j["generators"][1]["id"] = "P1"; }).has_code("E004"));
  CHECK(issues_after([](json& j) { j["network"]["lines"][0]["to"] = "9"; }).has_code("E005"));
  CHECK(issues_after([](json& j) { j["network"]["slack_bus"] = "9"; }).has_code("E006"));
  CHECK(issues_after([](json& j) { j["network"]["lines"][0]["reactance"] = -0.1; }).has_code("E007"));
  CHECK(issues_after([](json& j) {
          j["network"]["lines"].erase(3);
          j["network"]["interfaces"] = json::array();
        }).has_code("E008"));
  CHECK(issues_after([](json& j) { j["regimes"][0]["monitored_profile"] = "NOWHERE"; }).has_code("E009"));
  CHECK(issues_after([](json& j) { j["run"]["forced_bounds"][0]["generator"] = "P9"; }).has_code("E010"));
  CHECK(issues_after([](json& j) { j["regimes"][0]["mode"] = "hybrid"; }).has_code("E011"));
  CHECK(issues_after([](json& j) { j["run"]["horizon_h"] = 2; j["loads"] = {{{"bus", "4"}, {"mw", {800}}}}; })
            .has_code("E012"));
  CHECK(issues_after([](json& j) { j["network"]["interfaces"][0]["members"] = json::array(); }).has_code("E013"));
  CHECK(issues_after([](json& j) { j["network"]["lines"][0]["to"] = "1"; }).has_code("E014"));
  CHECK(issues_after([](json& j) { j["run"]["ruc_regime"] = "RUC"; }).has_code("E015"));
  CHECK(issues_after([](json& j) { j["format"] = "gridclear-scenario/9"; }).has_code("E016"));
  CHECK(issues_after([](json& j) { j["generators"][0]["p_min_mw"] = 500; }).has_code("E017"));
  CHECK(issues_after([](json& j) { j["run"]["forced_bounds"][0]["min_mw"] = 900; }).has_code("E017"));
  CHECK(issues_after([](json& j) { j["network"]["buses"][3]["wtp"] = 0; }).has_code("E018"));
}

TEST_CASE("validation reports every issue, not just the first") {
  const auto e = issues_after([](json& j) {
    j["generators"][0]["bus"] = "ghost";
    j["generators"][2]["id"] = "P2";
    j["regimes"][1]["mode"] = "sideways";
  });
  CHECK(e.issues().size() >= 3);
  CHECK(e.has_code("E004"));
  CHECK(e.has_code("E011"));
  bool named = false;
  for (const auto& i : e.issues())
    if (i.code == "E005" && i.message.find("ghost") != std::string::npos && i.path == "generators[0].bus")
      named = true;
  CHECK(named);
}

TEST_CASE("missing or unreadable files are io errors") {
  try {
    load_scenario(data_path("does_not_exist.scn"));
    FAIL("expected io error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
  }
}

TEST_CASE("fixed-precision formatting") {
  CHECK(fixed2(166.6666667) == "166.67");
  CHECK(fixed2(-0.001) == "0.00");
  CHECK(fixed2(53250.0) == "53250.00");
  CHECK(fixed2(-12.345) == "-12.35");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("plain") == "plain");
}

TEST_CASE("report files") {
  const auto sc = load_scenario(data_path("fourbus.scn"));
  std::vector<SchemeOutcome> outcomes;
  for (auto s : sc.run.schemes) outcomes.push_back(run_scheme(sc, s));

  const auto md = compare_table_markdown(sc, outcomes);
  for (const char* row : {"Generator dispatch", "Market price", "Generator revenue", "Consumer payment",
                          "Congestion rent", "Social surplus"})
    CHECK(md.find(row) != std::string::npos);
  CHECK(md.find("| Congestion rent | 11750.00 | Not Available | 20000.00 |") != std::string::npos);
  CHECK(md.find("(175.00, 100.00, 225.00, 300.00)") != std::string::npos);

  const auto dir = std::filesystem::temp_directory_path() / "gridclear_report_test";
  std::filesystem::remove_all(dir);
  const auto files = compare_reports(sc, outcomes, ReportFormat::csv, "fourbus");
  const auto written = write_reports(dir, files, false);
  REQUIRE(written.size() == 1);
  CHECK(read_file(written[0].string()) == files[0].content);

  // CSV values re-parse to the computed numbers within the printed precision.
  std::istringstream in(files[0].content);
  std::string line;
  bool saw_rent = false;
  while (std::getline(in, line)) {
    if (line.rfind("congestion_rent,", 0) != 0) continue;
    saw_rent = true;
    const auto first = line.substr(16, line.find(',', 16) - 16);
    CHECK(std::abs(std::stod(first) - outcomes[0].settlement->congestion_rent) <= 0.005);
    CHECK(line.find("Not Available") != std::string::npos);
  }
  CHECK(saw_rent);

  const auto stamped = write_reports(dir, files, true);
  CHECK(read_file(stamped[0].string()).rfind("# generated ", 0) == 0);

  CHECK_THROWS_AS(write_reports(dir, {}, false), Error);
  std::ofstream(dir / "blocker") << "x";
  CHECK_THROWS_AS(write_reports(dir / "blocker" / "sub", files, false), Error);
  std::filesystem::remove_all(dir);
}
