#include "fixtures.hpp"

#include <algorithm>
#include <cmath>

namespace gridclear::testing {

std::string data_path(const std::string& name) { return std::string(GRIDCLEAR_DATA_DIR) + "/" + name; }

Network four_bus_network(double tie_ttc_mw) {
  std::vector<Bus> buses{{"1", "Z1", 0.0, 100.0},
                         {"2", "Z1", 0.0, 100.0},
                         {"3", "Z1", 0.0, 100.0},
                         {"4", "Z2", 800.0, 100.0}};
  const std::set<std::string> tags{"NODAL"};
  std::vector<Line> lines{{"L12", "1", "2", 0.1, 1000.0, tags},
                          {"L13", "1", "3", 0.1, 150.0, tags},
                          {"L23", "2", "3", 0.1, 1000.0, tags},
                          {"L34", "3", "4", 0.1, 500.0, tags}};
  std::vector<Interface> itfs{{"TIE", {{"L34", 1}}, tie_ttc_mw}};
  return Network(buses, lines, itfs, "4");
}

std::vector<GeneratorSpec> four_bus_generators() {
  return {
      {"P1", "1", 0.0, 200.0, 10.0, 0.0, 0.0, {}, {}, true},
      {"P2", "2", 0.0, 100.0, 10.0, 0.0, 0.0, {}, {}, true},
      {"P3", "3", 0.0, 800.0, 40.0, 0.0, 0.0, {}, {}, true},
      {"P4", "4", 0.0, 800.0, 50.0, 0.0, 0.0, {}, {}, true},
  };
}

ConstraintRegime four_bus_nodal_regime() {
  return {"NODAL", ClearingMode::nodal, "NODAL", true, 0.0, 0.0};
}

ConstraintRegime four_bus_zonal_regime() {
  return {"ZONAL", ClearingMode::zonal, "NODAL", true, 0.0, 0.0};
}

Network two_bus_network() {
  std::vector<Bus> buses{{"A", "A", 500.0, 200.0}, {"B", "B", 500.0, 200.0}};
  std::vector<Line> lines{{"AB", "A", "B", 0.1, 100.0, {"NODAL"}}};
  std::vector<Interface> itfs{{"TTC", {{"AB", 1}}, 100.0}};
  return Network(buses, lines, itfs, "B");
}

std::vector<GeneratorSpec> two_bus_generators() {
  auto unit = [](std::string id, std::string bus, double cap, double ic) {
    return GeneratorSpec{std::move(id), std::move(bus), 0.0, cap, ic, 0.0, 0.0, {}, {}, true};
  };
  return {unit("A1", "A", 400, 20), unit("A2", "A", 150, 60), unit("A3", "A", 100, 75),
          unit("A4", "A", 130, 90), unit("A5", "A", 100, 95), unit("B1", "B", 300, 80),
          unit("B2", "B", 120, 100)};
}

ConstraintRegime two_bus_zonal_regime() { return {"ZONAL", ClearingMode::zonal, "NODAL", true, 0.0, 0.0}; }
ConstraintRegime two_bus_nodal_regime() { return {"NODAL", ClearingMode::nodal, "NODAL", true, 0.0, 0.0}; }

RandomCase random_case(std::mt19937_64& rng, std::size_t max_buses) {
  std::uniform_int_distribution<std::size_t> nbus(2, std::max<std::size_t>(2, max_buses));
  const std::size_t n = nbus(rng);
  std::uniform_int_distribution<std::size_t> nzone(1, std::min<std::size_t>(3, n));
  const std::size_t zones = nzone(rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Bus> buses;
  double total_load = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    // First `zones` buses seed each zone so none is empty.
    const std::size_t z = b < zones ? b : std::uniform_int_distribution<std::size_t>(0, zones - 1)(rng);
    const double load = unit(rng) < 0.6 ? std::round(20.0 + 180.0 * unit(rng)) : 0.0;
    total_load += load;
    buses.push_back({"b" + std::to_string(b), "z" + std::to_string(z), load, 1000.0});
  }
  if (total_load == 0.0) {
    buses.back().load_mw = 100.0;
    total_load = 100.0;
  }

  std::vector<Line> lines;
  auto add_line = [&](std::size_t i, std::size_t j) {
    const double x = 0.05 + 0.45 * unit(rng);
    const double limit = std::round(40.0 + 260.0 * unit(rng));
    lines.push_back({"l" + std::to_string(lines.size()), buses[i].id, buses[j].id, x, limit, {"ALL"}});
  };
  for (std::size_t b = 1; b < n; ++b) add_line(std::uniform_int_distribution<std::size_t>(0, b - 1)(rng), b);
  const std::size_t extra = std::uniform_int_distribution<std::size_t>(0, n)(rng);
  for (std::size_t e = 0; e < extra; ++e) {
    const auto i = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    const auto j = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    if (i != j) add_line(i, j);
  }

  std::vector<Interface> itfs;
  if (zones >= 2) {
    Interface itf{"if01", {}, std::round(30.0 + 200.0 * unit(rng))};
    for (const auto& ln : lines) {
      const auto zf = buses[std::stoul(ln.from_bus.substr(1))].zone_id;
      const auto zt = buses[std::stoul(ln.to_bus.substr(1))].zone_id;
      if (zf == "z0" && zt == "z1") itf.members.push_back({ln.id, 1});
      if (zf == "z1" && zt == "z0") itf.members.push_back({ln.id, -1});
    }
    if (!itf.members.empty()) itfs.push_back(std::move(itf));
  }

  std::vector<GeneratorSpec> gens;
  double cap = 0.0;
  while (cap < 1.6 * total_load || gens.size() < 2) {
    const auto b = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    const double pmax = std::round(30.0 + 220.0 * unit(rng));
    const double ic = std::round(5.0 + 95.0 * unit(rng));
    gens.push_back({"g" + std::to_string(gens.size()), buses[b].id, 0.0, pmax, ic, 0.0, 0.0, {}, {}, true});
    cap += pmax;
  }
  return {Network(buses, lines, itfs, buses[0].id), gens};
}

UcInstance random_uc_instance(std::mt19937_64& rng, std::size_t max_units, std::size_t max_hours) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const auto nu = static_cast<std::size_t>(pick(1, static_cast<int>(max_units)));
  const auto nh = static_cast<std::size_t>(pick(1, static_cast<int>(max_hours)));
  std::vector<UcGenerator> units;
  double cap = 0.0;
  for (std::size_t u = 0; u < nu; ++u) {
    UcGenerator g;
    const double pmax = 10.0 * pick(3, 15);
    g.spec = {"u" + std::to_string(u), "s", 10.0 * pick(0, 2), pmax, static_cast<double>(pick(5, 60)),
              10.0 * pick(0, 30), 50.0 * pick(0, 20), {}, {}, true};
    g.min_up_h = pick(1, 3);
    g.min_down_h = pick(1, 3);
    g.initially_on = pick(0, 1) == 1;
    g.initial_hours = pick(1, 3);
    cap += pmax;
    units.push_back(std::move(g));
  }
  std::vector<std::vector<double>> loads;
  for (std::size_t t = 0; t < nh; ++t) loads.push_back({std::round(cap * (0.15 + 0.6 * std::uniform_real_distribution<double>(0, 1)(rng)))});
  const double reserve = pick(0, 1) == 1 ? 10.0 * pick(1, 4) : 0.0;
  return {Network({{"s", "Z", loads[0][0], 1000.0}}, {}, {}, "s"), units, loads, reserve};
}

}  // namespace gridclear::testing
