#pragma once

#include <random>
#include <string>
#include <vector>

#include "gridclear/commitment.hpp"
#include "gridclear/dispatch.hpp"
#include "gridclear/grid_model.hpp"

namespace gridclear::testing {

std::string data_path(const std::string& name);

// Four-bus system: buses 1-3 meshed in zone Z1, tie line 3->4 into zone Z2,
// all 800 MW of load at bus 4.
Network four_bus_network(double tie_ttc_mw = 500.0);
std::vector<GeneratorSpec> four_bus_generators();
ConstraintRegime four_bus_nodal_regime();
ConstraintRegime four_bus_zonal_regime();

// Two-area system: exporting area A, importing area B, 100 MW interface.
Network two_bus_network();
std::vector<GeneratorSpec> two_bus_generators();
ConstraintRegime two_bus_zonal_regime();
ConstraintRegime two_bus_nodal_regime();

struct RandomCase {
  Network net;
  std::vector<GeneratorSpec> gens;
};

/// Connected network with 2..max_buses buses, 1..3 zones, one interface
/// between the first two zones when they touch, and ample capacity.
RandomCase random_case(std::mt19937_64& rng, std::size_t max_buses = 10);

struct UcInstance {
  Network net;  // single bus
  std::vector<UcGenerator> units;
  std::vector<std::vector<double>> loads;  // [hour][bus]
  double reserve_mw = 0.0;
};

/// Single-bus commitment problem with 1..max_units units and 1..max_hours hours.
UcInstance random_uc_instance(std::mt19937_64& rng, std::size_t max_units = 4, std::size_t max_hours = 4);

}  // namespace gridclear::testing
