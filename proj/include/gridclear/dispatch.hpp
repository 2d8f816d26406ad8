#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridclear/grid_model.hpp"
#include "gridclear/lp.hpp"

namespace gridclear {

/// Assessed cost parameters and output limits of one generating unit.
struct GeneratorSpec {
  std::string id;
  std::string bus_id;
  double p_min = 0.0;
  double p_max = 0.0;
  double ic = 0.0;   // incremental cost, currency/MWh
  double nlc = 0.0;  // no-load cost, currency/h
  double suc = 0.0;  // start-up cost, currency/start
  std::optional<double> forced_min;  // operator-imposed output bounds
  std::optional<double> forced_max;
  bool synchronous = true;
};

/// Throws gridclear::Error(contract) when a unit breaks its invariants.
void validate_generator(const GeneratorSpec& gen);

enum class ClearingMode { nodal, zonal, copper_plate };

const char* to_string(ClearingMode mode);

/// Which constraints a clearing pass enforces.
struct ConstraintRegime {
  std::string name;
  ClearingMode mode = ClearingMode::nodal;
  std::string monitored_profile = kAllLinesProfile;  // filters Line::monitored_in
  bool enforce_interfaces = true;
  double reserve_req_mw = 0.0;
  double min_sync_mw = 0.0;
};

struct DispatchOptions {
  std::optional<std::vector<double>> bus_loads_mw;  // defaults to Bus::load_mw
  std::optional<std::vector<bool>> committed;      // off units are held at zero
  bool apply_forced_bounds = false;
  bool allow_curtailment = true;
  // Among cost-equal dispatches, prefer one that respects every physical line
  // and interface limit before applying the pro-rata split.
  bool prefer_physical_feasibility = true;
  bool break_ties = true;  // when false the first optimal vertex is returned
  const PtdfMatrix* ptdf = nullptr;  // computed on demand when null
  lp::Tolerances tolerances{};
};

struct FlowLimitDual {
  std::string element;  // line or interface id
  bool is_interface = false;
  double mu = 0.0;  // positive when the from->to direction is congested
  double limit_mw = 0.0;
};

struct BindingConstraint {
  std::string label;
  double dual = 0.0;
};

struct DispatchResult {
  ClearingMode mode = ClearingMode::nodal;
  std::string regime_name;
  bool feasible = false;             // the clearing problem has a solution
  bool physically_feasible = false;  // and that solution respects every line/interface limit
  lp::Status status = lp::Status::infeasible;

  std::vector<double> gen_mw;
  std::vector<double> gen_lower;  // effective bounds used in clearing
  std::vector<double> gen_upper;
  std::vector<bool> at_upper;
  std::vector<bool> at_lower;
  std::vector<bool> forced_bound;  // sitting on an operator-imposed bound

  std::vector<double> load_mw;  // per bus
  std::vector<double> curtailed_mw;
  std::vector<double> line_flow_mw;  // physical DC flows of the dispatch
  std::vector<double> interface_flow_mw;

  std::vector<std::string> balance_keys;  // bus ids, zone ids, or "system"
  std::vector<double> balance_duals;
  std::vector<std::size_t> bus_balance_index;

  std::vector<FlowLimitDual> flow_duals;  // every enforced flow limit
  double reserve_dual = 0.0;
  double min_sync_dual = 0.0;
  std::vector<BindingConstraint> binding;

  double total_cost = 0.0;       // sum of ic * MW
  double objective_value = 0.0;  // total_cost plus value of curtailed load
  std::vector<std::string> violations;

  double served_load_mw(std::size_t bus) const { return load_mw[bus] - curtailed_mw[bus]; }
  double price_at_bus(std::size_t bus) const { return balance_duals[bus_balance_index[bus]]; }
};

/// Clears one interval under the regime's mode.
DispatchResult clear(const Network& net, std::span<const GeneratorSpec> gens,
                     const ConstraintRegime& regime, const DispatchOptions& options = {});

DispatchResult clear_nodal(const Network& net, std::span<const GeneratorSpec> gens,
                           const ConstraintRegime& regime, DispatchOptions options = {});
DispatchResult clear_zonal(const Network& net, std::span<const GeneratorSpec> gens,
                           const ConstraintRegime& regime, DispatchOptions options = {});
DispatchResult clear_copper_plate(const Network& net, std::span<const GeneratorSpec> gens,
                                  DispatchOptions options = {});
/// Zonal clearing with forced_min/forced_max enforced.
DispatchResult clear_with_forced_bounds(const Network& net, std::span<const GeneratorSpec> gens,
                                        const ConstraintRegime& regime,
                                        DispatchOptions options = {});

/// Per-bus net injection (generation plus curtailment minus load).
std::vector<double> net_injection(const Network& net, std::span<const GeneratorSpec> gens,
                                  const DispatchResult& result);

}  // namespace gridclear
