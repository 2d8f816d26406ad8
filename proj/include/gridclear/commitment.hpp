#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridclear/dispatch.hpp"
#include "gridclear/grid_model.hpp"

namespace gridclear {

/// Commitment-level data of a unit. Synchronism is carried by spec.synchronous.
struct UcGenerator {
  GeneratorSpec spec;
  int min_up_h = 1;
  int min_down_h = 1;
  bool initially_on = false;
  int initial_hours = 1;  // hours already spent in the initial state
  std::optional<double> ramp_mw_per_h;  // declared, not enforced
};

void validate_uc_generator(const UcGenerator& gen);

inline constexpr std::size_t kMaxHorizonHours = 24;

struct UcOptions {
  std::size_t max_candidates = std::size_t{1} << 20;  // hour-mask LP evaluations
  // Per generator, per hour: true forces the unit on (RUC inherits DAUC this way).
  std::optional<std::vector<std::vector<bool>>> must_commit;
  lp::Tolerances tolerances{};
};

/// Indexing is [generator][hour] unless noted.
struct UcSchedule {
  bool feasible = false;
  std::optional<std::size_t> first_infeasible_hour;
  std::string message;

  std::size_t hours = 0;
  std::vector<std::string> gen_ids;
  std::vector<std::vector<bool>> committed;
  std::vector<std::vector<bool>> started;
  std::vector<std::vector<double>> dispatch_mw;
  std::vector<std::vector<int>> hours_on;  // consecutive online hours, 0 when off

  std::vector<double> energy_cost;  // per hour
  std::vector<double> no_load_cost;
  std::vector<double> start_cost;
  std::vector<double> hourly_cost;
  double total_cost = 0.0;

  std::vector<DispatchResult> hourly;  // clearing of each hour under the final commitment
  std::size_t candidates_evaluated = 0;
};

/// Multi-hour commitment minimising energy, no-load and start-up cost under
/// the regime's constraints in every hour. bus_loads_mw is [hour][bus].
UcSchedule solve_uc(const Network& net, std::span<const UcGenerator> gens,
                    const std::vector<std::vector<double>>& bus_loads_mw,
                    const ConstraintRegime& regime, const UcOptions& options = {});

/// Difference between the operational and the market schedule.
struct RedispatchRecord {
  std::vector<std::string> gen_ids;
  std::vector<std::size_t> gen_zone;  // index into zones
  std::vector<std::string> zones;
  std::vector<std::vector<double>> delta_mw;  // RUC - DAUC, [generator][hour]
  std::vector<double> con_mwh;   // per zone, sum of positive deltas
  std::vector<double> coff_mwh;  // per zone, sum of magnitudes of negative deltas

  double gen_con_mwh(std::size_t g) const;
  double gen_coff_mwh(std::size_t g) const;
  double hour_net_mwh(std::size_t hour) const;
};

RedispatchRecord compute_redispatch(const Network& net, std::span<const UcGenerator> gens,
                                    const UcSchedule& dauc, const UcSchedule& ruc);

struct DaucRucResult {
  UcSchedule dauc;
  UcSchedule ruc;
  RedispatchRecord record;
};

/// Throws Error(contract) unless the RUC regime is at least as strict as the DAUC regime.
void check_ruc_superset(const Network& net, const ConstraintRegime& dauc, const ConstraintRegime& ruc);

/// DAUC, then RUC with DAUC commitments as lower bounds, then the redispatch record.
DaucRucResult run_dauc_ruc(const Network& net, std::span<const UcGenerator> gens,
                           const std::vector<std::vector<double>>& bus_loads_mw,
                           const ConstraintRegime& regime_dauc, const ConstraintRegime& regime_ruc,
                           const UcOptions& options = {});

}  // namespace gridclear
