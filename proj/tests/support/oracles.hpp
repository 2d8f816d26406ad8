#pragma once

#include <optional>
#include <random>
#include <vector>

#include "gridclear/lp.hpp"

namespace gridclear::testing {

/// Dense Gaussian elimination with partial pivoting; returns nullopt when singular.
std::optional<std::vector<double>> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b);

struct OracleLine {
  std::size_t from = 0;
  std::size_t to = 0;
  double reactance = 0.0;
};

/// DC line flows (MW) for a balanced injection vector, solved by eliminating the
/// reference bus from the bus admittance system.
std::vector<double> btheta_flows(std::size_t bus_count, const std::vector<OracleLine>& lines,
                                 const std::vector<double>& injection_mw, std::size_t ref_bus,
                                 double base_mva = 100.0);

struct MeritUnit {
  double p_min = 0.0;
  double p_max = 0.0;
  double ic = 0.0;
};

/// Cheapest single-node dispatch for committed units: minimums first, then
/// merit order. Returns nullopt when the load is outside [sum p_min, sum p_max].
std::optional<std::vector<double>> merit_order_dispatch(const std::vector<MeritUnit>& units, double load_mw);

struct OracleUcUnit {
  double p_min = 0.0;
  double p_max = 0.0;
  double ic = 0.0;
  double nlc = 0.0;
  double suc = 0.0;
  int min_up_h = 1;
  int min_down_h = 1;
  bool initially_on = false;
  int initial_hours = 1;
};

struct OracleUcResult {
  double cost = 0.0;
  std::vector<std::vector<bool>> on;  // [hour][unit]
};

/// Exhaustive single-node unit commitment over every on/off schedule.
/// Reserve is committed headroom sum(p_max - p) per hour. Returns nullopt if no
/// schedule is feasible.
std::optional<OracleUcResult> brute_force_uc(const std::vector<OracleUcUnit>& units,
                                             const std::vector<double>& load_mw,
                                             const std::vector<double>& reserve_mw);

struct DualityCheck {
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double relative_gap = 0.0;
  double complementary_slackness = 0.0;  // largest |multiplier * slack|
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;        // wrong-signed multipliers or reduced costs
};

/// Rebuilds the dual objective of a bounded-variable LP from the reported
/// row multipliers, recomputing reduced costs from the problem data.
DualityCheck check_duality(const lp::LinearProgram& lp, const lp::Solution& sol);

/// Feasible, bounded LP with up to max_vars variables: rows are built around a
/// random interior point and every variable has a finite lower bound.
lp::LinearProgram random_feasible_lp(std::mt19937_64& rng, std::size_t max_vars);

}  // namespace gridclear::testing
