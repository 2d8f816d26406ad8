#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridclear/analysis.hpp"
#include "gridclear/commitment.hpp"
#include "gridclear/dispatch.hpp"
#include "gridclear/pricing.hpp"
#include "gridclear/scenario_io.hpp"
#include "gridclear/settlement.hpp"

namespace gridclear {

/// Clearing, prices and settlement of one scenario under one market design.
struct SchemeOutcome {
  MarketScheme scheme = MarketScheme::nodal;
  ConstraintRegime regime;
  DispatchResult dispatch;
  std::optional<PriceReport> prices;
  std::optional<SmpInterval> smp;  // uniform and copper_plate
  std::optional<SettlementReport> settlement;
  std::string failure;  // why prices or settlement are missing

  bool cleared() const { return dispatch.feasible; }
  /// Cleared, priced, settled and within every physical limit.
  bool complete() const { return dispatch.feasible && dispatch.physically_feasible && settlement.has_value(); }
};

/// Single-period run using the first hour of the scenario's loads.
SchemeOutcome run_scheme(const Scenario& scenario, MarketScheme scheme, const DispatchOptions& options = {});

struct DaucRucOutcome {
  ConstraintRegime dauc_regime;
  ConstraintRegime ruc_regime;
  DaucRucResult result;
  RedispatchTable table;
  std::optional<PriceReport> prices;  // SMP of the market (DAUC) schedule
  std::optional<SettlementReport> settlement;
  std::string failure;
};

/// Throws ScenarioError(E015) when the scenario names no DAUC or RUC regime.
DaucRucOutcome run_dauc_ruc(const Scenario& scenario, const UcOptions& options = {});

/// Each requested deviation evaluated under uniform and nodal pricing.
std::vector<BidDeviation> run_bid_deviations(const Scenario& scenario,
                                             const std::vector<BidDeviationRequest>& requests);

}  // namespace gridclear
