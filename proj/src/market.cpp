#include "gridclear/market.hpp"

#include "gridclear/error.hpp"

namespace gridclear {

SchemeOutcome run_scheme(const Scenario& scenario, MarketScheme scheme, const DispatchOptions& options) {
  const auto& net = scenario.network;
  const auto gens = scenario.generator_specs();
  SchemeOutcome out;
  out.scheme = scheme;
  out.regime = scenario.regime_for(scheme);

  DispatchOptions opts = options;
  if (!opts.bus_loads_mw) opts.bus_loads_mw = scenario.hourly_bus_loads().front();
  opts.apply_forced_bounds = scheme == MarketScheme::zonal_forced;
  out.dispatch = clear(net, gens, out.regime, opts);
  if (!out.dispatch.feasible) {
    out.failure = "clearing is infeasible";
    return out;
  }

  try {
    switch (scheme) {
      case MarketScheme::nodal:
        out.prices = form_nodal_prices(net, out.dispatch, opts.ptdf ? *opts.ptdf : build_ptdf(net));
        break;
      case MarketScheme::zonal:
      case MarketScheme::zonal_forced:
        out.prices = form_zonal_prices(net, out.dispatch);
        break;
      case MarketScheme::uniform:
      case MarketScheme::copper_plate: {
        SmpOptions so;
        so.grouping = scheme == MarketScheme::copper_plate ? SmpGrouping::system : scenario.run.smp_grouping;
        out.smp = form_smp(net, gens, out.dispatch, so);
        out.prices = uniform_price_report({*out.smp});
        break;
      }
    }
    out.settlement = summarize(net.with_bus_loads(*opts.bus_loads_mw), gens, out.dispatch, *out.prices);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::pricing_failure && e.code() != ErrorCode::contract) throw;
    out.failure = e.what();
  }
  return out;
}

DaucRucOutcome run_dauc_ruc(const Scenario& scenario, const UcOptions& options) {
  auto need = [&](const std::optional<std::string>& name, const char* field) -> ConstraintRegime {
    if (!name) throw ScenarioError({{"E015", std::string("run.") + field, "scenario names no regime for this pass"}});
    const auto* r = scenario.find_regime(*name);
    if (!r) throw ScenarioError({{"E015", std::string("run.") + field, "regime '" + *name + "' is not defined"}});
    return *r;
  };
  DaucRucOutcome out;
  out.dauc_regime = need(scenario.run.dauc_regime, "dauc_regime");
  out.ruc_regime = need(scenario.run.ruc_regime, "ruc_regime");
  const auto gens = scenario.uc_generators();
  const auto loads = scenario.hourly_bus_loads();
  out.result = gridclear::run_dauc_ruc(scenario.network, gens, loads, out.dauc_regime, out.ruc_regime, options);
  if (!out.result.dauc.feasible || !out.result.ruc.feasible) {
    out.failure = !out.result.dauc.feasible ? "DAUC: " + out.result.dauc.message : "RUC: " + out.result.ruc.message;
    return out;
  }
  out.table = redispatch_summary(out.result.record);
  try {
    out.prices = uniform_price_report(form_smp(scenario.network, gens, out.result.dauc, scenario.run.smp_grouping));
    out.settlement = summarize_horizon(scenario.network, gens, out.result.dauc, *out.prices, loads, &out.result.record);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::pricing_failure && e.code() != ErrorCode::contract) throw;
    out.failure = e.what();
  }
  return out;
}

std::vector<BidDeviation> run_bid_deviations(const Scenario& scenario,
                                             const std::vector<BidDeviationRequest>& requests) {
  const auto gens = scenario.generator_specs();
  const auto net = scenario.network.with_bus_loads(scenario.hourly_bus_loads().front());
  std::vector<BidDeviation> out;
  for (const auto& req : requests) {
    out.push_back(evaluate_bid_deviation(net, gens, scenario.regime_for(MarketScheme::uniform),
                                         PricingScheme::uniform_smp, req.gen_id, req.offered_ic,
                                         scenario.run.smp_grouping));
    out.push_back(evaluate_bid_deviation(net, gens, scenario.regime_for(MarketScheme::nodal), PricingScheme::nodal,
                                         req.gen_id, req.offered_ic));
  }
  return out;
}

}  // namespace gridclear
