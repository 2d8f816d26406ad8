#include "gridclear/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gridclear/error.hpp"

namespace gridclear {

StackPrice stack_price(const GeneratorSpec& gen, double q_mw, int hours_on, std::size_t hour) {
  if (!(q_mw > 0.0))
    throw Error(ErrorCode::pricing_failure, "generator " + gen.id + " has no output; stack price undefined");
  if (hours_on < 1) throw Error(ErrorCode::contract, "generator " + gen.id + ": hours_on must be >= 1");
  StackPrice sp;
  sp.gen_id = gen.id;
  sp.hour = hour;
  sp.ic = gen.ic;
  sp.nlc_share = gen.nlc / q_mw;
  sp.suc_share = gen.suc / (q_mw * hours_on);
  sp.sp = sp.ic + sp.nlc_share + sp.suc_share;
  return sp;
}

const char* to_string(ExclusionReason r) {
  switch (r) {
    case ExclusionReason::not_dispatched: return "not_dispatched";
    case ExclusionReason::at_capacity: return "at_capacity";
    case ExclusionReason::at_minimum: return "at_minimum";
    case ExclusionReason::forced_bound: return "forced_bound";
    case ExclusionReason::transmission_bound: return "transmission_bound";
    case ExclusionReason::constrained_on: return "constrained_on";
    case ExclusionReason::constrained_off: return "constrained_off";
    case ExclusionReason::stability_bound: return "stability_bound";
  }
  return "unknown";
}

const char* to_string(PricingScheme s) {
  switch (s) {
    case PricingScheme::uniform_smp: return "uniform_smp";
    case PricingScheme::zonal: return "zonal";
    case PricingScheme::nodal: return "nodal";
  }
  return "unknown";
}

namespace {

constexpr double kPriceTol = 1e-6;

bool same_price(double a, double b) { return std::abs(a - b) <= kPriceTol * (1.0 + std::max(std::abs(a), std::abs(b))); }

}  // namespace

SmpInterval form_smp(const Network& net, std::span<const GeneratorSpec> gens, const DispatchResult& result,
                     const SmpOptions& options) {
  const std::size_t ng = gens.size();
  if (!result.feasible) throw Error(ErrorCode::contract, "SMP requires a feasible schedule");
  if (result.gen_mw.size() != ng) throw Error(ErrorCode::contract, "dispatch result does not match generator list");
  if (options.hours_on && options.hours_on->size() != ng)
    throw Error(ErrorCode::contract, "hours_on vector size mismatch");
  if (options.reference_mw && options.reference_mw->size() != ng)
    throw Error(ErrorCode::contract, "reference schedule size mismatch");

  SmpInterval out;
  out.hour = options.hour;
  if (options.grouping == SmpGrouping::system) {
    out.keys = {"system"};
  } else {
    out.keys = net.zones();
  }
  const std::size_t ngroups = out.keys.size();
  auto group_of_bus = [&](std::size_t b) -> std::size_t {
    return options.grouping == SmpGrouping::system ? 0 : net.zone_of_bus(b);
  };

  // Highest clearing price inside each group; units priced below it are held
  // back by a transfer limit rather than setting the group's price.
  std::vector<double> group_top(ngroups, -std::numeric_limits<double>::infinity());
  for (std::size_t b = 0; b < net.bus_count(); ++b)
    group_top[group_of_bus(b)] = std::max(group_top[group_of_bus(b)], result.price_at_bus(b));

  out.marginal_sets.resize(ngroups);
  for (std::size_t k = 0; k < ngroups; ++k) {
    out.marginal_sets[k].hour = options.hour;
    out.marginal_sets[k].group = out.keys[k];
  }
  const double tol = options.tolerance_mw;
  std::vector<std::optional<double>> best(ngroups);
  for (std::size_t g = 0; g < ng; ++g) {
    const std::size_t bus = net.bus_index(gens[g].bus_id);
    auto& set = out.marginal_sets[group_of_bus(bus)];
    const double q = result.gen_mw[g];
    std::optional<ExclusionReason> why;
    if (q <= tol) {
      why = ExclusionReason::not_dispatched;
    } else if (result.forced_bound[g]) {
      why = ExclusionReason::forced_bound;
    } else if (options.reference_mw && q - (*options.reference_mw)[g] > tol) {
      why = ExclusionReason::constrained_on;
    } else if (options.reference_mw && (*options.reference_mw)[g] - q > tol) {
      why = ExclusionReason::constrained_off;
    } else if (result.at_upper[g]) {
      why = ExclusionReason::at_capacity;
    } else if (result.at_lower[g]) {
      why = ExclusionReason::at_minimum;
    } else if (gens[g].synchronous && std::abs(result.min_sync_dual) > kPriceTol) {
      why = ExclusionReason::stability_bound;
    } else if (!same_price(result.price_at_bus(bus), group_top[group_of_bus(bus)])) {
      why = ExclusionReason::transmission_bound;
    }
    if (why) {
      set.excluded.push_back({gens[g].id, *why});
      continue;
    }
    set.members.push_back(gens[g].id);
    const int h = options.hours_on ? (*options.hours_on)[g] : 1;
    auto sp = stack_price(gens[g], q, h, options.hour);
    auto& top = best[group_of_bus(bus)];
    if (!top || sp.sp > *top) top = sp.sp;
    out.stack_prices.push_back(std::move(sp));
  }
  out.smp.resize(ngroups);
  for (std::size_t k = 0; k < ngroups; ++k) {
    if (!best[k])
      throw Error(ErrorCode::pricing_failure, "empty marginal set in hour " + std::to_string(options.hour) +
                                                  " for " + out.keys[k] + ": every unit is bound");
    out.smp[k] = *best[k];
  }
  return out;
}

std::vector<SmpInterval> form_smp(const Network& net, std::span<const UcGenerator> gens,
                                  const UcSchedule& schedule, SmpGrouping grouping, const UcSchedule* reference) {
  if (!schedule.feasible) throw Error(ErrorCode::contract, "SMP requires a feasible schedule");
  if (reference && (!reference->feasible || reference->hours != schedule.hours))
    throw Error(ErrorCode::contract, "reference schedule is not aligned");
  std::vector<GeneratorSpec> specs;
  for (const auto& g : gens) specs.push_back(g.spec);
  std::vector<SmpInterval> out;
  for (std::size_t t = 0; t < schedule.hours; ++t) {
    SmpOptions o;
    o.grouping = grouping;
    o.hour = t;
    o.hours_on = std::vector<int>(gens.size());
    for (std::size_t g = 0; g < gens.size(); ++g) (*o.hours_on)[g] = std::max(1, schedule.hours_on[g][t]);
    if (reference) {
      o.reference_mw = std::vector<double>(gens.size());
      for (std::size_t g = 0; g < gens.size(); ++g) (*o.reference_mw)[g] = reference->dispatch_mw[g][t];
    }
    out.push_back(form_smp(net, specs, schedule.hourly[t], o));
  }
  return out;
}

double PriceReport::price(std::size_t hour, std::string_view key) const {
  if (hour >= prices.size()) throw Error(ErrorCode::contract, "no prices for hour " + std::to_string(hour));
  const auto it = std::find(keys.begin(), keys.end(), key);
  if (it == keys.end()) throw Error(ErrorCode::contract, "no price for key " + std::string(key));
  return prices[hour][static_cast<std::size_t>(it - keys.begin())];
}

bool PriceReport::has_key(std::string_view key) const {
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

std::string settlement_key(const Network& net, const PriceReport& report, std::size_t bus) {
  switch (report.scheme) {
    case PricingScheme::nodal: return net.buses()[bus].id;
    case PricingScheme::zonal: return net.zones()[net.zone_of_bus(bus)];
    case PricingScheme::uniform_smp:
      return report.has_key("system") ? std::string("system") : net.zones()[net.zone_of_bus(bus)];
  }
  return {};
}

PriceReport form_zonal_prices(const Network& net, const DispatchResult& result) {
  if (result.mode != ClearingMode::zonal)
    throw Error(ErrorCode::contract, "zonal prices need a zonal clearing result");
  if (!result.feasible) throw Error(ErrorCode::contract, "zonal prices need a feasible clearing result");
  if (result.balance_keys != net.zones() || result.balance_duals.size() != net.zones().size())
    throw Error(ErrorCode::contract, "zonal clearing result is missing a zone balance dual");
  PriceReport rep;
  rep.scheme = PricingScheme::zonal;
  rep.keys = result.balance_keys;
  rep.prices = {result.balance_duals};
  return rep;
}

PriceReport form_nodal_prices(const Network& net, const DispatchResult& result, const PtdfMatrix& ptdf,
                              std::optional<std::vector<double>> loss_factors) {
  if (result.mode != ClearingMode::nodal)
    throw Error(ErrorCode::contract, "nodal prices need a nodal clearing result");
  if (!result.feasible) throw Error(ErrorCode::contract, "nodal prices need a feasible clearing result");
  if (result.balance_duals.size() != net.bus_count())
    throw Error(ErrorCode::contract, "nodal clearing result is missing the reference-bus dual");
  if (loss_factors && loss_factors->size() != net.bus_count())
    throw Error(ErrorCode::contract, "loss factor vector size mismatch");
  if (ptdf.bus_count() != net.bus_count() || ptdf.line_count() != net.line_count())
    throw Error(ErrorCode::contract, "PTDF matrix does not match the network");

  const double energy = result.price_at_bus(net.slack_index());
  PriceReport rep;
  rep.scheme = PricingScheme::nodal;
  std::vector<double> prices(net.bus_count());
  std::vector<PriceComponents> comps(net.bus_count());
  for (std::size_t b = 0; b < net.bus_count(); ++b) {
    rep.keys.push_back(net.buses()[b].id);
    double congestion = 0.0;
    for (const auto& fd : result.flow_duals) {
      const double sens = fd.is_interface ? interface_ptdf(net, ptdf, *net.find_interface(fd.element), b)
                                          : ptdf.at(*net.find_line(fd.element), b);
      congestion -= sens * fd.mu;
    }
    if (!same_price(energy + congestion, result.price_at_bus(b)))
      throw Error(ErrorCode::numerical, "LMP decomposition does not reproduce the balance dual at bus " +
                                            net.buses()[b].id);
    const double loss = loss_factors ? energy * (*loss_factors)[b] : 0.0;
    comps[b] = {energy, congestion, loss};
    prices[b] = energy + congestion + loss;
  }
  rep.prices = {prices};
  rep.components = {comps};
  return rep;
}

PriceReport uniform_price_report(const std::vector<SmpInterval>& intervals) {
  if (intervals.empty()) throw Error(ErrorCode::contract, "no SMP intervals");
  PriceReport rep;
  rep.scheme = PricingScheme::uniform_smp;
  rep.keys = intervals.front().keys;
  for (const auto& iv : intervals) {
    if (iv.keys != rep.keys) throw Error(ErrorCode::contract, "SMP intervals use different groupings");
    rep.prices.push_back(iv.smp);
    rep.marginal_sets.insert(rep.marginal_sets.end(), iv.marginal_sets.begin(), iv.marginal_sets.end());
  }
  return rep;
}

}  // namespace gridclear
