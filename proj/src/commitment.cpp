#include "gridclear/commitment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <unordered_map>

#include "gridclear/error.hpp"

namespace gridclear {

void validate_uc_generator(const UcGenerator& g) {
  validate_generator(g.spec);
  if (g.min_up_h < 1 || g.min_down_h < 1)
    throw Error(ErrorCode::contract, "generator " + g.spec.id + ": minimum up/down times must be >= 1 h");
  if (g.initial_hours < 1)
    throw Error(ErrorCode::contract, "generator " + g.spec.id + ": initial state duration must be >= 1 h");
  if (g.ramp_mw_per_h && !(*g.ramp_mw_per_h > 0.0))
    throw Error(ErrorCode::contract, "generator " + g.spec.id + ": ramp rate must be positive");
}

namespace {

// Per-unit state: +d online for d hours, -d offline for d hours, with d clipped
// at the relevant minimum time so the state space stays finite.
using State = std::vector<int>;

struct Node {
  double cost = 0.0;
  State prev;
  std::uint32_t mask = 0;
};

bool unit_on(std::uint32_t mask, std::size_t g) { return ((mask >> g) & 1U) != 0; }

}  // namespace

UcSchedule solve_uc(const Network& net, std::span<const UcGenerator> gens,
                    const std::vector<std::vector<double>>& bus_loads_mw,
                    const ConstraintRegime& regime, const UcOptions& options) {
  const std::size_t ng = gens.size();
  const std::size_t hours = bus_loads_mw.size();
  if (hours == 0 || hours > kMaxHorizonHours)
    throw Error(ErrorCode::contract, "horizon must be between 1 and 24 hours");
  if (ng > 20) throw Error(ErrorCode::capacity, "too many units for commitment enumeration");
  for (const auto& g : gens) validate_uc_generator(g);
  for (const auto& row : bus_loads_mw)
    if (row.size() != net.bus_count()) throw Error(ErrorCode::contract, "hourly load vector size mismatch");
  if (options.must_commit) {
    if (options.must_commit->size() != ng) throw Error(ErrorCode::contract, "must-commit matrix size mismatch");
    for (const auto& row : *options.must_commit)
      if (row.size() != hours) throw Error(ErrorCode::contract, "must-commit matrix size mismatch");
  }

  std::vector<GeneratorSpec> specs;
  for (const auto& g : gens) specs.push_back(g.spec);
  const PtdfMatrix ptdf = build_ptdf(net);

  UcSchedule out;
  out.hours = hours;
  for (const auto& g : gens) out.gen_ids.push_back(g.spec.id);

  auto dispatch_options = [&](std::size_t t, std::uint32_t mask) {
    DispatchOptions o;
    o.bus_loads_mw = bus_loads_mw[t];
    o.committed = std::vector<bool>(ng);
    for (std::size_t g = 0; g < ng; ++g) (*o.committed)[g] = unit_on(mask, g);
    o.allow_curtailment = false;
    o.ptdf = &ptdf;
    o.tolerances = options.tolerances;
    return o;
  };

  // Energy cost of each (hour, commitment mask); nullopt when infeasible.
  std::vector<std::unordered_map<std::uint32_t, std::optional<double>>> cache(hours);
  auto energy_cost = [&](std::size_t t, std::uint32_t mask) -> std::optional<double> {
    auto it = cache[t].find(mask);
    if (it != cache[t].end()) return it->second;
    if (++out.candidates_evaluated > options.max_candidates)
      throw Error(ErrorCode::capacity, "commitment search exceeded " + std::to_string(options.max_candidates) +
                                           " candidate evaluations");
    auto o = dispatch_options(t, mask);
    o.break_ties = false;
    const auto r = clear(net, specs, regime, o);
    std::optional<double> v;
    if (r.feasible) v = r.total_cost;
    cache[t].emplace(mask, v);
    return v;
  };

  State init(ng);
  for (std::size_t g = 0; g < ng; ++g) {
    const auto& u = gens[g];
    init[g] = u.initially_on ? std::min(u.initial_hours, u.min_up_h) : -std::min(u.initial_hours, u.min_down_h);
  }

  std::vector<std::map<State, Node>> layers(hours + 1);
  layers[0][init] = Node{};
  const std::uint32_t mask_count = std::uint32_t{1} << ng;
  for (std::size_t t = 0; t < hours; ++t) {
    for (const auto& [state, node] : layers[t]) {
      for (std::uint32_t mask = 0; mask < mask_count; ++mask) {
        bool allowed = true;
        double fixed = 0.0;
        State next(ng);
        for (std::size_t g = 0; g < ng && allowed; ++g) {
          const auto& u = gens[g];
          const bool on = unit_on(mask, g);
          const int s = state[g];
          if (s > 0 && !on && s < u.min_up_h) allowed = false;
          if (s < 0 && on && -s < u.min_down_h) allowed = false;
          if (!on && options.must_commit && (*options.must_commit)[g][t]) allowed = false;
          if (on) {
            fixed += u.spec.nlc;
            if (s < 0) fixed += u.spec.suc;
            next[g] = s > 0 ? std::min(s + 1, u.min_up_h) : 1;
          } else {
            next[g] = s < 0 ? -std::min(-s + 1, u.min_down_h) : -1;
          }
        }
        if (!allowed) continue;
        const auto e = energy_cost(t, mask);
        if (!e) continue;
        const double cost = node.cost + (*e + fixed);
        auto [it, inserted] = layers[t + 1].try_emplace(next, Node{cost, state, mask});
        if (!inserted && cost < it->second.cost) it->second = Node{cost, state, mask};
      }
    }
    if (layers[t + 1].empty()) {
      out.feasible = false;
      out.first_infeasible_hour = t;
      out.message = "no feasible commitment in hour " + std::to_string(t);
      return out;
    }
  }

  const std::map<State, Node>& last = layers[hours];
  auto best = last.begin();
  for (auto it = last.begin(); it != last.end(); ++it)
    if (it->second.cost < best->second.cost) best = it;

  std::vector<std::uint32_t> masks(hours);
  State cur = best->first;
  for (std::size_t t = hours; t-- > 0;) {
    const Node& n = layers[t + 1].at(cur);
    masks[t] = n.mask;
    cur = n.prev;
  }

  out.feasible = true;
  out.committed.assign(ng, std::vector<bool>(hours, false));
  out.started.assign(ng, std::vector<bool>(hours, false));
  out.dispatch_mw.assign(ng, std::vector<double>(hours, 0.0));
  out.hours_on.assign(ng, std::vector<int>(hours, 0));
  out.energy_cost.assign(hours, 0.0);
  out.no_load_cost.assign(hours, 0.0);
  out.start_cost.assign(hours, 0.0);
  out.hourly_cost.assign(hours, 0.0);
  for (std::size_t t = 0; t < hours; ++t) {
    auto r = clear(net, specs, regime, dispatch_options(t, masks[t]));
    out.energy_cost[t] = *cache[t].at(masks[t]);
    for (std::size_t g = 0; g < ng; ++g) {
      const bool on = unit_on(masks[t], g);
      const bool was_on = t == 0 ? gens[g].initially_on : out.committed[g][t - 1];
      out.committed[g][t] = on;
      out.dispatch_mw[g][t] = r.gen_mw[g];
      if (on) {
        out.started[g][t] = !was_on;
        const int before = t == 0 ? (gens[g].initially_on ? gens[g].initial_hours : 0) : out.hours_on[g][t - 1];
        out.hours_on[g][t] = was_on ? before + 1 : 1;
        out.no_load_cost[t] += gens[g].spec.nlc;
        if (!was_on) out.start_cost[t] += gens[g].spec.suc;
      }
    }
    out.hourly_cost[t] = out.energy_cost[t] + (out.no_load_cost[t] + out.start_cost[t]);
    out.hourly.push_back(std::move(r));
  }
  out.total_cost = best->second.cost;
  return out;
}

double RedispatchRecord::gen_con_mwh(std::size_t g) const {
  double s = 0.0;
  for (double d : delta_mw[g]) s += std::max(0.0, d);
  return s;
}

double RedispatchRecord::gen_coff_mwh(std::size_t g) const {
  double s = 0.0;
  for (double d : delta_mw[g]) s += std::max(0.0, -d);
  return s;
}

double RedispatchRecord::hour_net_mwh(std::size_t hour) const {
  double s = 0.0;
  for (const auto& row : delta_mw) s += row[hour];
  return s;
}

RedispatchRecord compute_redispatch(const Network& net, std::span<const UcGenerator> gens,
                                    const UcSchedule& dauc, const UcSchedule& ruc) {
  if (!dauc.feasible || !ruc.feasible)
    throw Error(ErrorCode::contract, "redispatch needs two feasible schedules");
  if (dauc.hours != ruc.hours || dauc.gen_ids != ruc.gen_ids || dauc.gen_ids.size() != gens.size())
    throw Error(ErrorCode::contract, "DAUC and RUC schedules are not aligned");
  RedispatchRecord rec;
  rec.zones = net.zones();
  rec.con_mwh.assign(rec.zones.size(), 0.0);
  rec.coff_mwh.assign(rec.zones.size(), 0.0);
  for (std::size_t g = 0; g < gens.size(); ++g) {
    rec.gen_ids.push_back(gens[g].spec.id);
    rec.gen_zone.push_back(net.zone_of_bus(net.bus_index(gens[g].spec.bus_id)));
    std::vector<double> row(dauc.hours);
    for (std::size_t t = 0; t < dauc.hours; ++t) row[t] = ruc.dispatch_mw[g][t] - dauc.dispatch_mw[g][t];
    rec.delta_mw.push_back(std::move(row));
  }
  for (std::size_t g = 0; g < gens.size(); ++g) {
    rec.con_mwh[rec.gen_zone[g]] += rec.gen_con_mwh(g);
    rec.coff_mwh[rec.gen_zone[g]] += rec.gen_coff_mwh(g);
  }
  return rec;
}

namespace {

int mode_rank(ClearingMode m) {
  switch (m) {
    case ClearingMode::copper_plate: return 0;
    case ClearingMode::zonal: return 1;
    case ClearingMode::nodal: return 2;
  }
  return 0;
}

bool line_limited(const Network& net, const ConstraintRegime& reg, std::size_t l) {
  switch (reg.mode) {
    case ClearingMode::copper_plate: return false;
    case ClearingMode::zonal: return net.is_inter_zonal(l) && net.is_monitored(l, reg.monitored_profile);
    case ClearingMode::nodal: return net.is_monitored(l, reg.monitored_profile);
  }
  return false;
}

}  // namespace

void check_ruc_superset(const Network& net, const ConstraintRegime& dauc, const ConstraintRegime& ruc) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::contract, "RUC regime " + ruc.name + " is not a superset of DAUC regime " + dauc.name +
                                         ": " + why);
  };
  if (mode_rank(ruc.mode) < mode_rank(dauc.mode)) fail("network representation is coarser");
  for (std::size_t l = 0; l < net.line_count(); ++l)
    if (line_limited(net, dauc, l) && !line_limited(net, ruc, l)) fail("line " + net.lines()[l].id + " is not monitored");
  if (dauc.mode != ClearingMode::copper_plate && dauc.enforce_interfaces && !ruc.enforce_interfaces)
    fail("interfaces are not enforced");
  if (ruc.reserve_req_mw < dauc.reserve_req_mw) fail("reserve requirement is lower");
  if (ruc.min_sync_mw < dauc.min_sync_mw) fail("minimum synchronous generation is lower");
}

DaucRucResult run_dauc_ruc(const Network& net, std::span<const UcGenerator> gens,
                           const std::vector<std::vector<double>>& bus_loads_mw,
                           const ConstraintRegime& regime_dauc, const ConstraintRegime& regime_ruc,
                           const UcOptions& options) {
  check_ruc_superset(net, regime_dauc, regime_ruc);
  DaucRucResult out;
  out.dauc = solve_uc(net, gens, bus_loads_mw, regime_dauc, options);
  if (!out.dauc.feasible) return out;
  UcOptions ruc_opts = options;
  ruc_opts.must_commit = out.dauc.committed;
  if (options.must_commit) {
    for (std::size_t g = 0; g < gens.size(); ++g)
      for (std::size_t t = 0; t < out.dauc.hours; ++t)
        if ((*options.must_commit)[g][t]) (*ruc_opts.must_commit)[g][t] = true;
  }
  out.ruc = solve_uc(net, gens, bus_loads_mw, regime_ruc, ruc_opts);
  if (out.ruc.feasible) out.record = compute_redispatch(net, gens, out.dauc, out.ruc);
  return out;
}

}  // namespace gridclear
