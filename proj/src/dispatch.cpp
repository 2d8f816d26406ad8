#include "gridclear/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "gridclear/error.hpp"

namespace gridclear {

void validate_generator(const GeneratorSpec& g) {
  auto bad = [&](const std::string& what) {
    throw Error(ErrorCode::contract, "generator " + g.id + ": " + what);
  };
  if (!(g.p_min >= 0.0) || !(g.p_min <= g.p_max)) bad("requires 0 <= p_min <= p_max");
  if (!(g.ic >= 0.0) || !(g.nlc >= 0.0) || !(g.suc >= 0.0)) bad("costs must be non-negative");
  if (g.forced_min && (*g.forced_min < 0.0 || *g.forced_min > g.p_max))
    bad("forced_min outside [0, p_max]");
  if (g.forced_max && (*g.forced_max < 0.0 || *g.forced_max > g.p_max))
    bad("forced_max outside [0, p_max]");
  if (g.forced_min && g.forced_max && *g.forced_min > *g.forced_max)
    bad("forced_min exceeds forced_max");
}

const char* to_string(ClearingMode mode) {
  switch (mode) {
    case ClearingMode::nodal: return "nodal";
    case ClearingMode::zonal: return "zonal";
    case ClearingMode::copper_plate: return "copper_plate";
  }
  return "unknown";
}

namespace {

constexpr double kBoundSnapMw = 1e-9;
constexpr double kBoundFlagMw = 1e-6;
constexpr double kCoeffEps = 1e-12;

std::string fmt_mw(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << v;
  return os.str();
}

struct FlowRow {
  std::string element;
  bool is_interface = false;
  double limit = 0.0;
  std::size_t upper_row = 0;
  std::size_t lower_row = 0;
};

/// Builds the clearing LP for one interval. Row and column bookkeeping is
/// kept so duals and primal values can be mapped back to network elements.
class ModelBuilder {
 public:
  ModelBuilder(const Network& net, std::span<const GeneratorSpec> gens,
               const ConstraintRegime& regime, std::span<const double> loads,
               std::span<const double> lo, std::span<const double> hi,
               std::span<const std::size_t> gen_bus, bool allow_curtailment,
               const PtdfMatrix& ptdf, bool elastic)
      : net_(net), gens_(gens), regime_(regime), loads_(loads), lo_(lo), hi_(hi),
        gen_bus_(gen_bus), ptdf_(ptdf), elastic_(elastic) {
    const double scale = elastic_ ? 0.0 : 1.0;
    for (std::size_t g = 0; g < gens_.size(); ++g)
      p_var_.push_back(lp_.add_variable(scale * gens_[g].ic, lo_[g], hi_[g], "P:" + gens_[g].id));
    c_var_.assign(net_.bus_count(), SIZE_MAX);
    if (allow_curtailment) {
      for (std::size_t b = 0; b < net_.bus_count(); ++b) {
        if (loads_[b] > 0.0)
          c_var_[b] = lp_.add_variable(scale * net_.buses()[b].wtp, 0.0, loads_[b],
                                       "curtail:" + net_.buses()[b].id);
      }
    }
    switch (regime_.mode) {
      case ClearingMode::nodal: build_nodal(); break;
      case ClearingMode::zonal: build_zonal(); break;
      case ClearingMode::copper_plate: build_copper(); break;
    }
    build_system_rows();
  }

  lp::LinearProgram& lp() { return lp_; }
  const std::vector<std::size_t>& balance_rows() const { return balance_rows_; }
  const std::vector<FlowRow>& flow_rows() const { return flow_rows_; }
  std::optional<std::size_t> reserve_row() const { return reserve_row_; }
  std::optional<std::size_t> min_sync_row() const { return min_sync_row_; }
  const std::vector<std::pair<std::size_t, std::size_t>>& elastic_slacks() const { return slacks_; }

  double gen_value(const lp::Solution& s, std::size_t g) const { return s.primal[p_var_[g]]; }
  double curtail_value(const lp::Solution& s, std::size_t b) const {
    return c_var_[b] == SIZE_MAX ? 0.0 : s.primal[c_var_[b]];
  }

  void add_cost_cap(double cap) {
    std::vector<lp::Term> terms;
    for (std::size_t g = 0; g < gens_.size(); ++g)
      if (gens_[g].ic != 0.0) terms.push_back({p_var_[g], gens_[g].ic});
    for (std::size_t b = 0; b < c_var_.size(); ++b)
      if (c_var_[b] != SIZE_MAX) terms.push_back({c_var_[b], net_.buses()[b].wtp});
    lp_.add_constraint(std::move(terms), lp::Relation::less_equal, cap, "tiebreak:cost_cap");
  }

  /// Adds every physical line and interface limit the clearing model does not
  /// already enforce, expressed through shift factors of the injections.
  void add_physical_limits() {
    for (std::size_t l = 0; l < net_.line_count(); ++l) {
      if (regime_.mode == ClearingMode::nodal && line_enforced_[l]) continue;
      auto sens = [&](std::size_t b) { return ptdf_.at(l, b); };
      add_sensitivity_rows(sens, net_.lines()[l].limit_mw, "phys:line:" + net_.lines()[l].id);
    }
    for (std::size_t k = 0; k < net_.interfaces().size(); ++k) {
      if (regime_.mode == ClearingMode::nodal && interface_enforced_[k]) continue;
      auto sens = [&](std::size_t b) { return interface_ptdf(net_, ptdf_, k, b); };
      add_sensitivity_rows(sens, net_.interfaces()[k].ttc_mw,
                           "phys:interface:" + net_.interfaces()[k].id);
    }
  }

  /// Replaces the objective with an L1 distance from a pro-rata split of
  /// each equal-cost group's headroom above its lower bounds.
  void set_pro_rata_objective(const std::vector<std::vector<std::size_t>>& groups) {
    for (std::size_t j = 0; j < lp_.variable_count(); ++j) lp_.set_cost(j, 0.0);
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      const auto share = lp_.add_variable(0.0, 0.0, 1.0, "share:" + std::to_string(gi));
      for (auto g : groups[gi]) {
        const double range = hi_[g] - lo_[g];
        const auto dev = lp_.add_variable(1.0, 0.0, lp::kInfinity, "dev:" + gens_[g].id);
        lp_.add_constraint({{p_var_[g], 1.0}, {share, -range}, {dev, -1.0}},
                           lp::Relation::less_equal, lo_[g], "prorata:" + gens_[g].id + ":hi");
        lp_.add_constraint({{p_var_[g], -1.0}, {share, range}, {dev, -1.0}},
                           lp::Relation::less_equal, -lo_[g], "prorata:" + gens_[g].id + ":lo");
      }
    }
  }

 private:
  std::size_t add_row(std::vector<lp::Term> terms, lp::Relation rel, double rhs,
                      const std::string& label) {
    if (elastic_) {
      const auto row_index = lp_.constraint_count();
      if (rel != lp::Relation::greater_equal) {
        auto s = lp_.add_variable(1.0, 0.0, lp::kInfinity, "slack-:" + label);
        terms.push_back({s, -1.0});
        slacks_.emplace_back(s, row_index);
      }
      if (rel != lp::Relation::less_equal) {
        auto s = lp_.add_variable(1.0, 0.0, lp::kInfinity, "slack+:" + label);
        terms.push_back({s, 1.0});
        slacks_.emplace_back(s, row_index);
      }
    }
    return lp_.add_constraint(std::move(terms), rel, rhs, label);
  }

  template <typename Sens>
  void add_sensitivity_rows(Sens sens, double limit, const std::string& label) {
    std::vector<lp::Term> terms;
    double load_term = 0.0;
    for (std::size_t g = 0; g < gens_.size(); ++g) {
      const double s = sens(gen_bus_[g]);
      if (std::abs(s) > kCoeffEps) terms.push_back({p_var_[g], s});
    }
    for (std::size_t b = 0; b < net_.bus_count(); ++b) {
      const double s = sens(b);
      if (std::abs(s) <= kCoeffEps) continue;
      if (c_var_[b] != SIZE_MAX) terms.push_back({c_var_[b], s});
      load_term += s * loads_[b];
    }
    if (terms.empty()) return;
    lp_.add_constraint(terms, lp::Relation::less_equal, limit + load_term, label + ":max");
    lp_.add_constraint(std::move(terms), lp::Relation::greater_equal, -limit + load_term,
                       label + ":min");
  }

  void add_flow_limit(std::vector<lp::Term> terms, double limit, const std::string& element,
                      bool is_interface) {
    const std::string prefix = (is_interface ? "interface:" : "line:") + element;
    FlowRow fr{element, is_interface, limit, 0, 0};
    fr.upper_row = add_row(terms, lp::Relation::less_equal, limit, prefix + ":max");
    fr.lower_row = add_row(std::move(terms), lp::Relation::greater_equal, -limit, prefix + ":min");
    flow_rows_.push_back(std::move(fr));
  }

  void build_nodal() {
    const std::size_t nb = net_.bus_count();
    for (std::size_t b = 0; b < nb; ++b) {
      const bool slack = b == net_.slack_index();
      theta_var_.push_back(lp_.add_variable(0.0, slack ? 0.0 : -lp::kInfinity,
                                            slack ? 0.0 : lp::kInfinity,
                                            "theta:" + net_.buses()[b].id));
    }
    std::vector<std::vector<lp::Term>> balance(nb);
    for (std::size_t g = 0; g < gens_.size(); ++g) balance[gen_bus_[g]].push_back({p_var_[g], 1.0});
    for (std::size_t b = 0; b < nb; ++b)
      if (c_var_[b] != SIZE_MAX) balance[b].push_back({c_var_[b], 1.0});
    for (std::size_t l = 0; l < net_.line_count(); ++l) {
      const auto f = net_.from_index(l), t = net_.to_index(l);
      const double bsus = net_.susceptance_mw(l);
      // Flow f->t leaves f and enters t.
      balance[f].push_back({theta_var_[f], -bsus});
      balance[f].push_back({theta_var_[t], bsus});
      balance[t].push_back({theta_var_[f], bsus});
      balance[t].push_back({theta_var_[t], -bsus});
    }
    for (std::size_t b = 0; b < nb; ++b)
      balance_rows_.push_back(add_row(merge(std::move(balance[b])), lp::Relation::equal, loads_[b],
                                      "balance:bus:" + net_.buses()[b].id));

    line_enforced_.assign(net_.line_count(), false);
    for (std::size_t l = 0; l < net_.line_count(); ++l) {
      if (!net_.is_monitored(l, regime_.monitored_profile)) continue;
      line_enforced_[l] = true;
      add_flow_limit(line_terms(l), net_.lines()[l].limit_mw, net_.lines()[l].id, false);
    }
    interface_enforced_.assign(net_.interfaces().size(), false);
    if (regime_.enforce_interfaces) {
      for (std::size_t k = 0; k < net_.interfaces().size(); ++k) {
        const auto& itf = net_.interfaces()[k];
        std::vector<lp::Term> terms;
        for (const auto& m : itf.members) {
          for (auto t : line_terms(*net_.find_line(m.line_id))) {
            t.coeff *= m.direction;
            terms.push_back(t);
          }
        }
        interface_enforced_[k] = true;
        add_flow_limit(merge(std::move(terms)), itf.ttc_mw, itf.id, true);
      }
    }
  }

  std::vector<lp::Term> line_terms(std::size_t l) const {
    const double bsus = net_.susceptance_mw(l);
    return {{theta_var_[net_.from_index(l)], bsus}, {theta_var_[net_.to_index(l)], -bsus}};
  }

  void build_zonal() {
    const std::size_t nz = net_.zones().size();
    std::vector<std::vector<lp::Term>> balance(nz);
    std::vector<double> zone_load(nz, 0.0);
    for (std::size_t g = 0; g < gens_.size(); ++g)
      balance[net_.zone_of_bus(gen_bus_[g])].push_back({p_var_[g], 1.0});
    for (std::size_t b = 0; b < net_.bus_count(); ++b) {
      const auto z = net_.zone_of_bus(b);
      zone_load[z] += loads_[b];
      if (c_var_[b] != SIZE_MAX) balance[z].push_back({c_var_[b], 1.0});
    }
    flow_var_.assign(net_.line_count(), SIZE_MAX);
    for (std::size_t l = 0; l < net_.line_count(); ++l) {
      if (!net_.is_inter_zonal(l)) continue;
      flow_var_[l] = lp_.add_variable(0.0, -lp::kInfinity, lp::kInfinity, "flow:" + net_.lines()[l].id);
      balance[net_.zone_of_bus(net_.from_index(l))].push_back({flow_var_[l], -1.0});
      balance[net_.zone_of_bus(net_.to_index(l))].push_back({flow_var_[l], 1.0});
    }
    for (std::size_t z = 0; z < nz; ++z)
      balance_rows_.push_back(add_row(merge(std::move(balance[z])), lp::Relation::equal, zone_load[z],
                                      "balance:zone:" + net_.zones()[z]));

    // Only interfaces made entirely of inter-zonal lines exist in the zonal model.
    std::vector<bool> covered(net_.line_count(), false);
    interface_enforced_.assign(net_.interfaces().size(), false);
    if (regime_.enforce_interfaces) {
      for (std::size_t k = 0; k < net_.interfaces().size(); ++k) {
        const auto& itf = net_.interfaces()[k];
        bool all_inter = true;
        std::vector<lp::Term> terms;
        for (const auto& m : itf.members) {
          const auto l = *net_.find_line(m.line_id);
          if (flow_var_[l] == SIZE_MAX) {
            all_inter = false;
            break;
          }
          terms.push_back({flow_var_[l], static_cast<double>(m.direction)});
        }
        if (!all_inter) continue;
        interface_enforced_[k] = true;
        for (const auto& m : itf.members) covered[*net_.find_line(m.line_id)] = true;
        add_flow_limit(merge(std::move(terms)), itf.ttc_mw, itf.id, true);
      }
    }
    line_enforced_.assign(net_.line_count(), false);
    for (std::size_t l = 0; l < net_.line_count(); ++l) {
      if (flow_var_[l] == SIZE_MAX || covered[l] || !net_.is_monitored(l, regime_.monitored_profile)) continue;
      line_enforced_[l] = true;
      add_flow_limit({{flow_var_[l], 1.0}}, net_.lines()[l].limit_mw, net_.lines()[l].id, false);
    }
  }

  void build_copper() {
    std::vector<lp::Term> terms;
    for (std::size_t g = 0; g < gens_.size(); ++g) terms.push_back({p_var_[g], 1.0});
    for (std::size_t b = 0; b < net_.bus_count(); ++b)
      if (c_var_[b] != SIZE_MAX) terms.push_back({c_var_[b], 1.0});
    const double total = std::accumulate(loads_.begin(), loads_.end(), 0.0);
    balance_rows_.push_back(add_row(std::move(terms), lp::Relation::equal, total, "balance:system"));
    line_enforced_.assign(net_.line_count(), false);
    interface_enforced_.assign(net_.interfaces().size(), false);
  }

  void build_system_rows() {
    if (regime_.reserve_req_mw > 0.0) {
      // sum of headroom (upper - P) over online units >= requirement
      std::vector<lp::Term> terms;
      double upper_total = 0.0;
      for (std::size_t g = 0; g < gens_.size(); ++g) {
        if (hi_[g] <= 0.0) continue;
        terms.push_back({p_var_[g], -1.0});
        upper_total += hi_[g];
      }
      reserve_row_ = add_row(std::move(terms), lp::Relation::greater_equal,
                             regime_.reserve_req_mw - upper_total, "reserve");
    }
    if (regime_.min_sync_mw > 0.0) {
      std::vector<lp::Term> terms;
      for (std::size_t g = 0; g < gens_.size(); ++g)
        if (gens_[g].synchronous && hi_[g] > 0.0) terms.push_back({p_var_[g], 1.0});
      min_sync_row_ = add_row(std::move(terms), lp::Relation::greater_equal, regime_.min_sync_mw,
                              "min_sync");
    }
  }

  static std::vector<lp::Term> merge(std::vector<lp::Term> terms) {
    std::map<std::size_t, double> acc;
    for (const auto& t : terms) acc[t.var] += t.coeff;
    std::vector<lp::Term> out;
    for (const auto& [v, c] : acc)
      if (c != 0.0) out.push_back({v, c});
    return out;
  }

  const Network& net_;
  std::span<const GeneratorSpec> gens_;
  const ConstraintRegime& regime_;
  std::span<const double> loads_;
  std::span<const double> lo_;
  std::span<const double> hi_;
  std::span<const std::size_t> gen_bus_;
  const PtdfMatrix& ptdf_;
  bool elastic_;

  lp::LinearProgram lp_;
  std::vector<std::size_t> p_var_;
  std::vector<std::size_t> c_var_;
  std::vector<std::size_t> theta_var_;
  std::vector<std::size_t> flow_var_;
  std::vector<std::size_t> balance_rows_;
  std::vector<FlowRow> flow_rows_;
  std::vector<bool> line_enforced_;
  std::vector<bool> interface_enforced_;
  std::optional<std::size_t> reserve_row_;
  std::optional<std::size_t> min_sync_row_;
  std::vector<std::pair<std::size_t, std::size_t>> slacks_;  // (slack var, row)
};

std::vector<std::vector<std::size_t>> equal_cost_groups(std::span<const GeneratorSpec> gens,
                                                        std::span<const double> lo,
                                                        std::span<const double> hi) {
  std::map<double, std::vector<std::size_t>> by_ic;
  for (std::size_t g = 0; g < gens.size(); ++g)
    if (hi[g] > lo[g] + kBoundFlagMw) by_ic[gens[g].ic].push_back(g);
  std::vector<std::vector<std::size_t>> groups;
  for (auto& [ic, members] : by_ic)
    if (members.size() >= 2) groups.push_back(std::move(members));
  return groups;
}

}  // namespace

std::vector<double> net_injection(const Network& net, std::span<const GeneratorSpec> gens,
                                  const DispatchResult& result) {
  std::vector<double> inj(net.bus_count(), 0.0);
  for (std::size_t g = 0; g < gens.size(); ++g) inj[net.bus_index(gens[g].bus_id)] += result.gen_mw[g];
  for (std::size_t b = 0; b < net.bus_count(); ++b) inj[b] -= result.served_load_mw(b);
  return inj;
}

DispatchResult clear(const Network& net, std::span<const GeneratorSpec> gens,
                     const ConstraintRegime& regime, const DispatchOptions& options) {
  if (regime.reserve_req_mw < 0.0 || regime.min_sync_mw < 0.0)
    throw Error(ErrorCode::contract, "regime " + regime.name + " has a negative requirement");
  const std::size_t ng = gens.size();
  std::vector<std::size_t> gen_bus(ng);
  for (std::size_t g = 0; g < ng; ++g) {
    validate_generator(gens[g]);
    gen_bus[g] = net.bus_index(gens[g].bus_id);
  }
  if (options.committed && options.committed->size() != ng)
    throw Error(ErrorCode::contract, "commitment vector size mismatch");

  std::optional<PtdfMatrix> own_ptdf;
  if (!options.ptdf) own_ptdf = build_ptdf(net);
  const PtdfMatrix& ptdf = options.ptdf ? *options.ptdf : *own_ptdf;

  const std::vector<double> loads = options.bus_loads_mw ? *options.bus_loads_mw : net.bus_loads();
  if (loads.size() != net.bus_count()) throw Error(ErrorCode::contract, "bus load vector size mismatch");
  for (std::size_t b = 0; b < loads.size(); ++b) {
    if (loads[b] < 0.0) throw Error(ErrorCode::contract, "negative load at bus " + net.buses()[b].id);
    if (loads[b] > 0.0 && !(net.buses()[b].wtp > 0.0))
      throw Error(ErrorCode::contract, "load without willingness to pay at bus " + net.buses()[b].id);
  }

  DispatchResult r;
  r.mode = regime.mode;
  r.regime_name = regime.name;
  r.load_mw = loads;
  r.curtailed_mw.assign(net.bus_count(), 0.0);
  r.gen_mw.assign(ng, 0.0);
  r.gen_lower.resize(ng);
  r.gen_upper.resize(ng);
  r.at_upper.assign(ng, false);
  r.at_lower.assign(ng, false);
  r.forced_bound.assign(ng, false);
  r.bus_balance_index.resize(net.bus_count());
  switch (regime.mode) {
    case ClearingMode::nodal:
      for (std::size_t b = 0; b < net.bus_count(); ++b) {
        r.balance_keys.push_back(net.buses()[b].id);
        r.bus_balance_index[b] = b;
      }
      break;
    case ClearingMode::zonal:
      r.balance_keys = net.zones();
      for (std::size_t b = 0; b < net.bus_count(); ++b) r.bus_balance_index[b] = net.zone_of_bus(b);
      break;
    case ClearingMode::copper_plate:
      r.balance_keys = {"system"};
      std::fill(r.bus_balance_index.begin(), r.bus_balance_index.end(), 0);
      break;
  }
  r.balance_duals.assign(r.balance_keys.size(), 0.0);

  double cap_total = 0.0;
  bool bounds_ok = true;
  for (std::size_t g = 0; g < ng; ++g) {
    const auto& gen = gens[g];
    const bool on = !options.committed || (*options.committed)[g];
    double lo = on ? gen.p_min : 0.0;
    double hi = on ? gen.p_max : 0.0;
    if (on && options.apply_forced_bounds) {
      if (gen.forced_min) lo = std::max(lo, *gen.forced_min);
      if (gen.forced_max) hi = std::min(hi, *gen.forced_max);
    }
    r.gen_lower[g] = lo;
    r.gen_upper[g] = hi;
    cap_total += hi;
    if (lo > hi) {
      bounds_ok = false;
      r.violations.push_back("generator " + gen.id + " bounds are inconsistent: lower " + fmt_mw(lo) +
                             " MW above upper " + fmt_mw(hi) + " MW");
    }
  }
  const double load_total = std::accumulate(loads.begin(), loads.end(), 0.0);
  if (cap_total + kBalanceToleranceMw < load_total) {
    bounds_ok = false;
    r.violations.push_back("available capacity " + fmt_mw(cap_total) + " MW is below load " +
                           fmt_mw(load_total) + " MW");
  }
  auto fill_flows = [&]() {
    const auto inj = net_injection(net, gens, r);
    auto flows = evaluate_flows(net, ptdf, inj, kBoundFlagMw);
    r.line_flow_mw = flows.flow_mw;
    r.interface_flow_mw = flows.interface_flow_mw;
    return flows;
  };
  if (!bounds_ok) {
    r.status = lp::Status::infeasible;
    r.line_flow_mw.assign(net.line_count(), 0.0);
    r.interface_flow_mw.assign(net.interfaces().size(), 0.0);
    return r;
  }

  ModelBuilder stage1(net, gens, regime, loads, r.gen_lower, r.gen_upper, gen_bus,
                      options.allow_curtailment, ptdf, false);
  const auto sol1 = lp::solve(stage1.lp(), options.tolerances);
  r.status = sol1.status;
  if (sol1.status == lp::Status::unbounded)
    throw Error(ErrorCode::numerical, "clearing problem reported unbounded");
  if (sol1.status == lp::Status::infeasible) {
    ModelBuilder diag(net, gens, regime, loads, r.gen_lower, r.gen_upper, gen_bus,
                      options.allow_curtailment, ptdf, true);
    const auto ds = lp::solve(diag.lp(), options.tolerances);
    if (ds.status == lp::Status::optimal) {
      std::map<std::size_t, double> by_row;
      for (const auto& [var, row] : diag.elastic_slacks()) by_row[row] += ds.primal[var];
      for (const auto& [row, amount] : by_row) {
        if (amount > options.tolerances.feasibility)
          r.violations.push_back("constraint " + diag.lp().constraints()[row].label +
                                 " cannot be met (short by " + fmt_mw(amount) + " MW)");
      }
    }
    if (r.violations.empty()) r.violations.push_back("clearing problem is infeasible");
    r.line_flow_mw.assign(net.line_count(), 0.0);
    r.interface_flow_mw.assign(net.interfaces().size(), 0.0);
    return r;
  }
  r.feasible = true;

  auto physically_ok = [&](const ModelBuilder& mb, const lp::Solution& s) {
    std::vector<double> inj(net.bus_count(), 0.0);
    for (std::size_t g = 0; g < ng; ++g) inj[gen_bus[g]] += mb.gen_value(s, g);
    for (std::size_t b = 0; b < net.bus_count(); ++b) inj[b] += mb.curtail_value(s, b) - loads[b];
    const auto fr = evaluate_flows(net, ptdf, inj, kBoundFlagMw);
    return fr.overloaded.empty() && fr.interface_overloaded.empty();
  };

  // Lexicographic tie-break over the optimal face: physical feasibility, then
  // pro-rata sharing among equal-cost units. Prices always come from stage 1.
  const double cap = sol1.objective_value + 1e-9 * (1.0 + std::abs(sol1.objective_value));
  const auto groups = equal_cost_groups(gens, r.gen_lower, r.gen_upper);
  const bool want_physical = options.prefer_physical_feasibility && !physically_ok(stage1, sol1);

  std::optional<ModelBuilder> chosen_builder;
  std::optional<lp::Solution> chosen_sol;
  auto try_stage = [&](bool physical, bool pro_rata) {
    ModelBuilder mb(net, gens, regime, loads, r.gen_lower, r.gen_upper, gen_bus,
                    options.allow_curtailment, ptdf, false);
    mb.add_cost_cap(cap);
    // Restrict to the optimal face of stage 1: complementary slackness with its
    // duals pins every priced bound and row.
    auto& face = mb.lp();
    for (std::size_t j = 0; j < stage1.lp().variable_count(); ++j) {
      if (std::abs(sol1.reduced_costs[j]) > options.tolerances.optimality) face.fix_variable(j, sol1.primal[j]);
    }
    for (std::size_t i = 0; i < stage1.lp().constraint_count(); ++i) {
      if (std::abs(sol1.duals[i]) > options.tolerances.optimality) face.set_relation(i, lp::Relation::equal);
    }
    if (physical) mb.add_physical_limits();
    if (pro_rata) mb.set_pro_rata_objective(groups);
    auto s = lp::solve(mb.lp(), options.tolerances);
    if (s.status != lp::Status::optimal) return false;
    chosen_builder.emplace(std::move(mb));
    chosen_sol = std::move(s);
    return true;
  };
  if (options.break_ties && !groups.empty()) {
    if (!(options.prefer_physical_feasibility && try_stage(true, true))) try_stage(false, true);
  } else if (options.break_ties && want_physical) {
    try_stage(true, false);
  }
  const ModelBuilder& mb = chosen_builder ? *chosen_builder : stage1;
  const lp::Solution& sol = chosen_sol ? *chosen_sol : sol1;

  for (std::size_t g = 0; g < ng; ++g) {
    double p = std::clamp(mb.gen_value(sol, g), r.gen_lower[g], r.gen_upper[g]);
    if (p - r.gen_lower[g] < kBoundSnapMw) p = r.gen_lower[g];
    if (r.gen_upper[g] - p < kBoundSnapMw) p = r.gen_upper[g];
    r.gen_mw[g] = p;
    r.at_upper[g] = p >= r.gen_upper[g] - kBoundFlagMw;
    r.at_lower[g] = p <= r.gen_lower[g] + kBoundFlagMw;
    if (options.apply_forced_bounds) {
      const auto& gen = gens[g];
      const bool min_active = gen.forced_min && *gen.forced_min > gen.p_min;
      const bool max_active = gen.forced_max && *gen.forced_max < gen.p_max;
      r.forced_bound[g] = (min_active && r.at_lower[g]) || (max_active && r.at_upper[g]);
    }
  }
  for (std::size_t b = 0; b < net.bus_count(); ++b) {
    double c = std::clamp(mb.curtail_value(sol, b), 0.0, loads[b]);
    if (c < kBoundSnapMw) c = 0.0;
    r.curtailed_mw[b] = c;
  }

  const auto flows = fill_flows();
  for (auto l : flows.overloaded) {
    const auto& ln = net.lines()[l];
    r.violations.push_back("line " + ln.id + " flow " + fmt_mw(flows.flow_mw[l]) + " MW exceeds limit " +
                           fmt_mw(ln.limit_mw) + " MW");
  }
  for (auto k : flows.interface_overloaded) {
    const auto& itf = net.interfaces()[k];
    r.violations.push_back("interface " + itf.id + " flow " + fmt_mw(flows.interface_flow_mw[k]) +
                           " MW exceeds limit " + fmt_mw(itf.ttc_mw) + " MW");
  }
  r.physically_feasible = flows.overloaded.empty() && flows.interface_overloaded.empty();

  for (std::size_t k = 0; k < stage1.balance_rows().size(); ++k)
    r.balance_duals[k] = sol1.duals[stage1.balance_rows()[k]];
  for (const auto& fr : stage1.flow_rows()) {
    const double mu = -(sol1.duals[fr.upper_row] + sol1.duals[fr.lower_row]);
    r.flow_duals.push_back({fr.element, fr.is_interface, mu, fr.limit});
  }
  if (stage1.reserve_row()) r.reserve_dual = sol1.duals[*stage1.reserve_row()];
  if (stage1.min_sync_row()) r.min_sync_dual = sol1.duals[*stage1.min_sync_row()];
  const auto& rows = stage1.lp().constraints();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (std::abs(sol1.duals[i]) > options.tolerances.optimality)
      r.binding.push_back({rows[i].label, sol1.duals[i]});
  }

  double cost = 0.0, curtail_value = 0.0;
  for (std::size_t g = 0; g < ng; ++g) cost += gens[g].ic * r.gen_mw[g];
  for (std::size_t b = 0; b < net.bus_count(); ++b) curtail_value += net.buses()[b].wtp * r.curtailed_mw[b];
  r.total_cost = cost;
  r.objective_value = cost + curtail_value;
  return r;
}

namespace {

void require_mode(const ConstraintRegime& regime, ClearingMode mode, const char* op) {
  if (regime.mode != mode)
    throw Error(ErrorCode::contract, std::string(op) + " requires a " + to_string(mode) +
                                         " regime, got " + to_string(regime.mode));
}

}  // namespace

DispatchResult clear_nodal(const Network& net, std::span<const GeneratorSpec> gens,
                           const ConstraintRegime& regime, DispatchOptions options) {
  require_mode(regime, ClearingMode::nodal, "clear_nodal");
  options.apply_forced_bounds = false;
  return clear(net, gens, regime, options);
}

DispatchResult clear_zonal(const Network& net, std::span<const GeneratorSpec> gens,
                           const ConstraintRegime& regime, DispatchOptions options) {
  require_mode(regime, ClearingMode::zonal, "clear_zonal");
  options.apply_forced_bounds = false;
  return clear(net, gens, regime, options);
}

DispatchResult clear_copper_plate(const Network& net, std::span<const GeneratorSpec> gens,
                                  DispatchOptions options) {
  ConstraintRegime regime;
  regime.name = "copper_plate";
  regime.mode = ClearingMode::copper_plate;
  regime.enforce_interfaces = false;
  options.apply_forced_bounds = false;
  return clear(net, gens, regime, options);
}

DispatchResult clear_with_forced_bounds(const Network& net, std::span<const GeneratorSpec> gens,
                                        const ConstraintRegime& regime, DispatchOptions options) {
  require_mode(regime, ClearingMode::zonal, "clear_with_forced_bounds");
  options.apply_forced_bounds = true;
  return clear(net, gens, regime, options);
}

}  // namespace gridclear
