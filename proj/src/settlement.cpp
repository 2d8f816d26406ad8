#include "gridclear/settlement.hpp"

#include <algorithm>
#include <cmath>

#include "gridclear/error.hpp"

namespace gridclear {

namespace {

constexpr double kMoneyTol = 1e-6;
constexpr double kOnlineMw = 1e-9;

bool agrees(double a, double b) { return std::abs(a - b) <= kMoneyTol * (1.0 + std::max(std::abs(a), std::abs(b))); }

void require_identity(bool ok, const std::string& name) {
  if (!ok) throw Error(ErrorCode::contract, "settlement identity violated: " + name);
}

bool is_lossless(const PriceReport& prices) {
  for (const auto& hour : prices.components)
    for (const auto& c : hour)
      if (c.loss != 0.0) return false;
  return true;
}

void finish_system_totals(SettlementReport& rep) {
  for (const auto& g : rep.generators) {
    rep.total_revenue += g.market_revenue;
    rep.total_uplift += g.uplift;
    rep.total_cost += g.as_cleared_cost;
    rep.con_payment_total += g.con_payment;
    rep.coff_payment_total += g.coff_payment;
  }
  rep.consumer_total_payment = rep.consumer_market_payment + rep.total_uplift;
  rep.social_surplus = rep.utility - rep.total_cost;
  rep.producer_surplus = rep.total_revenue + rep.total_uplift - rep.total_cost;
  rep.consumer_surplus = rep.utility - rep.consumer_total_payment;
}

void check_identities(const SettlementReport& rep) {
  require_identity(agrees(rep.consumer_total_payment, rep.consumer_market_payment + rep.total_uplift),
                   "consumer total payment = market payment + uplift");
  double receipts = 0.0;
  for (const auto& g : rep.generators) receipts += g.total_receipts();
  require_identity(agrees(rep.consumer_total_payment, receipts + rep.congestion_rent),
                   "consumer total payment = generator receipts + congestion rent");
  require_identity(agrees(rep.social_surplus, rep.producer_surplus + rep.consumer_surplus + rep.congestion_rent),
                   "social surplus = producer + consumer surplus + congestion rent");
}

}  // namespace

std::vector<std::vector<double>> generator_prices(const Network& net, std::span<const GeneratorSpec> gens,
                                                  const PriceReport& prices) {
  std::vector<std::vector<double>> out;
  for (const auto& g : gens) {
    const auto key = settlement_key(net, prices, net.bus_index(g.bus_id));
    std::vector<double> row;
    for (std::size_t t = 0; t < prices.hours(); ++t) row.push_back(prices.price(t, key));
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<double> settle_energy(const Network& net, std::span<const GeneratorSpec> gens,
                                  const PriceReport& prices, const std::vector<std::vector<double>>& q_mw) {
  if (q_mw.size() != gens.size()) throw Error(ErrorCode::contract, "quantity matrix does not match generators");
  const auto price = generator_prices(net, gens, prices);
  std::vector<double> rev(gens.size(), 0.0);
  for (std::size_t g = 0; g < gens.size(); ++g) {
    if (q_mw[g].size() != prices.hours())
      throw Error(ErrorCode::contract, "quantities for " + gens[g].id + " do not cover the priced hours");
    for (std::size_t t = 0; t < prices.hours(); ++t) rev[g] += price[g][t] * q_mw[g][t];
  }
  return rev;
}

std::vector<double> compute_uplift(std::span<const double> market_revenue, std::span<const double> as_cleared_cost) {
  if (market_revenue.size() != as_cleared_cost.size())
    throw Error(ErrorCode::contract, "revenue and cost vectors differ in length");
  std::vector<double> out(market_revenue.size());
  for (std::size_t g = 0; g < out.size(); ++g) out[g] = std::max(0.0, as_cleared_cost[g] - market_revenue[g]);
  return out;
}

RedispatchPayments settle_redispatch(const RedispatchRecord& record, std::span<const GeneratorSpec> gens,
                                     const std::vector<std::vector<double>>& price) {
  const std::size_t ng = record.gen_ids.size();
  if (gens.size() != ng || price.size() != ng)
    throw Error(ErrorCode::contract, "redispatch record, generators and prices are not aligned");
  RedispatchPayments out;
  out.con_mwh.assign(ng, 0.0);
  out.coff_mwh.assign(ng, 0.0);
  out.con_payment.assign(ng, 0.0);
  out.coff_payment.assign(ng, 0.0);
  for (std::size_t g = 0; g < ng; ++g) {
    if (gens[g].id != record.gen_ids[g]) throw Error(ErrorCode::contract, "redispatch record order mismatch");
    if (price[g].size() != record.delta_mw[g].size())
      throw Error(ErrorCode::contract, "prices and redispatch record cover different hours");
    for (std::size_t t = 0; t < record.delta_mw[g].size(); ++t) {
      const double d = record.delta_mw[g][t];
      if (d > 0.0) {
        out.con_mwh[g] += d;
        out.con_payment[g] += d * gens[g].ic;
      } else if (d < 0.0) {
        out.coff_mwh[g] += -d;
        out.coff_payment[g] += -d * std::max(0.0, price[g][t] - gens[g].ic);
      }
    }
  }
  return out;
}

double dual_congestion_rent(const DispatchResult& result) {
  double rent = 0.0;
  for (const auto& fd : result.flow_duals) rent += std::abs(fd.mu) * fd.limit_mw;
  return rent;
}

SettlementReport summarize(const Network& net, std::span<const GeneratorSpec> gens, const DispatchResult& result,
                           const PriceReport& prices) {
  if (!result.feasible) throw Error(ErrorCode::contract, "cannot settle an infeasible clearing");
  if (prices.hours() != 1) throw Error(ErrorCode::contract, "single-interval settlement needs one priced hour");
  SettlementReport rep;
  rep.scheme = prices.scheme;
  std::vector<std::vector<double>> q;
  for (double mw : result.gen_mw) q.push_back({mw});
  const auto revenue = settle_energy(net, gens, prices, q);
  for (std::size_t g = 0; g < gens.size(); ++g) {
    GeneratorSettlement s;
    s.id = gens[g].id;
    s.price_key = settlement_key(net, prices, net.bus_index(gens[g].bus_id));
    s.mwh = result.gen_mw[g];
    s.market_revenue = revenue[g];
    s.as_cleared_cost = gens[g].ic * s.mwh + (s.mwh > kOnlineMw ? gens[g].nlc : 0.0);
    s.uplift = std::max(0.0, s.as_cleared_cost - s.market_revenue);
    rep.generators.push_back(std::move(s));
  }
  for (std::size_t b = 0; b < net.bus_count(); ++b) {
    const double served = result.served_load_mw(b);
    rep.served_mwh += served;
    rep.curtailed_mwh += result.curtailed_mw[b];
    rep.utility += net.buses()[b].wtp * served;
    if (served != 0.0) rep.consumer_market_payment += prices.price(0, settlement_key(net, prices, b)) * served;
  }
  finish_system_totals(rep);

  const double payment_gap = rep.consumer_market_payment - rep.total_revenue;
  if (prices.scheme != PricingScheme::uniform_smp && is_lossless(prices)) {
    rep.congestion_rent = dual_congestion_rent(result);
    require_identity(agrees(rep.congestion_rent, payment_gap),
                     "congestion rent = consumer market payment - generator revenue");
  } else {
    rep.congestion_rent = payment_gap;
  }
  check_identities(rep);
  return rep;
}

SettlementReport summarize_horizon(const Network& net, std::span<const UcGenerator> gens, const UcSchedule& schedule,
                                   const PriceReport& prices, const std::vector<std::vector<double>>& bus_loads_mw,
                                   const RedispatchRecord* record) {
  if (!schedule.feasible) throw Error(ErrorCode::contract, "cannot settle an infeasible schedule");
  if (prices.hours() != schedule.hours || bus_loads_mw.size() != schedule.hours)
    throw Error(ErrorCode::contract, "prices, loads and schedule cover different hours");
  std::vector<GeneratorSpec> specs;
  for (const auto& g : gens) specs.push_back(g.spec);

  SettlementReport rep;
  rep.scheme = prices.scheme;
  const auto revenue = settle_energy(net, specs, prices, schedule.dispatch_mw);
  std::optional<RedispatchPayments> rd;
  if (record) rd = settle_redispatch(*record, specs, generator_prices(net, specs, prices));
  for (std::size_t g = 0; g < gens.size(); ++g) {
    GeneratorSettlement s;
    s.id = specs[g].id;
    s.price_key = settlement_key(net, prices, net.bus_index(specs[g].bus_id));
    s.market_revenue = revenue[g];
    for (std::size_t t = 0; t < schedule.hours; ++t) {
      s.mwh += schedule.dispatch_mw[g][t];
      s.as_cleared_cost += specs[g].ic * schedule.dispatch_mw[g][t];
      if (schedule.committed[g][t]) s.as_cleared_cost += specs[g].nlc;
      if (schedule.started[g][t]) s.as_cleared_cost += specs[g].suc;
    }
    s.uplift = std::max(0.0, s.as_cleared_cost - s.market_revenue);
    if (rd) {
      s.con_mwh = rd->con_mwh[g];
      s.coff_mwh = rd->coff_mwh[g];
      s.con_payment = rd->con_payment[g];
      s.coff_payment = rd->coff_payment[g];
    }
    rep.generators.push_back(std::move(s));
  }
  for (std::size_t t = 0; t < schedule.hours; ++t) {
    if (bus_loads_mw[t].size() != net.bus_count()) throw Error(ErrorCode::contract, "hourly load vector size mismatch");
    for (std::size_t b = 0; b < net.bus_count(); ++b) {
      const double served = bus_loads_mw[t][b];
      rep.served_mwh += served;
      rep.utility += net.buses()[b].wtp * served;
      if (served != 0.0) rep.consumer_market_payment += prices.price(t, settlement_key(net, prices, b)) * served;
    }
  }
  finish_system_totals(rep);
  const double payment_gap = rep.consumer_market_payment - rep.total_revenue;
  if (prices.scheme != PricingScheme::uniform_smp && is_lossless(prices)) {
    rep.congestion_rent = 0.0;
    for (const auto& hour : schedule.hourly) rep.congestion_rent += dual_congestion_rent(hour);
    require_identity(agrees(rep.congestion_rent, payment_gap),
                     "congestion rent = consumer market payment - generator revenue");
  } else {
    rep.congestion_rent = payment_gap;
  }
  check_identities(rep);
  return rep;
}

}  // namespace gridclear
