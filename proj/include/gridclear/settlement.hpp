#pragma once

#include <span>
#include <string>
#include <vector>

#include "gridclear/commitment.hpp"
#include "gridclear/dispatch.hpp"
#include "gridclear/pricing.hpp"

namespace gridclear {

struct GeneratorSettlement {
  std::string id;
  std::string price_key;
  double mwh = 0.0;
  double market_revenue = 0.0;
  double as_cleared_cost = 0.0;  // ic * MWh + nlc * online hours + suc * starts
  double uplift = 0.0;
  double con_mwh = 0.0;
  double coff_mwh = 0.0;
  double con_payment = 0.0;
  double coff_payment = 0.0;

  double total_receipts() const { return market_revenue + uplift; }
};

struct SettlementReport {
  PricingScheme scheme = PricingScheme::nodal;
  std::vector<GeneratorSettlement> generators;

  double total_revenue = 0.0;
  double total_uplift = 0.0;
  double consumer_market_payment = 0.0;
  double consumer_total_payment = 0.0;  // market payment plus uplift
  double congestion_rent = 0.0;
  double total_cost = 0.0;
  double utility = 0.0;  // sum of wtp * served MWh
  double social_surplus = 0.0;
  double producer_surplus = 0.0;
  double consumer_surplus = 0.0;
  double served_mwh = 0.0;
  double curtailed_mwh = 0.0;
  double con_payment_total = 0.0;
  double coff_payment_total = 0.0;
};

/// Price of every generator in every hour of the report, [generator][hour].
std::vector<std::vector<double>> generator_prices(const Network& net, std::span<const GeneratorSpec> gens,
                                                  const PriceReport& prices);

/// Revenue = sum over hours of price * MW, q_mw is [generator][hour].
std::vector<double> settle_energy(const Network& net, std::span<const GeneratorSpec> gens,
                                  const PriceReport& prices, const std::vector<std::vector<double>>& q_mw);

std::vector<double> compute_uplift(std::span<const double> market_revenue, std::span<const double> as_cleared_cost);

struct RedispatchPayments {
  std::vector<double> con_mwh;
  std::vector<double> coff_mwh;
  std::vector<double> con_payment;   // positive deltas paid at ic
  std::vector<double> coff_payment;  // negative deltas paid the lost margin max(0, price - ic)
};

/// price_mw is [generator][hour].
RedispatchPayments settle_redispatch(const RedispatchRecord& record, std::span<const GeneratorSpec> gens,
                                     const std::vector<std::vector<double>>& price);

/// Sum of |flow dual| * limit over every enforced flow limit.
double dual_congestion_rent(const DispatchResult& result);

/// Single-interval settlement of a cleared dispatch. Throws Error(contract)
/// naming the identity when the accounts do not reconcile.
SettlementReport summarize(const Network& net, std::span<const GeneratorSpec> gens, const DispatchResult& result,
                           const PriceReport& prices);

/// Multi-hour settlement of a commitment schedule settled at the given
/// prices, with CON/COFF payments when a redispatch record is supplied.
SettlementReport summarize_horizon(const Network& net, std::span<const UcGenerator> gens, const UcSchedule& schedule,
                                   const PriceReport& prices, const std::vector<std::vector<double>>& bus_loads_mw,
                                   const RedispatchRecord* record = nullptr);

}  // namespace gridclear
