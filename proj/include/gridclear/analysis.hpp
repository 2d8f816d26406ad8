#pragma once

#include <span>
#include <string>
#include <vector>

#include "gridclear/commitment.hpp"
#include "gridclear/dispatch.hpp"
#include "gridclear/pricing.hpp"

namespace gridclear {

/// Outcome of one unit offering offered_ic instead of its true cost. Clearing
/// uses the offer; profit and welfare always use true costs.
struct BidDeviation {
  std::string gen_id;
  PricingScheme scheme = PricingScheme::uniform_smp;
  double true_ic = 0.0;
  double offered_ic = 0.0;

  double truthful_mw = 0.0;
  double deviated_mw = 0.0;
  double truthful_price = 0.0;
  double deviated_price = 0.0;
  double truthful_profit = 0.0;
  double deviated_profit = 0.0;
  double truthful_cost = 0.0;  // system cost at true costs
  double deviated_cost = 0.0;

  double mw_delta() const { return deviated_mw - truthful_mw; }
  double price_delta() const { return deviated_price - truthful_price; }
  double profit_delta() const { return deviated_profit - truthful_profit; }
  double welfare_delta() const { return truthful_cost - deviated_cost; }
};

/// Uniform pricing screens the marginal set with the given grouping; nodal
/// pricing needs a nodal regime. Throws Error(contract) for an unknown unit.
BidDeviation evaluate_bid_deviation(const Network& net, std::span<const GeneratorSpec> gens,
                                    const ConstraintRegime& regime, PricingScheme scheme,
                                    const std::string& gen_id, double offered_ic,
                                    SmpGrouping grouping = SmpGrouping::system);

struct RedispatchZoneRow {
  std::string zone;
  double constrained_on_mwh = 0.0;
  double constrained_off_mwh = 0.0;
};

struct RedispatchTable {
  std::vector<RedispatchZoneRow> rows;
  double total_on_mwh = 0.0;
  double total_off_mwh = 0.0;
};

RedispatchTable redispatch_summary(const RedispatchRecord& record);

struct PriceSeriesStats {
  double mean = 0.0;
  double median = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
  std::vector<double> normalized;  // series divided by its mean
};

/// Percentile by linear interpolation at rank p * (n - 1) of the sorted series.
double percentile(std::vector<double> values, double p);

/// Throws Error(contract) for an empty or non-finite series or a zero mean.
PriceSeriesStats price_stats(std::span<const double> series);

struct PriceSeries {
  std::vector<std::string> timestamps;
  std::vector<double> prices;
};

/// Two-column CSV (timestamp, price) with a header row. Throws Error(io).
PriceSeries load_price_series_csv(const std::string& path);

}  // namespace gridclear
