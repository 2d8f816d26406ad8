#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridclear/commitment.hpp"
#include "gridclear/dispatch.hpp"
#include "gridclear/grid_model.hpp"

namespace gridclear {

/// Avoided cost of a unit at output q: ic + nlc/q + suc/(q * hours_on).
struct StackPrice {
  std::string gen_id;
  std::size_t hour = 0;
  double sp = 0.0;
  double ic = 0.0;
  double nlc_share = 0.0;
  double suc_share = 0.0;
};

/// Throws Error(pricing_failure) for q <= 0 and Error(contract) for hours_on < 1.
StackPrice stack_price(const GeneratorSpec& gen, double q_mw, int hours_on, std::size_t hour = 0);

enum class ExclusionReason {
  not_dispatched,
  at_capacity,
  at_minimum,
  forced_bound,
  transmission_bound,
  constrained_on,
  constrained_off,
  stability_bound,
};

const char* to_string(ExclusionReason r);

struct Exclusion {
  std::string gen_id;
  ExclusionReason reason;
};

struct MarginalSet {
  std::size_t hour = 0;
  std::string group;  // "system" or a zone id
  std::vector<std::string> members;
  std::vector<Exclusion> excluded;
};

/// system: one SMP per hour. zone: one SMP per zone and hour.
enum class SmpGrouping { system, zone };

struct SmpOptions {
  SmpGrouping grouping = SmpGrouping::system;
  std::size_t hour = 0;
  std::optional<std::vector<int>> hours_on;  // per generator; 1 for every dispatched unit when absent
  // Units whose output differs from this reference schedule are constrained on/off.
  std::optional<std::vector<double>> reference_mw;
  double tolerance_mw = 1e-6;
};

struct SmpInterval {
  std::size_t hour = 0;
  std::vector<std::string> keys;  // "system" or zone ids
  std::vector<double> smp;
  std::vector<MarginalSet> marginal_sets;
  std::vector<StackPrice> stack_prices;  // members only
};

/// Screens the marginal set of one cleared interval and takes the highest
/// stack price in each group. An empty marginal set is Error(pricing_failure).
SmpInterval form_smp(const Network& net, std::span<const GeneratorSpec> gens, const DispatchResult& result,
                     const SmpOptions& options = {});

/// Hour-by-hour SMP of a commitment schedule.
std::vector<SmpInterval> form_smp(const Network& net, std::span<const UcGenerator> gens,
                                  const UcSchedule& schedule, SmpGrouping grouping = SmpGrouping::system,
                                  const UcSchedule* reference = nullptr);

enum class PricingScheme { uniform_smp, zonal, nodal };

const char* to_string(PricingScheme s);

struct PriceComponents {
  double energy = 0.0;
  double congestion = 0.0;
  double loss = 0.0;
};

struct PriceReport {
  PricingScheme scheme = PricingScheme::nodal;
  std::vector<std::string> keys;            // bus ids, zone ids, or "system"
  std::vector<std::vector<double>> prices;  // [hour][key]
  std::vector<std::vector<PriceComponents>> components;  // nodal only, [hour][bus]
  std::vector<MarginalSet> marginal_sets;  // uniform only

  std::size_t hours() const { return prices.size(); }
  /// Throws Error(contract) for an unknown key or hour.
  double price(std::size_t hour, std::string_view key) const;
  bool has_key(std::string_view key) const;
};

/// Key under which a unit at the given bus is settled in this report.
std::string settlement_key(const Network& net, const PriceReport& report, std::size_t bus);

PriceReport form_zonal_prices(const Network& net, const DispatchResult& result);

/// LMP = energy + congestion + loss with energy the reference-bus price,
/// congestion -sum(shift factor * flow dual) and loss energy * loss factor.
PriceReport form_nodal_prices(const Network& net, const DispatchResult& result, const PtdfMatrix& ptdf,
                              std::optional<std::vector<double>> loss_factors = std::nullopt);

PriceReport uniform_price_report(const std::vector<SmpInterval>& intervals);

}  // namespace gridclear
