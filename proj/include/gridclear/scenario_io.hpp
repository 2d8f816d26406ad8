#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridclear/commitment.hpp"
#include "gridclear/dispatch.hpp"
#include "gridclear/error.hpp"
#include "gridclear/grid_model.hpp"
#include "gridclear/pricing.hpp"

namespace gridclear {

inline constexpr const char* kScenarioFormat = "gridclear-scenario/1";

/// Market designs a scenario can be run under.
///   nodal         nodal clearing, LMP settlement
///   zonal         zonal clearing, zonal price settlement
///   zonal_forced  zonal clearing with operator bounds, zonal prices plus uplift
///   uniform       zonal clearing, settled at the screened SMP
///   copper_plate  no transmission limits, settled at the screened SMP
enum class MarketScheme { nodal, zonal, zonal_forced, uniform, copper_plate };

const char* to_string(MarketScheme s);
std::optional<MarketScheme> parse_market_scheme(std::string_view text);
ClearingMode clearing_mode_of(MarketScheme s);

struct ScenarioMetadata {
  std::string name;
  std::string currency = "$/MWh";  // opaque label, never converted
  std::string season;              // spring, summer, fall, winter or empty
  std::string time_of_day;         // night, morning, daytime, evening or empty
  std::string description;
};

struct LoadProfile {
  std::string bus_id;
  std::vector<double> mw;  // one value per hour of the horizon
};

struct ForcedBoundOverride {
  std::string gen_id;
  std::optional<double> min_mw;
  std::optional<double> max_mw;
};

struct BidDeviationRequest {
  std::string gen_id;
  double offered_ic = 0.0;
};

struct RunSection {
  std::vector<MarketScheme> schemes;
  std::map<MarketScheme, std::string> scheme_regimes;  // regime name per scheme
  std::size_t horizon_h = 1;
  std::vector<ForcedBoundOverride> forced_bounds;
  std::vector<BidDeviationRequest> bid_deviations;
  SmpGrouping smp_grouping = SmpGrouping::system;
  std::optional<std::string> dauc_regime;
  std::optional<std::string> ruc_regime;
};

struct Scenario {
  ScenarioMetadata metadata;
  Network network;
  std::vector<UcGenerator> generators;
  std::vector<LoadProfile> load_profiles;
  std::vector<ConstraintRegime> regimes;
  RunSection run;

  /// Single-period specs with the run section's forced-bound overrides applied.
  std::vector<GeneratorSpec> generator_specs() const;
  /// Generators with the forced-bound overrides applied.
  std::vector<UcGenerator> uc_generators() const;
  /// [hour][bus]; a profile replaces the bus's static load for every hour.
  std::vector<std::vector<double>> hourly_bus_loads() const;
  std::optional<std::size_t> find_generator(std::string_view id) const;
  const ConstraintRegime* find_regime(std::string_view name) const;
  /// Named regime mapped to the scheme, else the first regime with a matching
  /// mode, else an all-lines regime of that mode.
  ConstraintRegime regime_for(MarketScheme s) const;
};

/// One validation finding. Codes are stable across releases:
///   E001 parse error            E010 unknown generator
///   E002 schema                 E011 bad enumeration value
///   E003 empty network          E012 horizon mismatch
///   E004 duplicate id           E013 empty interface
///   E005 unknown reference      E014 self loop
///   E006 slack bus              E015 missing regime
///   E007 invalid number         E016 format version
///   E008 disconnected network   E017 generator bounds
///   E009 unused profile tag     E018 load without willingness to pay
struct ScenarioIssue {
  std::string code;
  std::string path;  // e.g. generators[2].bus
  std::string message;

  std::string to_string() const;
};

/// Every issue found in a file. Thrown instead of returning a partial scenario.
class ScenarioError : public Error {
 public:
  explicit ScenarioError(std::vector<ScenarioIssue> issues);
  const std::vector<ScenarioIssue>& issues() const noexcept { return issues_; }
  bool has_code(std::string_view code) const;

 private:
  std::vector<ScenarioIssue> issues_;
};

Scenario parse_scenario(std::string_view text);
/// Throws Error(io) when the file cannot be read and ScenarioError otherwise.
Scenario load_scenario(const std::string& path);
/// Canonical text form; parse_scenario(serialize_scenario(s)) reproduces s.
std::string serialize_scenario(const Scenario& s);

}  // namespace gridclear
