#include "gridclear/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "gridclear/error.hpp"

namespace gridclear {

namespace {

double price_for(const Network& net, std::span<const GeneratorSpec> gens, const DispatchResult& r,
                 PricingScheme scheme, SmpGrouping grouping, std::size_t g) {
  const std::size_t bus = net.bus_index(gens[g].bus_id);
  if (scheme != PricingScheme::uniform_smp) return r.price_at_bus(bus);
  SmpOptions o;
  o.grouping = grouping;
  const auto smp = form_smp(net, gens, r, o);
  return grouping == SmpGrouping::system ? smp.smp[0] : smp.smp[net.zone_of_bus(bus)];
}

double true_cost(std::span<const GeneratorSpec> truth, const DispatchResult& r) {
  double c = 0.0;
  for (std::size_t g = 0; g < truth.size(); ++g) c += truth[g].ic * r.gen_mw[g];
  return c;
}

}  // namespace

BidDeviation evaluate_bid_deviation(const Network& net, std::span<const GeneratorSpec> gens,
                                    const ConstraintRegime& regime, PricingScheme scheme,
                                    const std::string& gen_id, double offered_ic, SmpGrouping grouping) {
  const auto it = std::find_if(gens.begin(), gens.end(), [&](const auto& g) { return g.id == gen_id; });
  if (it == gens.end()) throw Error(ErrorCode::contract, "unknown generator " + gen_id);
  if (!(offered_ic >= 0.0) || !std::isfinite(offered_ic))
    throw Error(ErrorCode::contract, "offered cost must be finite and non-negative");
  if (scheme == PricingScheme::nodal && regime.mode != ClearingMode::nodal)
    throw Error(ErrorCode::contract, "nodal pricing needs a nodal regime");
  if (scheme == PricingScheme::zonal && regime.mode != ClearingMode::zonal)
    throw Error(ErrorCode::contract, "zonal pricing needs a zonal regime");
  const auto g = static_cast<std::size_t>(it - gens.begin());

  std::vector<GeneratorSpec> offers(gens.begin(), gens.end());
  offers[g].ic = offered_ic;

  const auto truthful = clear(net, gens, regime);
  const auto deviated = clear(net, offers, regime);
  if (!truthful.feasible || !deviated.feasible)
    throw Error(ErrorCode::contract, "bid deviation analysis needs feasible clearings");

  BidDeviation out;
  out.gen_id = gen_id;
  out.scheme = scheme;
  out.true_ic = gens[g].ic;
  out.offered_ic = offered_ic;
  out.truthful_mw = truthful.gen_mw[g];
  out.deviated_mw = deviated.gen_mw[g];
  out.truthful_price = price_for(net, gens, truthful, scheme, grouping, g);
  out.deviated_price = price_for(net, offers, deviated, scheme, grouping, g);
  out.truthful_profit = (out.truthful_price - out.true_ic) * out.truthful_mw;
  out.deviated_profit = (out.deviated_price - out.true_ic) * out.deviated_mw;
  out.truthful_cost = true_cost(gens, truthful);
  out.deviated_cost = true_cost(gens, deviated);
  return out;
}

RedispatchTable redispatch_summary(const RedispatchRecord& record) {
  RedispatchTable t;
  for (std::size_t z = 0; z < record.zones.size(); ++z) {
    t.rows.push_back({record.zones[z], record.con_mwh[z], record.coff_mwh[z]});
    t.total_on_mwh += record.con_mwh[z];
    t.total_off_mwh += record.coff_mwh[z];
  }
  return t;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw Error(ErrorCode::contract, "percentile of an empty series");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::contract, "percentile rank must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double rank = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

PriceSeriesStats price_stats(std::span<const double> series) {
  if (series.empty()) throw Error(ErrorCode::contract, "price series is empty");
  for (double v : series)
    if (!std::isfinite(v)) throw Error(ErrorCode::contract, "price series contains a non-finite value");
  PriceSeriesStats s;
  s.mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
  if (s.mean == 0.0) throw Error(ErrorCode::contract, "price series has zero mean; cannot normalize");
  std::vector<double> v(series.begin(), series.end());
  s.median = percentile(v, 0.5);
  s.p10 = percentile(v, 0.1);
  s.p90 = percentile(v, 0.9);
  for (double x : series) s.normalized.push_back(x / s.mean);
  return s;
}

PriceSeries load_price_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open price series " + path);
  PriceSeries out;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw Error(ErrorCode::io, path + ":" + std::to_string(lineno) + ": expected timestamp,price");
    std::string price_text = line.substr(comma + 1);
    const auto first = price_text.find_first_not_of(" \t");
    const auto last = price_text.find_last_not_of(" \t");
    price_text = first == std::string::npos ? "" : price_text.substr(first, last - first + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(price_text.data(), price_text.data() + price_text.size(), v);
    if (price_text.empty() || ec != std::errc() || ptr != price_text.data() + price_text.size())
      throw Error(ErrorCode::io, path + ":" + std::to_string(lineno) + ": invalid price '" + price_text + "'");
    out.timestamps.push_back(line.substr(0, comma));
    out.prices.push_back(v);
  }
  if (!header_seen) throw Error(ErrorCode::io, path + ": missing header row");
  return out;
}

}  // namespace gridclear
