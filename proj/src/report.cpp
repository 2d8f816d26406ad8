#include "gridclear/report.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>

#include "gridclear/error.hpp"

namespace gridclear {

std::string fixed2(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, 2);
  std::string s(buf, res.ptr);
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

namespace {

constexpr const char* kNotAvailable = "Not Available";

// Small table builder shared by the CSV and markdown writers.
class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
  void row(std::vector<std::string> cells) {
    cells.resize(header_.size());
    rows_.push_back(std::move(cells));
  }

  std::string csv() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_field(cells[i]);
      out += "\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

  std::string markdown() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      out += "|";
      for (const auto& c : cells) out += " " + escape(c) + " |";
      out += "\n";
    };
    line(header_);
    out += "|";
    for (std::size_t i = 0; i < header_.size(); ++i) out += i == 0 ? " --- |" : " ---: |";
    out += "\n";
    for (const auto& r : rows_) line(r);
    return out;
  }

  std::string render(ReportFormat f) const { return f == ReportFormat::csv ? csv() : markdown(); }

 private:
  static std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) out += c == '|' ? std::string("\\|") : std::string(1, c);
    return out;
  }
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string scheme_title(MarketScheme s) {
  switch (s) {
    case MarketScheme::nodal: return "Nodal";
    case MarketScheme::zonal: return "Zonal";
    case MarketScheme::zonal_forced: return "Zonal (forced bounds)";
    case MarketScheme::uniform: return "Uniform SMP";
    case MarketScheme::copper_plate: return "Copper plate";
  }
  return "";
}

std::string tuple(const std::vector<double>& values) {
  if (values.size() == 1) return fixed2(values[0]);
  std::string out = "(";
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ", " : "") + fixed2(values[i]);
  return out + ")";
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

std::string file_name(const std::string& stem, const std::string& part, ReportFormat f) {
  return stem + "_" + part + (f == ReportFormat::csv ? ".csv" : ".md");
}

bool has_dispatch(const Scenario& sc, const DispatchResult& r) { return r.gen_mw.size() == sc.generators.size(); }

Table dispatch_table(const Scenario& sc, const SchemeOutcome& o) {
  Table t({"generator", "bus", "zone", "mw", "lower_mw", "upper_mw", "price_key", "price", "revenue",
           "as_cleared_cost", "uplift"});
  if (!has_dispatch(sc, o.dispatch)) return t;
  const auto& net = sc.network;
  for (std::size_t g = 0; g < sc.generators.size(); ++g) {
    const auto& spec = sc.generators[g].spec;
    const auto bus = net.bus_index(spec.bus_id);
    std::vector<std::string> row{spec.id,
                                 spec.bus_id,
                                 net.zones()[net.zone_of_bus(bus)],
                                 fixed2(o.dispatch.gen_mw[g]),
                                 fixed2(o.dispatch.gen_lower[g]),
                                 fixed2(o.dispatch.gen_upper[g])};
    if (o.prices && o.settlement) {
      const auto& s = o.settlement->generators[g];
      row.push_back(s.price_key);
      row.push_back(fixed2(o.prices->price(0, s.price_key)));
      row.push_back(fixed2(s.market_revenue));
      row.push_back(fixed2(s.as_cleared_cost));
      row.push_back(fixed2(s.uplift));
    }
    t.row(std::move(row));
  }
  return t;
}

Table price_table(const SchemeOutcome& o) {
  const bool nodal = o.prices && !o.prices->components.empty();
  std::vector<std::string> head{"key", "price"};
  if (nodal) head.insert(head.end(), {"energy", "congestion", "loss"});
  Table t(head);
  if (!o.prices) return t;
  for (std::size_t k = 0; k < o.prices->keys.size(); ++k) {
    std::vector<std::string> row{o.prices->keys[k], fixed2(o.prices->prices[0][k])};
    if (nodal) {
      const auto& c = o.prices->components[0][k];
      row.insert(row.end(), {fixed2(c.energy), fixed2(c.congestion), fixed2(c.loss)});
    }
    t.row(std::move(row));
  }
  return t;
}

Table flow_table(const Scenario& sc, const SchemeOutcome& o) {
  Table t({"element", "kind", "flow_mw", "limit_mw", "status"});
  const auto& net = sc.network;
  const auto& r = o.dispatch;
  auto status = [](double flow, double limit) { return std::abs(flow) > limit + 1e-6 ? "overloaded" : "ok"; };
  if (r.line_flow_mw.size() == net.line_count()) {
    for (std::size_t l = 0; l < net.line_count(); ++l) {
      const auto& line = net.lines()[l];
      t.row({line.id, "line", fixed2(r.line_flow_mw[l]), fixed2(line.limit_mw),
             status(r.line_flow_mw[l], line.limit_mw)});
    }
  }
  if (r.interface_flow_mw.size() == net.interfaces().size()) {
    for (std::size_t i = 0; i < net.interfaces().size(); ++i) {
      const auto& itf = net.interfaces()[i];
      t.row({itf.id, "interface", fixed2(r.interface_flow_mw[i]), fixed2(itf.ttc_mw),
             status(r.interface_flow_mw[i], itf.ttc_mw)});
    }
  }
  return t;
}

Table summary_table(const SchemeOutcome& o) {
  Table t({"metric", "value"});
  t.row({"scheme", to_string(o.scheme)});
  t.row({"regime", o.regime.name});
  t.row({"cleared", yes_no(o.cleared())});
  t.row({"physically_feasible", yes_no(o.dispatch.physically_feasible)});
  if (o.cleared()) t.row({"total_cost", fixed2(o.dispatch.total_cost)});
  if (o.smp) {
    for (std::size_t k = 0; k < o.smp->keys.size(); ++k) t.row({"smp_" + o.smp->keys[k], fixed2(o.smp->smp[k])});
  }
  if (o.settlement) {
    const auto& s = *o.settlement;
    t.row({"served_mwh", fixed2(s.served_mwh)});
    t.row({"curtailed_mwh", fixed2(s.curtailed_mwh)});
    t.row({"generator_revenue", fixed2(s.total_revenue)});
    t.row({"uplift", fixed2(s.total_uplift)});
    t.row({"consumer_market_payment", fixed2(s.consumer_market_payment)});
    t.row({"consumer_total_payment", fixed2(s.consumer_total_payment)});
    t.row({"congestion_rent", fixed2(s.congestion_rent)});
    t.row({"utility", fixed2(s.utility)});
    t.row({"producer_surplus", fixed2(s.producer_surplus)});
    t.row({"consumer_surplus", fixed2(s.consumer_surplus)});
    t.row({"social_surplus", fixed2(s.social_surplus)});
  }
  if (!o.failure.empty()) t.row({"failure", o.failure});
  for (const auto& v : o.dispatch.violations) t.row({"violation", v});
  return t;
}

Table exclusion_table(const SmpInterval& iv) {
  Table t({"group", "generator", "status"});
  for (const auto& set : iv.marginal_sets) {
    for (const auto& m : set.members) t.row({set.group, m, "marginal"});
    for (const auto& e : set.excluded) t.row({set.group, e.gen_id, to_string(e.reason)});
  }
  return t;
}

}  // namespace

std::vector<ReportFile> clear_reports(const Scenario& scenario, const SchemeOutcome& outcome, ReportFormat format,
                                      const std::string& stem) {
  const std::string base = std::string(to_string(outcome.scheme));
  if (format == ReportFormat::csv) {
    std::vector<ReportFile> out{
        {file_name(stem, base + "_summary", format), summary_table(outcome).csv()},
        {file_name(stem, base + "_dispatch", format), dispatch_table(scenario, outcome).csv()},
        {file_name(stem, base + "_prices", format), price_table(outcome).csv()},
        {file_name(stem, base + "_flows", format), flow_table(scenario, outcome).csv()},
    };
    if (outcome.smp) out.push_back({file_name(stem, base + "_marginal", format), exclusion_table(*outcome.smp).csv()});
    return out;
  }
  std::string md = "# " + (scenario.metadata.name.empty() ? stem : scenario.metadata.name) + ": " +
                   scheme_title(outcome.scheme) + "\n\nPrices in " + scenario.metadata.currency + ".\n\n";
  md += "## Summary\n\n" + summary_table(outcome).markdown();
  md += "\n## Dispatch\n\n" + dispatch_table(scenario, outcome).markdown();
  md += "\n## Prices\n\n" + price_table(outcome).markdown();
  md += "\n## Flows\n\n" + flow_table(scenario, outcome).markdown();
  if (outcome.smp) md += "\n## Marginal set\n\n" + exclusion_table(*outcome.smp).markdown();
  return {{file_name(stem, base, format), md}};
}

std::string compare_table_markdown(const Scenario& scenario, std::span<const SchemeOutcome> outcomes) {
  std::vector<std::string> head{""};
  for (const auto& o : outcomes) head.push_back(scheme_title(o.scheme));
  Table t(head);
  auto money_row = [&](const std::string& label, auto value) {
    std::vector<std::string> row{label};
    for (const auto& o : outcomes) row.push_back(o.complete() ? value(*o.settlement) : kNotAvailable);
    t.row(std::move(row));
  };
  std::vector<std::string> dispatch{"Generator dispatch (MW)"}, price{"Market price (" + scenario.metadata.currency + ")"};
  for (const auto& o : outcomes) {
    dispatch.push_back(has_dispatch(scenario, o.dispatch) ? tuple(o.dispatch.gen_mw) : kNotAvailable);
    price.push_back(o.prices ? tuple(o.prices->prices[0]) : kNotAvailable);
  }
  t.row(std::move(dispatch));
  t.row(std::move(price));
  auto with_uplift = [](double total, double uplift) {
    return uplift > 0.005 ? fixed2(total) + " (uplift: " + fixed2(uplift) + ")" : fixed2(total);
  };
  money_row("Generator revenue",
            [&](const SettlementReport& s) { return with_uplift(s.total_revenue + s.total_uplift, s.total_uplift); });
  money_row("Consumer payment",
            [&](const SettlementReport& s) { return with_uplift(s.consumer_total_payment, s.total_uplift); });
  money_row("Congestion rent", [](const SettlementReport& s) { return fixed2(s.congestion_rent); });
  money_row("Social surplus", [](const SettlementReport& s) { return fixed2(s.social_surplus); });

  std::string md = t.markdown();
  std::string notes;
  for (const auto& o : outcomes) {
    if (o.complete()) continue;
    std::string why;
    if (!o.dispatch.violations.empty()) {
      why = "physical limits are exceeded";
      for (const auto& v : o.dispatch.violations) why += "; " + v;
    } else {
      why = o.failure.empty() ? "no settlement" : o.failure;
    }
    notes += "- " + scheme_title(o.scheme) + ": " + why + "\n";
  }
  if (!notes.empty()) md += "\nNot Available:\n\n" + notes;
  return md;
}

std::vector<ReportFile> compare_reports(const Scenario& scenario, std::span<const SchemeOutcome> outcomes,
                                        ReportFormat format, const std::string& stem) {
  if (format == ReportFormat::markdown) {
    const std::string title = scenario.metadata.name.empty() ? stem : scenario.metadata.name;
    return {{file_name(stem, "compare", format),
             "# " + title + ": scheme comparison\n\n" + compare_table_markdown(scenario, outcomes)}};
  }
  std::vector<std::string> head{"metric"};
  for (const auto& o : outcomes) head.push_back(to_string(o.scheme));
  Table t(head);
  for (std::size_t g = 0; g < scenario.generators.size(); ++g) {
    std::vector<std::string> row{"dispatch_mw:" + scenario.generators[g].spec.id};
    for (const auto& o : outcomes) row.push_back(has_dispatch(scenario, o.dispatch) ? fixed2(o.dispatch.gen_mw[g]) : "");
    t.row(std::move(row));
  }
  std::vector<std::string> keys;
  for (const auto& o : outcomes)
    if (o.prices)
      for (const auto& k : o.prices->keys)
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  for (const auto& k : keys) {
    std::vector<std::string> row{"price:" + k};
    for (const auto& o : outcomes) row.push_back(o.prices && o.prices->has_key(k) ? fixed2(o.prices->price(0, k)) : "");
    t.row(std::move(row));
  }
  auto money = [&](const std::string& label, auto value) {
    std::vector<std::string> row{label};
    for (const auto& o : outcomes) row.push_back(o.complete() ? fixed2(value(*o.settlement)) : kNotAvailable);
    t.row(std::move(row));
  };
  money("generator_revenue", [](const SettlementReport& s) { return s.total_revenue; });
  money("uplift", [](const SettlementReport& s) { return s.total_uplift; });
  money("consumer_payment", [](const SettlementReport& s) { return s.consumer_total_payment; });
  money("congestion_rent", [](const SettlementReport& s) { return s.congestion_rent; });
  money("social_surplus", [](const SettlementReport& s) { return s.social_surplus; });
  std::vector<std::string> cost{"total_cost"}, feas{"physically_feasible"};
  for (const auto& o : outcomes) {
    cost.push_back(o.cleared() ? fixed2(o.dispatch.total_cost) : "");
    feas.push_back(yes_no(o.cleared() && o.dispatch.physically_feasible));
  }
  t.row(std::move(cost));
  t.row(std::move(feas));
  return {{file_name(stem, "compare", format), t.csv()}};
}

std::vector<ReportFile> daucruc_reports(const Scenario& scenario, const DaucRucOutcome& outcome, ReportFormat format,
                                        const std::string& stem) {
  const auto& res = outcome.result;
  Table schedule({"pass", "generator", "hour", "committed", "mw"});
  for (const auto* pass : {&res.dauc, &res.ruc}) {
    if (!pass->feasible) continue;
    const std::string name = pass == &res.dauc ? "DAUC" : "RUC";
    for (std::size_t g = 0; g < pass->gen_ids.size(); ++g)
      for (std::size_t t = 0; t < pass->hours; ++t)
        schedule.row({name, pass->gen_ids[g], std::to_string(t), pass->committed[g][t] ? "1" : "0",
                      fixed2(pass->dispatch_mw[g][t])});
  }

  Table zones({"zone", "constrained_on_mwh", "constrained_off_mwh"});
  for (const auto& row : outcome.table.rows)
    zones.row({row.zone, fixed2(row.constrained_on_mwh), fixed2(row.constrained_off_mwh)});
  if (!outcome.table.rows.empty())
    zones.row({"total", fixed2(outcome.table.total_on_mwh), fixed2(outcome.table.total_off_mwh)});

  Table payments({"generator", "zone", "con_mwh", "coff_mwh", "con_payment", "coff_payment"});
  if (outcome.settlement) {
    const auto& rec = res.record;
    for (std::size_t g = 0; g < outcome.settlement->generators.size(); ++g) {
      const auto& s = outcome.settlement->generators[g];
      payments.row({s.id, rec.zones[rec.gen_zone[g]], fixed2(s.con_mwh), fixed2(s.coff_mwh), fixed2(s.con_payment),
                    fixed2(s.coff_payment)});
    }
  }

  Table summary({"metric", "value"});
  summary.row({"dauc_regime", outcome.dauc_regime.name});
  summary.row({"ruc_regime", outcome.ruc_regime.name});
  summary.row({"dauc_feasible", yes_no(res.dauc.feasible)});
  summary.row({"ruc_feasible", yes_no(res.ruc.feasible)});
  if (res.dauc.feasible) summary.row({"dauc_cost", fixed2(res.dauc.total_cost)});
  if (res.ruc.feasible) summary.row({"ruc_cost", fixed2(res.ruc.total_cost)});
  if (res.dauc.feasible && res.ruc.feasible) {
    summary.row({"cost_increase", fixed2(res.ruc.total_cost - res.dauc.total_cost)});
    summary.row({"constrained_on_mwh", fixed2(outcome.table.total_on_mwh)});
    summary.row({"constrained_off_mwh", fixed2(outcome.table.total_off_mwh)});
  }
  if (outcome.prices)
    for (std::size_t t = 0; t < outcome.prices->hours(); ++t)
      for (std::size_t k = 0; k < outcome.prices->keys.size(); ++k)
        summary.row({"smp_h" + std::to_string(t) + "_" + outcome.prices->keys[k], fixed2(outcome.prices->prices[t][k])});
  if (outcome.settlement) {
    summary.row({"con_payment", fixed2(outcome.settlement->con_payment_total)});
    summary.row({"coff_payment", fixed2(outcome.settlement->coff_payment_total)});
    summary.row({"uplift", fixed2(outcome.settlement->total_uplift)});
  }
  if (!outcome.failure.empty()) summary.row({"failure", outcome.failure});

  if (format == ReportFormat::csv) {
    return {{file_name(stem, "daucruc_summary", format), summary.csv()},
            {file_name(stem, "daucruc_redispatch", format), zones.csv()},
            {file_name(stem, "daucruc_payments", format), payments.csv()},
            {file_name(stem, "daucruc_schedule", format), schedule.csv()}};
  }
  std::string md = "# " + (scenario.metadata.name.empty() ? stem : scenario.metadata.name) + ": DAUC and RUC\n\n";
  md += "## Summary\n\n" + summary.markdown();
  md += "\n## Redispatch by zone\n\n" + zones.markdown();
  md += "\n## Constrained-on and constrained-off payments\n\n" + payments.markdown();
  md += "\n## Schedules\n\n" + schedule.markdown();
  return {{file_name(stem, "daucruc", format), md}};
}

std::vector<ReportFile> bidding_reports(const Scenario& scenario, std::span<const BidDeviation> rows,
                                        ReportFormat format, const std::string& stem) {
  Table t({"generator", "scheme", "true_ic", "offered_ic", "truthful_mw", "deviated_mw", "truthful_price",
           "deviated_price", "truthful_profit", "deviated_profit", "profit_delta", "welfare_delta"});
  for (const auto& d : rows)
    t.row({d.gen_id, to_string(d.scheme), fixed2(d.true_ic), fixed2(d.offered_ic), fixed2(d.truthful_mw),
           fixed2(d.deviated_mw), fixed2(d.truthful_price), fixed2(d.deviated_price), fixed2(d.truthful_profit),
           fixed2(d.deviated_profit), fixed2(d.profit_delta()), fixed2(d.welfare_delta())});
  if (format == ReportFormat::csv) return {{file_name(stem, "bidding", format), t.csv()}};
  return {{file_name(stem, "bidding", format), "# " + (scenario.metadata.name.empty() ? stem : scenario.metadata.name) +
                                                    ": bid deviations\n\n" + t.markdown()}};
}

std::vector<ReportFile> stats_reports(const PriceSeries& series, const PriceSeriesStats& stats, ReportFormat format,
                                      const std::string& stem) {
  Table summary({"metric", "value"});
  summary.row({"count", std::to_string(series.prices.size())});
  summary.row({"mean", fixed2(stats.mean)});
  summary.row({"median", fixed2(stats.median)});
  summary.row({"p10", fixed2(stats.p10)});
  summary.row({"p90", fixed2(stats.p90)});
  Table norm({"timestamp", "price", "normalized"});
  for (std::size_t i = 0; i < series.prices.size(); ++i)
    norm.row({series.timestamps[i], fixed2(series.prices[i]), fixed2(stats.normalized[i])});
  if (format == ReportFormat::csv)
    return {{file_name(stem, "stats", format), summary.csv()}, {file_name(stem, "normalized", format), norm.csv()}};
  return {{file_name(stem, "stats", format), "# " + stem + ": price statistics\n\n" + summary.markdown() +
                                                  "\n## Normalized series\n\n" + norm.markdown()}};
}

std::vector<std::filesystem::path> write_reports(const std::filesystem::path& dir, const std::vector<ReportFile>& files,
                                                 bool timestamp) {
  if (files.empty()) throw Error(ErrorCode::io, "no reports to write");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create output directory '" + dir.string() + "': " + ec.message());
  std::string stamp;
  if (timestamp) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    stamp = buf;
  }
  std::vector<std::filesystem::path> written;
  for (const auto& f : files) {
    const auto path = dir / f.name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
    if (timestamp) {
      const bool md = path.extension() == ".md";
      out << (md ? "<!-- generated " + stamp + " -->\n" : "# generated " + stamp + "\n");
    }
    out << f.content;
    if (!out) throw Error(ErrorCode::io, "write to '" + path.string() + "' failed");
    written.push_back(path);
  }
  return written;
}

}  // namespace gridclear
