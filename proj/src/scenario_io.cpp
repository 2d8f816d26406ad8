#include "gridclear/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

namespace gridclear {

using nlohmann::json;

const char* to_string(MarketScheme s) {
  switch (s) {
    case MarketScheme::nodal: return "nodal";
    case MarketScheme::zonal: return "zonal";
    case MarketScheme::zonal_forced: return "zonal_forced";
    case MarketScheme::uniform: return "uniform";
    case MarketScheme::copper_plate: return "copper_plate";
  }
  return "unknown";
}

std::optional<MarketScheme> parse_market_scheme(std::string_view text) {
  for (auto s : {MarketScheme::nodal, MarketScheme::zonal, MarketScheme::zonal_forced, MarketScheme::uniform,
                 MarketScheme::copper_plate})
    if (text == to_string(s)) return s;
  return std::nullopt;
}

ClearingMode clearing_mode_of(MarketScheme s) {
  switch (s) {
    case MarketScheme::nodal: return ClearingMode::nodal;
    case MarketScheme::copper_plate: return ClearingMode::copper_plate;
    default: return ClearingMode::zonal;
  }
}

std::string ScenarioIssue::to_string() const {
  return code + " " + (path.empty() ? std::string() : path + ": ") + message;
}

namespace {

std::string join_issues(const std::vector<ScenarioIssue>& issues) {
  std::string msg = std::to_string(issues.size()) + " scenario issue(s)";
  for (const auto& i : issues) msg += "\n  " + i.to_string();
  return msg;
}

std::optional<ClearingMode> parse_mode(std::string_view s) {
  if (s == "nodal") return ClearingMode::nodal;
  if (s == "zonal") return ClearingMode::zonal;
  if (s == "copper_plate") return ClearingMode::copper_plate;
  return std::nullopt;
}

// Reads typed fields from a JSON tree, recording every problem instead of
// stopping at the first.
class Reader {
 public:
  std::vector<ScenarioIssue> issues;

  void add(std::string code, std::string path, std::string message) {
    issues.push_back({std::move(code), std::move(path), std::move(message)});
  }

  static std::string at(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
  }
  static std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

  bool object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    add("E002", path, "expected an object");
    return false;
  }

  const json* array(const json& obj, std::string_view key, const std::string& path, bool required) {
    const json* v = find(obj, key, path, required);
    if (v && !v->is_array()) {
      add("E002", at(path, key), "expected an array");
      return nullptr;
    }
    return v;
  }

  void allow_keys(const json& obj, std::initializer_list<std::string_view> keys, const std::string& path) {
    for (const auto& [k, v] : obj.items()) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) add("E002", at(path, k), "unknown field");
    }
  }

  const json* find(const json& obj, std::string_view key, const std::string& path, bool required) {
    const auto it = obj.find(std::string(key));
    if (it == obj.end()) {
      if (required) add("E002", at(path, key), "required field is missing");
      return nullptr;
    }
    return &*it;
  }

  std::optional<std::string> text(const json& obj, std::string_view key, const std::string& path, bool required) {
    const json* v = find(obj, key, path, required);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      add("E002", at(path, key), "expected a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<double> number(const json& obj, std::string_view key, const std::string& path, bool required) {
    const json* v = find(obj, key, path, required);
    if (!v) return std::nullopt;
    if (!v->is_number()) {
      add("E002", at(path, key), "expected a number");
      return std::nullopt;
    }
    const double d = v->get<double>();
    if (!std::isfinite(d)) {
      add("E007", at(path, key), "value is not finite");
      return std::nullopt;
    }
    return d;
  }

  // Number that must satisfy ok(); records E007 with the given rule otherwise.
  std::optional<double> number(const json& obj, std::string_view key, const std::string& path, bool required,
                               const std::function<bool(double)>& ok, std::string_view rule) {
    auto d = number(obj, key, path, required);
    if (d && !ok(*d)) {
      add("E007", at(path, key), "value " + fmt(*d) + " must be " + std::string(rule));
      return std::nullopt;
    }
    return d;
  }

  std::optional<long long> integer(const json& obj, std::string_view key, const std::string& path, bool required,
                                   long long lo, long long hi) {
    const json* v = find(obj, key, path, required);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) {
      add("E002", at(path, key), "expected an integer");
      return std::nullopt;
    }
    const long long n = v->get<long long>();
    if (n < lo || n > hi) {
      add("E007", at(path, key), "value " + std::to_string(n) + " must be between " + std::to_string(lo) + " and " +
                                     std::to_string(hi));
      return std::nullopt;
    }
    return n;
  }

  std::optional<bool> boolean(const json& obj, std::string_view key, const std::string& path, bool required) {
    const json* v = find(obj, key, path, required);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) {
      add("E002", at(path, key), "expected true or false");
      return std::nullopt;
    }
    return v->get<bool>();
  }

  static std::string fmt(double d) {
    std::ostringstream os;
    os << d;
    return os.str();
  }
};

bool nonneg(double d) { return d >= 0.0; }
bool positive(double d) { return d > 0.0; }

struct ParsedNetwork {
  double base_mva = 100.0;
  std::string slack;
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Interface> interfaces;
  std::vector<std::string> zone_order;  // declared zones, empty when not declared
};

void read_metadata(Reader& r, const json& root, ScenarioMetadata& meta) {
  const json* m = r.find(root, "metadata", "", false);
  if (!m || !r.object(*m, "metadata")) return;
  r.allow_keys(*m, {"name", "currency", "season", "time_of_day", "description"}, "metadata");
  meta.name = r.text(*m, "name", "metadata", false).value_or("");
  meta.currency = r.text(*m, "currency", "metadata", false).value_or("$/MWh");
  meta.season = r.text(*m, "season", "metadata", false).value_or("");
  meta.time_of_day = r.text(*m, "time_of_day", "metadata", false).value_or("");
  meta.description = r.text(*m, "description", "metadata", false).value_or("");
  static const std::set<std::string> seasons{"", "spring", "summer", "fall", "winter"};
  static const std::set<std::string> times{"", "night", "morning", "daytime", "evening"};
  if (!seasons.count(meta.season))
    r.add("E011", "metadata.season", "'" + meta.season + "' is not one of spring, summer, fall, winter");
  if (!times.count(meta.time_of_day))
    r.add("E011", "metadata.time_of_day", "'" + meta.time_of_day + "' is not one of night, morning, daytime, evening");
}

void read_network(Reader& r, const json& root, ParsedNetwork& pn) {
  const json* n = r.find(root, "network", "", true);
  if (!n || !r.object(*n, "network")) return;
  const std::string np = "network";
  r.allow_keys(*n, {"base_mva", "slack_bus", "zones", "buses", "lines", "interfaces"}, np);
  pn.base_mva = r.number(*n, "base_mva", np, false, positive, "positive").value_or(100.0);

  if (const json* zs = r.array(*n, "zones", np, false)) {
    for (std::size_t i = 0; i < zs->size(); ++i) {
      const auto& z = (*zs)[i];
      if (!z.is_string()) {
        r.add("E002", Reader::at(Reader::at(np, "zones"), i), "expected a string");
        continue;
      }
      const auto id = z.get<std::string>();
      if (std::find(pn.zone_order.begin(), pn.zone_order.end(), id) != pn.zone_order.end())
        r.add("E004", Reader::at(Reader::at(np, "zones"), i), "duplicate zone '" + id + "'");
      else
        pn.zone_order.push_back(id);
    }
  }

  std::set<std::string> bus_ids;
  const json* bs = r.array(*n, "buses", np, true);
  if (bs && bs->empty()) r.add("E003", Reader::at(np, "buses"), "network has no buses");
  if (bs) {
    for (std::size_t i = 0; i < bs->size(); ++i) {
      const auto p = Reader::at(Reader::at(np, "buses"), i);
      const auto& b = (*bs)[i];
      if (!r.object(b, p)) continue;
      r.allow_keys(b, {"id", "zone", "load_mw", "wtp"}, p);
      Bus bus;
      bus.id = r.text(b, "id", p, true).value_or("");
      bus.zone_id = r.text(b, "zone", p, true).value_or("");
      bus.load_mw = r.number(b, "load_mw", p, false, nonneg, "non-negative").value_or(0.0);
      bus.wtp = r.number(b, "wtp", p, false, nonneg, "non-negative").value_or(0.0);
      if (bus.id.empty()) continue;
      if (!bus_ids.insert(bus.id).second) r.add("E004", Reader::at(p, "id"), "duplicate bus '" + bus.id + "'");
      if (!pn.zone_order.empty() && !bus.zone_id.empty() &&
          std::find(pn.zone_order.begin(), pn.zone_order.end(), bus.zone_id) == pn.zone_order.end())
        r.add("E005", Reader::at(p, "zone"), "zone '" + bus.zone_id + "' is not declared in network.zones");
      if (bus.load_mw > 0.0 && !(bus.wtp > 0.0))
        r.add("E018", p, "bus '" + bus.id + "' carries load but has no willingness to pay");
      pn.buses.push_back(std::move(bus));
    }
  }
  for (const auto& z : pn.zone_order) {
    if (std::none_of(pn.buses.begin(), pn.buses.end(), [&](const Bus& b) { return b.zone_id == z; }))
      r.add("E002", Reader::at(np, "zones"), "declared zone '" + z + "' has no buses");
  }

  const auto slack = r.text(*n, "slack_bus", np, false);
  if (!slack) {
    if (!n->contains("slack_bus")) r.add("E006", Reader::at(np, "slack_bus"), "no slack bus given");
  } else if (!bus_ids.count(*slack)) {
    r.add("E006", Reader::at(np, "slack_bus"), "slack bus '" + *slack + "' is not a bus");
  } else {
    pn.slack = *slack;
  }

  std::set<std::string> line_ids;
  if (const json* ls = r.array(*n, "lines", np, false)) {
    for (std::size_t i = 0; i < ls->size(); ++i) {
      const auto p = Reader::at(Reader::at(np, "lines"), i);
      const auto& l = (*ls)[i];
      if (!r.object(l, p)) continue;
      r.allow_keys(l, {"id", "from", "to", "reactance", "limit_mw", "monitored_in"}, p);
      Line line;
      line.id = r.text(l, "id", p, true).value_or("");
      line.from_bus = r.text(l, "from", p, true).value_or("");
      line.to_bus = r.text(l, "to", p, true).value_or("");
      const auto x = r.number(l, "reactance", p, true, positive, "positive");
      const auto lim = r.number(l, "limit_mw", p, true, positive, "positive");
      if (const json* tags = r.array(l, "monitored_in", p, false)) {
        for (std::size_t k = 0; k < tags->size(); ++k) {
          if ((*tags)[k].is_string())
            line.monitored_in.insert((*tags)[k].get<std::string>());
          else
            r.add("E002", Reader::at(Reader::at(p, "monitored_in"), k), "expected a string");
        }
      }
      if (!line.from_bus.empty() && !bus_ids.count(line.from_bus))
        r.add("E005", Reader::at(p, "from"), "unknown bus '" + line.from_bus + "'");
      if (!line.to_bus.empty() && !bus_ids.count(line.to_bus))
        r.add("E005", Reader::at(p, "to"), "unknown bus '" + line.to_bus + "'");
      if (!line.from_bus.empty() && line.from_bus == line.to_bus)
        r.add("E014", p, "line '" + line.id + "' connects bus '" + line.from_bus + "' to itself");
      if (line.id.empty()) continue;
      if (!line_ids.insert(line.id).second) r.add("E004", Reader::at(p, "id"), "duplicate line '" + line.id + "'");
      line.reactance = x.value_or(0.0);
      line.limit_mw = lim.value_or(0.0);
      pn.lines.push_back(std::move(line));
    }
  }

  std::set<std::string> itf_ids;
  if (const json* is = r.array(*n, "interfaces", np, false)) {
    for (std::size_t i = 0; i < is->size(); ++i) {
      const auto p = Reader::at(Reader::at(np, "interfaces"), i);
      const auto& it = (*is)[i];
      if (!r.object(it, p)) continue;
      r.allow_keys(it, {"id", "members", "ttc_mw"}, p);
      Interface itf;
      itf.id = r.text(it, "id", p, true).value_or("");
      itf.ttc_mw = r.number(it, "ttc_mw", p, true, positive, "positive").value_or(0.0);
      const json* ms = r.array(it, "members", p, true);
      if (ms && ms->empty()) r.add("E013", Reader::at(p, "members"), "interface '" + itf.id + "' has no member lines");
      if (ms) {
        for (std::size_t k = 0; k < ms->size(); ++k) {
          const auto mp = Reader::at(Reader::at(p, "members"), k);
          const auto& m = (*ms)[k];
          if (!r.object(m, mp)) continue;
          r.allow_keys(m, {"line", "direction"}, mp);
          InterfaceMember mem;
          mem.line_id = r.text(m, "line", mp, true).value_or("");
          const auto dir = r.integer(m, "direction", mp, false, -1, 1);
          mem.direction = static_cast<int>(dir.value_or(1));
          if (dir && *dir == 0) r.add("E011", Reader::at(mp, "direction"), "direction must be 1 or -1");
          if (!mem.line_id.empty() && !line_ids.count(mem.line_id))
            r.add("E005", Reader::at(mp, "line"), "unknown line '" + mem.line_id + "'");
          itf.members.push_back(std::move(mem));
        }
      }
      if (itf.id.empty()) continue;
      if (!itf_ids.insert(itf.id).second) r.add("E004", Reader::at(p, "id"), "duplicate interface '" + itf.id + "'");
      pn.interfaces.push_back(std::move(itf));
    }
  }

  // Connectivity over the lines whose endpoints resolved.
  if (pn.buses.size() > 1) {
    std::map<std::string, std::size_t> idx;
    for (std::size_t b = 0; b < pn.buses.size(); ++b) idx.emplace(pn.buses[b].id, b);
    std::vector<std::size_t> parent(pn.buses.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    std::function<std::size_t(std::size_t)> root_of = [&](std::size_t x) {
      return parent[x] == x ? x : parent[x] = root_of(parent[x]);
    };
    for (const auto& l : pn.lines) {
      const auto f = idx.find(l.from_bus);
      const auto t = idx.find(l.to_bus);
      if (f != idx.end() && t != idx.end()) parent[root_of(f->second)] = root_of(t->second);
    }
    std::vector<std::string> islanded;
    for (std::size_t b = 0; b < pn.buses.size(); ++b)
      if (root_of(b) != root_of(0)) islanded.push_back(pn.buses[b].id);
    if (!islanded.empty()) {
      std::string list;
      for (const auto& id : islanded) list += (list.empty() ? "" : ", ") + id;
      r.add("E008", Reader::at(np, "lines"), "network is disconnected; not reachable from '" + pn.buses[0].id +
                                                 "': " + list);
    }
  }
}

void read_generators(Reader& r, const json& root, const ParsedNetwork& pn, std::vector<UcGenerator>& out) {
  const json* gs = r.array(root, "generators", "", true);
  if (!gs) return;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < gs->size(); ++i) {
    const auto p = Reader::at("generators", i);
    const auto& g = (*gs)[i];
    if (!r.object(g, p)) continue;
    r.allow_keys(g,
                 {"id", "bus", "p_min_mw", "p_max_mw", "ic", "nlc", "suc", "forced_min_mw", "forced_max_mw",
                  "synchronous", "min_up_h", "min_down_h", "initial_state", "ramp_mw_per_h"},
                 p);
    UcGenerator u;
    auto& s = u.spec;
    const std::size_t before = r.issues.size();
    s.id = r.text(g, "id", p, true).value_or("");
    s.bus_id = r.text(g, "bus", p, true).value_or("");
    s.p_min = r.number(g, "p_min_mw", p, false).value_or(0.0);
    s.p_max = r.number(g, "p_max_mw", p, true).value_or(0.0);
    s.ic = r.number(g, "ic", p, true, nonneg, "non-negative").value_or(0.0);
    s.nlc = r.number(g, "nlc", p, false, nonneg, "non-negative").value_or(0.0);
    s.suc = r.number(g, "suc", p, false, nonneg, "non-negative").value_or(0.0);
    s.forced_min = r.number(g, "forced_min_mw", p, false);
    s.forced_max = r.number(g, "forced_max_mw", p, false);
    s.synchronous = r.boolean(g, "synchronous", p, false).value_or(true);
    u.min_up_h = static_cast<int>(r.integer(g, "min_up_h", p, false, 1, kMaxHorizonHours).value_or(1));
    u.min_down_h = static_cast<int>(r.integer(g, "min_down_h", p, false, 1, kMaxHorizonHours).value_or(1));
    u.ramp_mw_per_h = r.number(g, "ramp_mw_per_h", p, false, positive, "positive");
    if (const json* st = r.find(g, "initial_state", p, false); st && r.object(*st, Reader::at(p, "initial_state"))) {
      const auto sp = Reader::at(p, "initial_state");
      r.allow_keys(*st, {"on", "hours"}, sp);
      u.initially_on = r.boolean(*st, "on", sp, true).value_or(false);
      u.initial_hours = static_cast<int>(r.integer(*st, "hours", sp, false, 1, 1000000).value_or(1));
    }
    if (!s.bus_id.empty() &&
        std::none_of(pn.buses.begin(), pn.buses.end(), [&](const Bus& b) { return b.id == s.bus_id; }))
      r.add("E005", Reader::at(p, "bus"), "generator '" + s.id + "' is on unknown bus '" + s.bus_id + "'");
    if (!s.id.empty() && !ids.insert(s.id).second)
      r.add("E004", Reader::at(p, "id"), "duplicate generator '" + s.id + "'");
    if (r.issues.size() == before) {
      try {
        validate_uc_generator(u);
      } catch (const Error& e) {
        r.add("E017", p, e.what());
      }
    }
    out.push_back(std::move(u));
  }
}

void read_regimes(Reader& r, const json& root, const ParsedNetwork& pn, std::vector<ConstraintRegime>& out) {
  const json* rs = r.array(root, "regimes", "", false);
  if (!rs) return;
  std::set<std::string> names;
  for (std::size_t i = 0; i < rs->size(); ++i) {
    const auto p = Reader::at("regimes", i);
    const auto& j = (*rs)[i];
    if (!r.object(j, p)) continue;
    r.allow_keys(j, {"name", "mode", "monitored_profile", "enforce_interfaces", "reserve_req_mw", "min_sync_mw"}, p);
    ConstraintRegime reg;
    reg.name = r.text(j, "name", p, true).value_or("");
    const auto mode = r.text(j, "mode", p, true);
    if (mode) {
      if (auto m = parse_mode(*mode))
        reg.mode = *m;
      else
        r.add("E011", Reader::at(p, "mode"), "'" + *mode + "' is not one of nodal, zonal, copper_plate");
    }
    reg.monitored_profile = r.text(j, "monitored_profile", p, false).value_or(kAllLinesProfile);
    reg.enforce_interfaces = r.boolean(j, "enforce_interfaces", p, false).value_or(true);
    reg.reserve_req_mw = r.number(j, "reserve_req_mw", p, false, nonneg, "non-negative").value_or(0.0);
    reg.min_sync_mw = r.number(j, "min_sync_mw", p, false, nonneg, "non-negative").value_or(0.0);
    if (reg.monitored_profile != kAllLinesProfile &&
        std::none_of(pn.lines.begin(), pn.lines.end(),
                     [&](const Line& l) { return l.monitored_in.count(reg.monitored_profile) > 0; }))
      r.add("E009", Reader::at(p, "monitored_profile"),
            "profile tag '" + reg.monitored_profile + "' is not on any line");
    if (!reg.name.empty() && !names.insert(reg.name).second)
      r.add("E004", Reader::at(p, "name"), "duplicate regime '" + reg.name + "'");
    out.push_back(std::move(reg));
  }
}

void read_run(Reader& r, const json& root, const std::vector<UcGenerator>& gens,
              const std::vector<ConstraintRegime>& regimes, RunSection& run) {
  run.schemes = {MarketScheme::nodal, MarketScheme::zonal, MarketScheme::zonal_forced};
  const json* j = r.find(root, "run", "", false);
  if (!j || !r.object(*j, "run")) return;
  const std::string p = "run";
  r.allow_keys(*j,
               {"schemes", "scheme_regimes", "horizon_h", "forced_bounds", "bid_deviations", "smp_grouping",
                "dauc_regime", "ruc_regime"},
               p);
  auto known_gen = [&](const std::string& id) {
    return std::any_of(gens.begin(), gens.end(), [&](const UcGenerator& g) { return g.spec.id == id; });
  };
  auto known_regime = [&](const std::string& name) {
    return std::any_of(regimes.begin(), regimes.end(), [&](const ConstraintRegime& g) { return g.name == name; });
  };

  if (const json* ss = r.array(*j, "schemes", p, false)) {
    run.schemes.clear();
    for (std::size_t i = 0; i < ss->size(); ++i) {
      const auto sp = Reader::at(Reader::at(p, "schemes"), i);
      const auto s = (*ss)[i].is_string() ? parse_market_scheme((*ss)[i].get<std::string>()) : std::nullopt;
      if (!s)
        r.add("E011", sp, "expected one of nodal, zonal, zonal_forced, uniform, copper_plate");
      else if (std::find(run.schemes.begin(), run.schemes.end(), *s) != run.schemes.end())
        r.add("E004", sp, std::string("scheme '") + to_string(*s) + "' listed twice");
      else
        run.schemes.push_back(*s);
    }
  }
  if (const json* m = r.find(*j, "scheme_regimes", p, false); m && r.object(*m, Reader::at(p, "scheme_regimes"))) {
    for (const auto& [k, v] : m->items()) {
      const auto kp = Reader::at(Reader::at(p, "scheme_regimes"), k);
      const auto s = parse_market_scheme(k);
      if (!s) {
        r.add("E011", kp, "'" + k + "' is not a market scheme");
        continue;
      }
      if (!v.is_string()) {
        r.add("E002", kp, "expected a regime name");
        continue;
      }
      const auto name = v.get<std::string>();
      if (!known_regime(name)) r.add("E015", kp, "regime '" + name + "' is not defined");
      run.scheme_regimes[*s] = name;
    }
  }
  run.horizon_h = static_cast<std::size_t>(r.integer(*j, "horizon_h", p, false, 1, kMaxHorizonHours).value_or(1));

  if (const json* fb = r.array(*j, "forced_bounds", p, false)) {
    for (std::size_t i = 0; i < fb->size(); ++i) {
      const auto fp = Reader::at(Reader::at(p, "forced_bounds"), i);
      const auto& f = (*fb)[i];
      if (!r.object(f, fp)) continue;
      r.allow_keys(f, {"generator", "min_mw", "max_mw"}, fp);
      ForcedBoundOverride o;
      o.gen_id = r.text(f, "generator", fp, true).value_or("");
      o.min_mw = r.number(f, "min_mw", fp, false);
      o.max_mw = r.number(f, "max_mw", fp, false);
      if (!o.min_mw && !o.max_mw) r.add("E002", fp, "forced bound needs min_mw or max_mw");
      if (!o.gen_id.empty() && !known_gen(o.gen_id))
        r.add("E010", Reader::at(fp, "generator"), "unknown generator '" + o.gen_id + "'");
      run.forced_bounds.push_back(std::move(o));
    }
  }
  if (const json* bd = r.array(*j, "bid_deviations", p, false)) {
    for (std::size_t i = 0; i < bd->size(); ++i) {
      const auto bp = Reader::at(Reader::at(p, "bid_deviations"), i);
      const auto& b = (*bd)[i];
      if (!r.object(b, bp)) continue;
      r.allow_keys(b, {"generator", "offered_ic"}, bp);
      BidDeviationRequest req;
      req.gen_id = r.text(b, "generator", bp, true).value_or("");
      req.offered_ic = r.number(b, "offered_ic", bp, true, nonneg, "non-negative").value_or(0.0);
      if (!req.gen_id.empty() && !known_gen(req.gen_id))
        r.add("E010", Reader::at(bp, "generator"), "unknown generator '" + req.gen_id + "'");
      run.bid_deviations.push_back(std::move(req));
    }
  }
  if (const auto g = r.text(*j, "smp_grouping", p, false)) {
    if (*g == "system")
      run.smp_grouping = SmpGrouping::system;
    else if (*g == "zone")
      run.smp_grouping = SmpGrouping::zone;
    else
      r.add("E011", Reader::at(p, "smp_grouping"), "'" + *g + "' is not one of system, zone");
  }
  for (const auto* key : {"dauc_regime", "ruc_regime"}) {
    if (const auto name = r.text(*j, key, p, false)) {
      if (!known_regime(*name)) r.add("E015", Reader::at(p, key), "regime '" + *name + "' is not defined");
      (std::string_view(key) == "dauc_regime" ? run.dauc_regime : run.ruc_regime) = *name;
    }
  }
}

void read_loads(Reader& r, const json& root, const ParsedNetwork& pn, std::size_t horizon,
                std::vector<LoadProfile>& out) {
  const json* ls = r.array(root, "loads", "", false);
  if (!ls) return;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < ls->size(); ++i) {
    const auto p = Reader::at("loads", i);
    const auto& l = (*ls)[i];
    if (!r.object(l, p)) continue;
    r.allow_keys(l, {"bus", "mw"}, p);
    LoadProfile prof;
    prof.bus_id = r.text(l, "bus", p, true).value_or("");
    const auto bus = std::find_if(pn.buses.begin(), pn.buses.end(), [&](const Bus& b) { return b.id == prof.bus_id; });
    if (!prof.bus_id.empty() && bus == pn.buses.end())
      r.add("E005", Reader::at(p, "bus"), "unknown bus '" + prof.bus_id + "'");
    if (!prof.bus_id.empty() && !seen.insert(prof.bus_id).second)
      r.add("E004", Reader::at(p, "bus"), "second load profile for bus '" + prof.bus_id + "'");
    if (const json* mw = r.array(l, "mw", p, true)) {
      for (std::size_t t = 0; t < mw->size(); ++t) {
        const auto vp = Reader::at(Reader::at(p, "mw"), t);
        if (!(*mw)[t].is_number()) {
          r.add("E002", vp, "expected a number");
          continue;
        }
        const double v = (*mw)[t].get<double>();
        if (!(v >= 0.0)) r.add("E007", vp, "load must be non-negative");
        prof.mw.push_back(v);
      }
      if (mw->size() != horizon)
        r.add("E012", Reader::at(p, "mw"), std::to_string(mw->size()) + " values for a " + std::to_string(horizon) +
                                                "-hour horizon");
    }
    if (bus != pn.buses.end() && !(bus->wtp > 0.0) &&
        std::any_of(prof.mw.begin(), prof.mw.end(), [](double v) { return v > 0.0; }))
      r.add("E018", p, "bus '" + prof.bus_id + "' carries load but has no willingness to pay");
    out.push_back(std::move(prof));
  }
}

std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

ScenarioError::ScenarioError(std::vector<ScenarioIssue> issues)
    : Error(ErrorCode::scenario, join_issues(issues)), issues_(std::move(issues)) {}

bool ScenarioError::has_code(std::string_view code) const {
  return std::any_of(issues_.begin(), issues_.end(), [&](const ScenarioIssue& i) { return i.code == code; });
}

Scenario parse_scenario(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    // byte is one past the offending character.
    const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string what = e.what();
    if (const auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
    throw ScenarioError({{"E001", "", "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what}});
  }

  Reader r;
  if (!root.is_object()) throw ScenarioError({{"E002", "", "scenario must be a JSON object"}});
  r.allow_keys(root, {"format", "metadata", "network", "generators", "loads", "regimes", "run"}, "");
  if (const auto fmt = r.text(root, "format", "", true); fmt && *fmt != kScenarioFormat)
    r.add("E016", "format", "unsupported format '" + *fmt + "', expected '" + kScenarioFormat + "'");

  ScenarioMetadata meta;
  ParsedNetwork pn;
  std::vector<UcGenerator> gens;
  std::vector<ConstraintRegime> regimes;
  RunSection run;
  std::vector<LoadProfile> profiles;
  read_metadata(r, root, meta);
  read_network(r, root, pn);
  read_generators(r, root, pn, gens);
  read_regimes(r, root, pn, regimes);
  read_run(r, root, gens, regimes, run);
  read_loads(r, root, pn, run.horizon_h, profiles);

  if (!r.issues.empty()) throw ScenarioError(std::move(r.issues));

  // Network construction re-checks what the reader checked; anything it
  // still rejects is reported rather than half-built.
  std::optional<Network> net;
  try {
    net.emplace(pn.buses, pn.lines, pn.interfaces, pn.slack, pn.base_mva);
  } catch (const Error& e) {
    throw ScenarioError({{"E002", "network", e.what()}});
  }
  Scenario s{std::move(meta), std::move(*net), std::move(gens), std::move(profiles), std::move(regimes),
             std::move(run)};
  for (std::size_t i = 0; i < s.run.forced_bounds.size(); ++i) {
    const auto& o = s.run.forced_bounds[i];
    const auto g = *s.find_generator(o.gen_id);
    auto spec = s.generators[g].spec;
    if (o.min_mw) spec.forced_min = o.min_mw;
    if (o.max_mw) spec.forced_max = o.max_mw;
    try {
      validate_generator(spec);
    } catch (const Error& e) {
      r.add("E017", Reader::at("run.forced_bounds", i), e.what());
    }
  }
  if (!r.issues.empty()) throw ScenarioError(std::move(r.issues));
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::io, "cannot read scenario file '" + path + "'");
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
  using oj = nlohmann::ordered_json;
  oj root;
  root["format"] = kScenarioFormat;
  root["metadata"] = {{"name", s.metadata.name},
                      {"currency", s.metadata.currency},
                      {"season", s.metadata.season},
                      {"time_of_day", s.metadata.time_of_day},
                      {"description", s.metadata.description}};
  const auto& net = s.network;
  oj network;
  network["base_mva"] = net.base_mva();
  network["slack_bus"] = net.slack_bus();
  network["zones"] = net.zones();
  network["buses"] = oj::array();
  for (const auto& b : net.buses())
    network["buses"].push_back({{"id", b.id}, {"zone", b.zone_id}, {"load_mw", b.load_mw}, {"wtp", b.wtp}});
  network["lines"] = oj::array();
  for (const auto& l : net.lines())
    network["lines"].push_back({{"id", l.id},
                                {"from", l.from_bus},
                                {"to", l.to_bus},
                                {"reactance", l.reactance},
                                {"limit_mw", l.limit_mw},
                                {"monitored_in", std::vector<std::string>(l.monitored_in.begin(), l.monitored_in.end())}});
  network["interfaces"] = oj::array();
  for (const auto& itf : net.interfaces()) {
    oj members = oj::array();
    for (const auto& m : itf.members) members.push_back({{"line", m.line_id}, {"direction", m.direction}});
    network["interfaces"].push_back({{"id", itf.id}, {"members", members}, {"ttc_mw", itf.ttc_mw}});
  }
  root["network"] = network;

  root["generators"] = oj::array();
  for (const auto& u : s.generators) {
    const auto& g = u.spec;
    oj j{{"id", g.id}, {"bus", g.bus_id}, {"p_min_mw", g.p_min}, {"p_max_mw", g.p_max},
         {"ic", g.ic}, {"nlc", g.nlc},    {"suc", g.suc}};
    if (g.forced_min) j["forced_min_mw"] = *g.forced_min;
    if (g.forced_max) j["forced_max_mw"] = *g.forced_max;
    j["synchronous"] = g.synchronous;
    j["min_up_h"] = u.min_up_h;
    j["min_down_h"] = u.min_down_h;
    j["initial_state"] = {{"on", u.initially_on}, {"hours", u.initial_hours}};
    if (u.ramp_mw_per_h) j["ramp_mw_per_h"] = *u.ramp_mw_per_h;
    root["generators"].push_back(j);
  }

  root["loads"] = oj::array();
  for (const auto& p : s.load_profiles) root["loads"].push_back({{"bus", p.bus_id}, {"mw", p.mw}});

  root["regimes"] = oj::array();
  for (const auto& r : s.regimes)
    root["regimes"].push_back({{"name", r.name},
                               {"mode", to_string(r.mode)},
                               {"monitored_profile", r.monitored_profile},
                               {"enforce_interfaces", r.enforce_interfaces},
                               {"reserve_req_mw", r.reserve_req_mw},
                               {"min_sync_mw", r.min_sync_mw}});

  oj run;
  run["schemes"] = oj::array();
  for (auto sc : s.run.schemes) run["schemes"].push_back(to_string(sc));
  run["scheme_regimes"] = oj::object();
  for (const auto& [sc, name] : s.run.scheme_regimes) run["scheme_regimes"][to_string(sc)] = name;
  run["horizon_h"] = s.run.horizon_h;
  run["forced_bounds"] = oj::array();
  for (const auto& f : s.run.forced_bounds) {
    oj j{{"generator", f.gen_id}};
    if (f.min_mw) j["min_mw"] = *f.min_mw;
    if (f.max_mw) j["max_mw"] = *f.max_mw;
    run["forced_bounds"].push_back(j);
  }
  run["bid_deviations"] = oj::array();
  for (const auto& b : s.run.bid_deviations)
    run["bid_deviations"].push_back({{"generator", b.gen_id}, {"offered_ic", b.offered_ic}});
  run["smp_grouping"] = s.run.smp_grouping == SmpGrouping::system ? "system" : "zone";
  if (s.run.dauc_regime) run["dauc_regime"] = *s.run.dauc_regime;
  if (s.run.ruc_regime) run["ruc_regime"] = *s.run.ruc_regime;
  root["run"] = run;
  return root.dump(2) + "\n";
}

std::vector<GeneratorSpec> Scenario::generator_specs() const {
  std::vector<GeneratorSpec> out;
  for (const auto& u : uc_generators()) out.push_back(u.spec);
  return out;
}

std::vector<UcGenerator> Scenario::uc_generators() const {
  auto out = generators;
  for (const auto& o : run.forced_bounds) {
    const auto g = find_generator(o.gen_id);
    if (!g) throw Error(ErrorCode::contract, "forced bound names unknown generator " + o.gen_id);
    if (o.min_mw) out[*g].spec.forced_min = o.min_mw;
    if (o.max_mw) out[*g].spec.forced_max = o.max_mw;
  }
  return out;
}

std::vector<std::vector<double>> Scenario::hourly_bus_loads() const {
  const auto base = network.bus_loads();
  std::vector<std::vector<double>> out(run.horizon_h, base);
  for (const auto& p : load_profiles) {
    const auto b = network.bus_index(p.bus_id);
    for (std::size_t t = 0; t < run.horizon_h && t < p.mw.size(); ++t) out[t][b] = p.mw[t];
  }
  return out;
}

std::optional<std::size_t> Scenario::find_generator(std::string_view id) const {
  for (std::size_t g = 0; g < generators.size(); ++g)
    if (generators[g].spec.id == id) return g;
  return std::nullopt;
}

const ConstraintRegime* Scenario::find_regime(std::string_view name) const {
  for (const auto& r : regimes)
    if (r.name == name) return &r;
  return nullptr;
}

ConstraintRegime Scenario::regime_for(MarketScheme s) const {
  if (const auto it = run.scheme_regimes.find(s); it != run.scheme_regimes.end()) {
    if (const auto* r = find_regime(it->second)) return *r;
  }
  const auto mode = clearing_mode_of(s);
  for (const auto& r : regimes)
    if (r.mode == mode) return r;
  return {to_string(s), mode, kAllLinesProfile, true, 0.0, 0.0};
}

}  // namespace gridclear
