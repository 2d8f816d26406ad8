#include "gridclear/grid_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>
#include <unordered_map>

#include "gridclear/error.hpp"

namespace gridclear {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::structural: return "structural";
    case ErrorCode::numerical: return "numerical";
    case ErrorCode::contract: return "contract";
    case ErrorCode::pricing_failure: return "pricing_failure";
    case ErrorCode::capacity: return "capacity";
    case ErrorCode::io: return "io";
    case ErrorCode::scenario: return "scenario";
  }
  return "unknown";
}

namespace {

template <typename T>
std::optional<std::size_t> find_by_id(const std::vector<T>& items, std::string_view id) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].id == id) return i;
  }
  return std::nullopt;
}

[[noreturn]] void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

bool connected(std::size_t n, const std::vector<std::size_t>& from,
               const std::vector<std::size_t>& to) {
  if (n == 0) return false;
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t l = 0; l < from.size(); ++l) {
    adj[from[l]].push_back(to[l]);
    adj[to[l]].push_back(from[l]);
  }
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> q;
  q.push(0);
  seen[0] = true;
  std::size_t count = 1;
  while (!q.empty()) {
    auto b = q.front();
    q.pop();
    for (auto nb : adj[b]) {
      if (!seen[nb]) {
        seen[nb] = true;
        ++count;
        q.push(nb);
      }
    }
  }
  return count == n;
}

}  // namespace

Network::Network(std::vector<Bus> buses, std::vector<Line> lines,
                 std::vector<Interface> interfaces, std::string slack_bus,
                 double base_mva)
    : buses_(std::move(buses)),
      lines_(std::move(lines)),
      interfaces_(std::move(interfaces)),
      slack_bus_(std::move(slack_bus)),
      base_mva_(base_mva) {
  if (buses_.empty()) fail(ErrorCode::structural, "network has no buses");
  if (!(base_mva_ > 0.0)) fail(ErrorCode::contract, "base MVA must be positive");

  std::unordered_map<std::string, std::size_t> bus_ids;
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    const auto& b = buses_[i];
    if (!bus_ids.emplace(b.id, i).second) fail(ErrorCode::structural, "duplicate bus id " + b.id);
    if (b.zone_id.empty()) fail(ErrorCode::structural, "bus " + b.id + " has no zone");
    if (b.load_mw < 0.0) fail(ErrorCode::contract, "bus " + b.id + " has negative load");
    if (b.load_mw > 0.0 && !(b.wtp > 0.0))
      fail(ErrorCode::contract, "bus " + b.id + " has load but no positive willingness to pay");
    auto z = std::find(zones_.begin(), zones_.end(), b.zone_id);
    if (z == zones_.end()) {
      bus_zone_.push_back(zones_.size());
      zones_.push_back(b.zone_id);
    } else {
      bus_zone_.push_back(static_cast<std::size_t>(z - zones_.begin()));
    }
  }

  auto slack = bus_ids.find(slack_bus_);
  if (slack == bus_ids.end()) fail(ErrorCode::structural, "slack bus " + slack_bus_ + " not found");
  slack_index_ = slack->second;

  std::unordered_map<std::string, std::size_t> line_ids;
  for (std::size_t l = 0; l < lines_.size(); ++l) {
    const auto& ln = lines_[l];
    if (!line_ids.emplace(ln.id, l).second) fail(ErrorCode::structural, "duplicate line id " + ln.id);
    auto f = bus_ids.find(ln.from_bus);
    auto t = bus_ids.find(ln.to_bus);
    if (f == bus_ids.end() || t == bus_ids.end())
      fail(ErrorCode::structural, "line " + ln.id + " references an unknown bus");
    if (f->second == t->second) fail(ErrorCode::structural, "line " + ln.id + " is a self loop");
    if (!(ln.reactance > 0.0)) fail(ErrorCode::contract, "line " + ln.id + " reactance must be positive");
    if (!(ln.limit_mw > 0.0)) fail(ErrorCode::contract, "line " + ln.id + " limit must be positive");
    line_from_.push_back(f->second);
    line_to_.push_back(t->second);
  }

  std::set<std::string> if_ids;
  for (const auto& itf : interfaces_) {
    if (!if_ids.insert(itf.id).second) fail(ErrorCode::structural, "duplicate interface id " + itf.id);
    if (itf.members.empty()) fail(ErrorCode::structural, "interface " + itf.id + " has no member lines");
    if (!(itf.ttc_mw > 0.0)) fail(ErrorCode::contract, "interface " + itf.id + " TTC must be positive");
    for (const auto& m : itf.members) {
      if (!line_ids.count(m.line_id))
        fail(ErrorCode::structural, "interface " + itf.id + " references unknown line " + m.line_id);
      if (m.direction != 1 && m.direction != -1)
        fail(ErrorCode::contract, "interface " + itf.id + " member direction must be +1 or -1");
    }
  }

  if (!connected(buses_.size(), line_from_, line_to_))
    fail(ErrorCode::structural, "network is not connected");
}

std::optional<std::size_t> Network::find_bus(std::string_view id) const { return find_by_id(buses_, id); }
std::optional<std::size_t> Network::find_line(std::string_view id) const { return find_by_id(lines_, id); }
std::optional<std::size_t> Network::find_interface(std::string_view id) const {
  return find_by_id(interfaces_, id);
}
std::optional<std::size_t> Network::find_zone(std::string_view id) const {
  auto it = std::find(zones_.begin(), zones_.end(), id);
  if (it == zones_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - zones_.begin());
}

std::size_t Network::bus_index(std::string_view id) const {
  auto idx = find_bus(id);
  if (!idx) fail(ErrorCode::contract, "unknown bus " + std::string(id));
  return *idx;
}

bool Network::is_monitored(std::size_t line, std::string_view profile) const {
  if (profile == kAllLinesProfile) return true;
  return lines_[line].monitored_in.count(std::string(profile)) > 0;
}

std::vector<double> Network::bus_loads() const {
  std::vector<double> out;
  out.reserve(buses_.size());
  for (const auto& b : buses_) out.push_back(b.load_mw);
  return out;
}

Network Network::with_interface_limit(std::string_view interface_id, double ttc_mw) const {
  auto idx = find_interface(interface_id);
  if (!idx) fail(ErrorCode::contract, "unknown interface " + std::string(interface_id));
  auto itfs = interfaces_;
  itfs[*idx].ttc_mw = ttc_mw;
  return Network(buses_, lines_, std::move(itfs), slack_bus_, base_mva_);
}

Network Network::with_bus_loads(std::span<const double> loads_mw) const {
  if (loads_mw.size() != buses_.size()) fail(ErrorCode::contract, "load vector size mismatch");
  auto buses = buses_;
  for (std::size_t i = 0; i < buses.size(); ++i) buses[i].load_mw = loads_mw[i];
  return Network(std::move(buses), lines_, interfaces_, slack_bus_, base_mva_);
}

PtdfMatrix build_ptdf(const Network& net) {
  const auto nb = static_cast<Eigen::Index>(net.bus_count());
  const auto nl = static_cast<Eigen::Index>(net.line_count());
  const auto slack = static_cast<Eigen::Index>(net.slack_index());

  std::vector<std::size_t> from, to;
  for (std::size_t l = 0; l < net.line_count(); ++l) {
    from.push_back(net.from_index(l));
    to.push_back(net.to_index(l));
  }
  if (!connected(net.bus_count(), from, to))
    fail(ErrorCode::structural, "cannot build PTDF: network is not connected");

  // Reduced susceptance matrix with the slack row/column removed.
  auto reduced = [slack](Eigen::Index b) { return b < slack ? b : b - 1; };
  Eigen::MatrixXd b_red = Eigen::MatrixXd::Zero(nb - 1, nb - 1);
  for (Eigen::Index l = 0; l < nl; ++l) {
    const auto i = static_cast<Eigen::Index>(from[static_cast<std::size_t>(l)]);
    const auto j = static_cast<Eigen::Index>(to[static_cast<std::size_t>(l)]);
    const double b = net.susceptance_mw(static_cast<std::size_t>(l));
    if (i != slack) b_red(reduced(i), reduced(i)) += b;
    if (j != slack) b_red(reduced(j), reduced(j)) += b;
    if (i != slack && j != slack) {
      b_red(reduced(i), reduced(j)) -= b;
      b_red(reduced(j), reduced(i)) -= b;
    }
  }

  Eigen::MatrixXd theta_per_injection = Eigen::MatrixXd::Zero(nb, nb);
  if (nb > 1) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(b_red);
    if (!lu.isInvertible())
      fail(ErrorCode::numerical, "reduced susceptance matrix is singular");
    const Eigen::MatrixXd x = lu.inverse();
    for (Eigen::Index r = 0; r < nb; ++r) {
      if (r == slack) continue;
      for (Eigen::Index c = 0; c < nb; ++c) {
        if (c == slack) continue;
        theta_per_injection(r, c) = x(reduced(r), reduced(c));
      }
    }
  }

  Eigen::MatrixXd ptdf = Eigen::MatrixXd::Zero(nl, nb);
  for (Eigen::Index l = 0; l < nl; ++l) {
    const auto i = static_cast<Eigen::Index>(from[static_cast<std::size_t>(l)]);
    const auto j = static_cast<Eigen::Index>(to[static_cast<std::size_t>(l)]);
    const double b = net.susceptance_mw(static_cast<std::size_t>(l));
    ptdf.row(l) = b * (theta_per_injection.row(i) - theta_per_injection.row(j));
  }
  return PtdfMatrix(std::move(ptdf));
}

namespace {

void check_balanced(const Network& net, const PtdfMatrix& ptdf, std::span<const double> inj) {
  if (inj.size() != net.bus_count() || ptdf.bus_count() != net.bus_count() ||
      ptdf.line_count() != net.line_count())
    fail(ErrorCode::contract, "injection/PTDF dimensions do not match the network");
  const double total = std::accumulate(inj.begin(), inj.end(), 0.0);
  if (std::abs(total) > kBalanceToleranceMw)
    fail(ErrorCode::contract, "injections are unbalanced by " + std::to_string(total) + " MW");
}

double line_flow(const PtdfMatrix& ptdf, std::size_t l, std::span<const double> inj) {
  double f = 0.0;
  for (std::size_t b = 0; b < inj.size(); ++b) f += ptdf.at(l, b) * inj[b];
  return f;
}

}  // namespace

double interface_ptdf(const Network& net, const PtdfMatrix& ptdf, std::size_t interface,
                      std::size_t bus) {
  double s = 0.0;
  for (const auto& m : net.interfaces()[interface].members) {
    s += m.direction * ptdf.at(*net.find_line(m.line_id), bus);
  }
  return s;
}

FlowReport evaluate_flows(const Network& net, const PtdfMatrix& ptdf,
                          std::span<const double> injection_mw, double limit_tolerance_mw) {
  check_balanced(net, ptdf, injection_mw);
  FlowReport report;
  report.flow_mw.resize(net.line_count());
  for (std::size_t l = 0; l < net.line_count(); ++l) {
    report.flow_mw[l] = line_flow(ptdf, l, injection_mw);
    if (std::abs(report.flow_mw[l]) > net.lines()[l].limit_mw + limit_tolerance_mw)
      report.overloaded.push_back(l);
  }
  const auto& itfs = net.interfaces();
  report.interface_flow_mw.resize(itfs.size());
  for (std::size_t k = 0; k < itfs.size(); ++k) {
    double f = 0.0;
    for (const auto& m : itfs[k].members) f += m.direction * report.flow_mw[*net.find_line(m.line_id)];
    report.interface_flow_mw[k] = f;
    if (std::abs(f) > itfs[k].ttc_mw + limit_tolerance_mw) report.interface_overloaded.push_back(k);
  }
  return report;
}

std::vector<double> interface_flows(const Network& net, const PtdfMatrix& ptdf,
                                    std::span<const double> injection_mw) {
  return evaluate_flows(net, ptdf, injection_mw).interface_flow_mw;
}

double interface_flow(const Network& net, const PtdfMatrix& ptdf,
                      std::span<const double> injection_mw, std::string_view interface_id) {
  auto idx = net.find_interface(interface_id);
  if (!idx) fail(ErrorCode::contract, "unknown interface " + std::string(interface_id));
  return interface_flows(net, ptdf, injection_mw)[*idx];
}

}  // namespace gridclear
