#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gridclear {

struct Bus {
  std::string id;
  std::string zone_id;
  double load_mw = 0.0;
  double wtp = 0.0;  // willingness to pay, currency/MWh
};

struct Line {
  std::string id;
  std::string from_bus;
  std::string to_bus;
  double reactance = 0.0;  // per unit on the network MVA base
  double limit_mw = 0.0;
  std::set<std::string> monitored_in;  // constraint-profile tags
};

struct InterfaceMember {
  std::string line_id;
  int direction = +1;  // +1 counts from->to flow positive, -1 reverses it
};

/// Transfer limit over a signed set of lines. Covers both inter-area TTC
/// limits and flowgates.
struct Interface {
  std::string id;
  std::vector<InterfaceMember> members;
  double ttc_mw = 0.0;
};

/// Profile tag that selects every line regardless of its monitored_in set.
inline constexpr const char* kAllLinesProfile = "*";

/// Immutable DC network. Construction validates every structural invariant
/// and throws gridclear::Error on the first violation.
class Network {
 public:
  Network(std::vector<Bus> buses, std::vector<Line> lines,
          std::vector<Interface> interfaces, std::string slack_bus,
          double base_mva = 100.0);

  const std::vector<Bus>& buses() const noexcept { return buses_; }
  const std::vector<Line>& lines() const noexcept { return lines_; }
  const std::vector<Interface>& interfaces() const noexcept { return interfaces_; }
  const std::vector<std::string>& zones() const noexcept { return zones_; }
  const std::string& slack_bus() const noexcept { return slack_bus_; }
  double base_mva() const noexcept { return base_mva_; }

  std::size_t bus_count() const noexcept { return buses_.size(); }
  std::size_t line_count() const noexcept { return lines_.size(); }
  std::size_t slack_index() const noexcept { return slack_index_; }

  std::optional<std::size_t> find_bus(std::string_view id) const;
  std::optional<std::size_t> find_line(std::string_view id) const;
  std::optional<std::size_t> find_interface(std::string_view id) const;
  std::optional<std::size_t> find_zone(std::string_view id) const;
  std::size_t bus_index(std::string_view id) const;  // throws on unknown id
  std::size_t from_index(std::size_t line) const { return line_from_[line]; }
  std::size_t to_index(std::size_t line) const { return line_to_[line]; }
  std::size_t zone_of_bus(std::size_t bus) const { return bus_zone_[bus]; }

  /// Susceptance of a line in MW per radian.
  double susceptance_mw(std::size_t line) const {
    return base_mva_ / lines_[line].reactance;
  }

  bool is_inter_zonal(std::size_t line) const {
    return bus_zone_[line_from_[line]] != bus_zone_[line_to_[line]];
  }

  bool is_monitored(std::size_t line, std::string_view profile) const;

  std::vector<double> bus_loads() const;

  Network with_interface_limit(std::string_view interface_id, double ttc_mw) const;
  Network with_bus_loads(std::span<const double> loads_mw) const;

 private:
  std::vector<Bus> buses_;
  std::vector<Line> lines_;
  std::vector<Interface> interfaces_;
  std::vector<std::string> zones_;
  std::string slack_bus_;
  double base_mva_;
  std::size_t slack_index_ = 0;
  std::vector<std::size_t> line_from_;
  std::vector<std::size_t> line_to_;
  std::vector<std::size_t> bus_zone_;
};

/// Line x bus injection shift factors relative to the slack bus.
class PtdfMatrix {
 public:
  PtdfMatrix() = default;
  explicit PtdfMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {}

  double at(std::size_t line, std::size_t bus) const {
    return entries_(static_cast<Eigen::Index>(line), static_cast<Eigen::Index>(bus));
  }
  std::size_t line_count() const { return static_cast<std::size_t>(entries_.rows()); }
  std::size_t bus_count() const { return static_cast<std::size_t>(entries_.cols()); }
  const Eigen::MatrixXd& entries() const noexcept { return entries_; }

 private:
  Eigen::MatrixXd entries_;
};

PtdfMatrix build_ptdf(const Network& net);

/// Injection balance tolerance for flow evaluation, MW.
inline constexpr double kBalanceToleranceMw = 1e-6;

struct FlowReport {
  std::vector<double> flow_mw;              // signed, from->to positive
  std::vector<std::size_t> overloaded;      // line indices with |flow| > limit
  std::vector<double> interface_flow_mw;
  std::vector<std::size_t> interface_overloaded;
};

/// Per-line flows for a balanced per-bus net injection vector.
FlowReport evaluate_flows(const Network& net, const PtdfMatrix& ptdf,
                          std::span<const double> injection_mw,
                          double limit_tolerance_mw = 1e-6);

std::vector<double> interface_flows(const Network& net, const PtdfMatrix& ptdf,
                                    std::span<const double> injection_mw);

double interface_flow(const Network& net, const PtdfMatrix& ptdf,
                      std::span<const double> injection_mw,
                      std::string_view interface_id);

/// Shift factor of an interface with respect to a bus injection.
double interface_ptdf(const Network& net, const PtdfMatrix& ptdf,
                      std::size_t interface, std::size_t bus);

}  // namespace gridclear
