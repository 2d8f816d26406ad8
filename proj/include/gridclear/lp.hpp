#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace gridclear::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Relation { less_equal, equal, greater_equal };

struct Term {
  std::size_t var;
  double coeff;
};

struct Variable {
  double cost = 0.0;
  double lower = 0.0;
  double upper = kInfinity;
  std::string name;
};

struct Constraint {
  std::vector<Term> terms;
  Relation relation = Relation::less_equal;
  double rhs = 0.0;
  std::string label;
};

/// Minimisation LP over bounded variables. Labels must be unique.
class LinearProgram {
 public:
  std::size_t add_variable(double cost, double lower, double upper, std::string name = {});
  std::size_t add_constraint(std::vector<Term> terms, Relation rel, double rhs, std::string label);

  const std::vector<Variable>& variables() const noexcept { return vars_; }
  const std::vector<Constraint>& constraints() const noexcept { return rows_; }
  std::size_t variable_count() const noexcept { return vars_.size(); }
  std::size_t constraint_count() const noexcept { return rows_.size(); }

  void set_cost(std::size_t var, double cost) { vars_.at(var).cost = cost; }
  void fix_variable(std::size_t var, double value) { vars_.at(var).lower = vars_.at(var).upper = value; }
  void set_relation(std::size_t row, Relation rel) { rows_.at(row).relation = rel; }

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  std::unordered_set<std::string> labels_;
};

struct Tolerances {
  double feasibility = 1e-7;
  double optimality = 1e-7;
  double pivot = 1e-9;
  std::size_t max_iterations = 200000;
};

enum class Status { optimal, infeasible, unbounded };

const char* to_string(Status s);

/// Duals follow d(objective)/d(rhs): a binding <= row in a minimisation has a
/// non-positive dual, a binding >= row a non-negative one, and the dual of a
/// demand balance equality is the marginal cost of serving one more MW.
struct Solution {
  Status status = Status::infeasible;
  std::vector<double> primal;
  std::vector<double> duals;
  std::vector<double> reduced_costs;  // c_j - sum_i y_i a_ij
  double objective_value = 0.0;
  std::size_t iterations = 0;
};

/// Dense two-phase primal simplex with Bland's rule.
Solution solve(const LinearProgram& lp, const Tolerances& tol = {});

}  // namespace gridclear::lp
