#include "gridclear/lp.hpp"

#include <algorithm>
#include <cmath>

#include "gridclear/error.hpp"

namespace gridclear::lp {

std::size_t LinearProgram::add_variable(double cost, double lower, double upper, std::string name) {
  if (std::isnan(cost) || std::isnan(lower) || std::isnan(upper) || !std::isfinite(cost))
    throw Error(ErrorCode::contract, "variable " + name + " has a non-finite cost or NaN bound");
  if (lower == kInfinity || upper == -kInfinity || lower > upper)
    throw Error(ErrorCode::contract, "variable " + name + " has an unusable bound");
  vars_.push_back({cost, lower, upper, std::move(name)});
  return vars_.size() - 1;
}

std::size_t LinearProgram::add_constraint(std::vector<Term> terms, Relation rel, double rhs,
                                          std::string label) {
  if (label.empty()) label = "row" + std::to_string(rows_.size());
  if (!std::isfinite(rhs)) throw Error(ErrorCode::contract, "constraint " + label + " has non-finite rhs");
  for (const auto& t : terms) {
    if (t.var >= vars_.size())
      throw Error(ErrorCode::contract, "constraint " + label + " references an unknown variable");
    if (!std::isfinite(t.coeff))
      throw Error(ErrorCode::contract, "constraint " + label + " has a non-finite coefficient");
  }
  if (!labels_.insert(label).second)
    throw Error(ErrorCode::contract, "duplicate constraint label " + label);
  rows_.push_back({std::move(terms), rel, rhs, std::move(label)});
  return rows_.size() - 1;
}

const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
  }
  return "unknown";
}

namespace {

enum class ColKind { fixed, shifted_lower, shifted_upper, free };

struct ColumnMap {
  ColKind kind;
  std::size_t col = 0;  // first standard-form column
  double offset = 0.0;
};

/// Standard form: min c'x, Ax = b, x >= 0, b >= 0, held as a dense tableau.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * (cols + 1), 0.0), basis_(rows, 0) {}

  double& at(std::size_t r, std::size_t c) { return a_[r * (cols_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return a_[r * (cols_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, cols_); }
  double rhs(std::size_t r) const { return at(r, cols_); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::vector<std::size_t>& basis() { return basis_; }
  const std::vector<std::size_t>& basis() const { return basis_; }

  // Objective rows hold reduced costs; the trailing entry holds -z.
  void pivot(std::size_t r, std::size_t c, std::vector<std::vector<double>*> objective_rows) {
    const std::size_t width = cols_ + 1;
    double* prow = &a_[r * width];
    const double inv = 1.0 / prow[c];
    for (std::size_t j = 0; j < width; ++j) prow[j] *= inv;
    prow[c] = 1.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (i == r) continue;
      double* row = &a_[i * width];
      const double f = row[c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width; ++j) row[j] -= f * prow[j];
      row[c] = 0.0;
    }
    for (auto* obj : objective_rows) {
      auto& o = *obj;
      const double f = o[c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width; ++j) o[j] -= f * prow[j];
      o[c] = 0.0;
    }
    basis_[r] = c;
  }

 private:
  std::size_t rows_, cols_;
  std::vector<double> a_;
  std::vector<std::size_t> basis_;
};

enum class StepResult { optimal, unbounded };

// Bland's rule: lowest-index improving column, ratio ties to the lowest basic index.
StepResult run_simplex(Tableau& t, std::vector<double>& obj, std::vector<double>* other,
                       std::size_t allowed_cols, const Tolerances& tol, std::size_t& iterations) {
  while (true) {
    std::size_t enter = allowed_cols;
    for (std::size_t j = 0; j < allowed_cols; ++j) {
      if (obj[j] < -tol.optimality) {
        enter = j;
        break;
      }
    }
    if (enter == allowed_cols) return StepResult::optimal;

    std::size_t leave = t.rows();
    double best = 0.0;
    for (std::size_t r = 0; r < t.rows(); ++r) {
      const double a = t.at(r, enter);
      if (a <= tol.pivot) continue;
      const double ratio = std::max(t.rhs(r), 0.0) / a;
      if (leave == t.rows()) {
        leave = r;
        best = ratio;
        continue;
      }
      const double slack = 1e-12 * std::max(1.0, std::abs(best));
      if (ratio < best - slack ||
          (std::abs(ratio - best) <= slack && t.basis()[r] < t.basis()[leave])) {
        leave = r;
        best = ratio;
      }
    }
    if (leave == t.rows()) return StepResult::unbounded;

    std::vector<std::vector<double>*> objs{&obj};
    if (other) objs.push_back(other);
    t.pivot(leave, enter, objs);
    if (++iterations > tol.max_iterations)
      throw Error(ErrorCode::numerical, "simplex iteration limit exceeded");
  }
}

}  // namespace

Solution solve(const LinearProgram& lp, const Tolerances& tol) {
  const auto& vars = lp.variables();
  const auto& cons = lp.constraints();
  Solution sol;

  // Map original variables onto non-negative standard columns.
  std::vector<ColumnMap> cmap(vars.size());
  std::size_t ns = 0;
  struct UpperRow {
    std::size_t col;
    double bound;
  };
  std::vector<UpperRow> upper_rows;
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const auto& v = vars[j];
    if (v.lower > v.upper) {
      sol.status = Status::infeasible;
      return sol;
    }
    if (std::isfinite(v.lower) && v.lower == v.upper) {
      cmap[j] = {ColKind::fixed, 0, v.lower};
    } else if (std::isfinite(v.lower)) {
      cmap[j] = {ColKind::shifted_lower, ns, v.lower};
      if (std::isfinite(v.upper)) upper_rows.push_back({ns, v.upper - v.lower});
      ns += 1;
    } else if (std::isfinite(v.upper)) {
      cmap[j] = {ColKind::shifted_upper, ns, v.upper};
      ns += 1;
    } else {
      cmap[j] = {ColKind::free, ns, 0.0};
      ns += 2;
    }
  }

  struct StdRow {
    std::vector<double> coeffs;
    Relation rel;
    double rhs;
  };
  const std::size_t m_orig = cons.size();
  const std::size_t m = m_orig + upper_rows.size();
  std::vector<StdRow> rows;
  rows.reserve(m);
  for (const auto& c : cons) {
    StdRow r{std::vector<double>(ns, 0.0), c.relation, c.rhs};
    for (const auto& t : c.terms) {
      const auto& cm = cmap[t.var];
      switch (cm.kind) {
        case ColKind::fixed: r.rhs -= t.coeff * cm.offset; break;
        case ColKind::shifted_lower:
          r.coeffs[cm.col] += t.coeff;
          r.rhs -= t.coeff * cm.offset;
          break;
        case ColKind::shifted_upper:
          r.coeffs[cm.col] -= t.coeff;
          r.rhs -= t.coeff * cm.offset;
          break;
        case ColKind::free:
          r.coeffs[cm.col] += t.coeff;
          r.coeffs[cm.col + 1] -= t.coeff;
          break;
      }
    }
    rows.push_back(std::move(r));
  }
  for (const auto& u : upper_rows) {
    StdRow r{std::vector<double>(ns, 0.0), Relation::less_equal, u.bound};
    r.coeffs[u.col] = 1.0;
    rows.push_back(std::move(r));
  }

  std::vector<std::size_t> slack_col(m, SIZE_MAX);
  std::size_t nslack = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (rows[i].rel != Relation::equal) slack_col[i] = ns + nslack++;
  }
  std::vector<double> slack_sign(m, 0.0);
  std::vector<bool> flipped(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    if (rows[i].rel == Relation::less_equal) slack_sign[i] = 1.0;
    if (rows[i].rel == Relation::greater_equal) slack_sign[i] = -1.0;
    if (rows[i].rhs < 0.0) {
      flipped[i] = true;
      for (auto& a : rows[i].coeffs) a = -a;
      rows[i].rhs = -rows[i].rhs;
      slack_sign[i] = -slack_sign[i];
    }
  }
  std::vector<std::size_t> identity_col(m, SIZE_MAX);
  std::size_t nart = 0;
  const std::size_t art_begin = ns + nslack;
  for (std::size_t i = 0; i < m; ++i) {
    if (slack_sign[i] > 0.0) {
      identity_col[i] = slack_col[i];
    } else {
      identity_col[i] = art_begin + nart++;
    }
  }
  const std::size_t ncols = art_begin + nart;

  Tableau t(m, ncols);
  double bmax = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < ns; ++j) t.at(i, j) = rows[i].coeffs[j];
    if (slack_col[i] != SIZE_MAX) t.at(i, slack_col[i]) = slack_sign[i];
    t.at(i, identity_col[i]) = 1.0;
    t.rhs(i) = rows[i].rhs;
    t.basis()[i] = identity_col[i];
    bmax = std::max(bmax, rows[i].rhs);
  }

  std::vector<double> cost_std(ncols + 1, 0.0);
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const auto& cm = cmap[j];
    const double c = vars[j].cost;
    switch (cm.kind) {
      case ColKind::fixed: break;
      case ColKind::shifted_lower: cost_std[cm.col] += c; break;
      case ColKind::shifted_upper: cost_std[cm.col] -= c; break;
      case ColKind::free:
        cost_std[cm.col] += c;
        cost_std[cm.col + 1] -= c;
        break;
    }
  }

  std::vector<double> phase2 = cost_std;  // initial basis has zero phase-2 cost
  std::size_t iterations = 0;

  if (nart > 0) {
    std::vector<double> phase1(ncols + 1, 0.0);
    for (std::size_t j = art_begin; j < ncols; ++j) phase1[j] = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (identity_col[i] < art_begin) continue;
      for (std::size_t j = 0; j <= ncols; ++j) phase1[j] -= t.at(i, j);
    }
    run_simplex(t, phase1, &phase2, art_begin, tol, iterations);
    const double infeasibility = -phase1[ncols];
    if (infeasibility > tol.feasibility * bmax) {
      sol.status = Status::infeasible;
      sol.iterations = iterations;
      return sol;
    }
    // Drive zero-level artificials out of the basis where possible.
    for (std::size_t i = 0; i < m; ++i) {
      if (t.basis()[i] < art_begin) continue;
      std::size_t col = art_begin;
      for (std::size_t j = 0; j < art_begin; ++j) {
        if (std::abs(t.at(i, j)) > tol.pivot) {
          col = j;
          break;
        }
      }
      if (col == art_begin) continue;  // redundant row
      t.rhs(i) = 0.0;
      t.pivot(i, col, {&phase1, &phase2});
    }
  }

  if (run_simplex(t, phase2, nullptr, art_begin, tol, iterations) == StepResult::unbounded) {
    sol.status = Status::unbounded;
    sol.iterations = iterations;
    return sol;
  }

  std::vector<double> x_std(ncols, 0.0);
  for (std::size_t i = 0; i < m; ++i) x_std[t.basis()[i]] = t.rhs(i);

  sol.status = Status::optimal;
  sol.iterations = iterations;
  sol.primal.resize(vars.size());
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const auto& cm = cmap[j];
    switch (cm.kind) {
      case ColKind::fixed: sol.primal[j] = cm.offset; break;
      case ColKind::shifted_lower: sol.primal[j] = cm.offset + x_std[cm.col]; break;
      case ColKind::shifted_upper: sol.primal[j] = cm.offset - x_std[cm.col]; break;
      case ColKind::free: sol.primal[j] = x_std[cm.col] - x_std[cm.col + 1]; break;
    }
  }

  sol.duals.resize(m_orig);
  for (std::size_t i = 0; i < m_orig; ++i) {
    const double y = -phase2[identity_col[i]];
    sol.duals[i] = flipped[i] ? -y : y;
  }

  sol.reduced_costs.resize(vars.size());
  for (std::size_t j = 0; j < vars.size(); ++j) sol.reduced_costs[j] = vars[j].cost;
  for (std::size_t i = 0; i < m_orig; ++i) {
    for (const auto& term : cons[i].terms) sol.reduced_costs[term.var] -= sol.duals[i] * term.coeff;
  }

  double obj = 0.0;
  for (std::size_t j = 0; j < vars.size(); ++j) obj += vars[j].cost * sol.primal[j];
  sol.objective_value = obj;
  return sol;
}

}  // namespace gridclear::lp
