#include "energytwin/lp.hpp"

#include <algorithm>
#include <cmath>

#include "energytwin/errors.hpp"

namespace energytwin::lp {

std::size_t LinearProgram::add_variable(double cost, double lower, double upper) {
  if (!std::isfinite(lower)) throw InfeasibleLP("variable lower bound must be finite");
  if (upper < lower) throw InfeasibleLP("variable upper bound below lower bound");
  cost_.push_back(cost);
  lower_.push_back(lower);
  upper_.push_back(upper);
  return cost_.size() - 1;
}

void LinearProgram::add_row(std::vector<Term> terms, Sense sense, double rhs) {
  for (const auto& [j, a] : terms)
    if (j >= cost_.size()) throw InfeasibleLP("row references unknown variable");
  rows_.push_back(Row{std::move(terms), sense, rhs});
}

double LinearProgram::evaluate(const std::vector<double>& x) const {
  double v = 0.0;
  for (std::size_t j = 0; j < cost_.size(); ++j) v += cost_[j] * x[j];
  return v;
}

double LinearProgram::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < cost_.size(); ++j) {
    worst = std::max(worst, lower_[j] - x[j]);
    if (std::isfinite(upper_[j])) worst = std::max(worst, x[j] - upper_[j]);
  }
  for (const Row& r : rows_) {
    double lhs = 0.0;
    for (const auto& [j, a] : r.terms) lhs += a * x[j];
    switch (r.sense) {
      case Sense::LessEqual: worst = std::max(worst, lhs - r.rhs); break;
      case Sense::GreaterEqual: worst = std::max(worst, r.rhs - lhs); break;
      case Sense::Equal: worst = std::max(worst, std::abs(lhs - r.rhs)); break;
    }
  }
  return worst;
}

namespace {

constexpr double kPivotEps = 1e-11;
constexpr double kCostEps = 1e-10;

// Dense tableau in standard form: rows of [A | b], with basis[i] naming the
// column that is basic in row i. The reduced-cost row lives separately.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), a_(rows * (cols + 1), 0.0), basis_(rows, 0) {}

  double& at(std::size_t i, std::size_t j) { return a_[i * (n_ + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return a_[i * (n_ + 1) + j]; }
  double& rhs(std::size_t i) { return at(i, n_); }
  double rhs(std::size_t i) const { return at(i, n_); }

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void load_objective(const std::vector<double>& cost) {
    cost_ = cost;
    reduced_.assign(n_ + 1, 0.0);
    for (std::size_t j = 0; j < n_; ++j) reduced_[j] = cost[j];
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) reduced_[j] -= cb * at(i, j);
    }
  }

  // Current objective value (reduced_[n] holds -z).
  double objective() const { return -reduced_[n_]; }

  void pivot(std::size_t r, std::size_t c) {
    const double p = at(r, c);
    for (std::size_t j = 0; j <= n_; ++j) at(r, j) /= p;
    at(r, c) = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) at(i, j) -= f * at(r, j);
      at(i, c) = 0.0;
    }
    const double f = reduced_[c];
    if (f != 0.0) {
      for (std::size_t j = 0; j <= n_; ++j) reduced_[j] -= f * at(r, j);
      reduced_[c] = 0.0;
    }
    basis_[r] = c;
  }

  // Runs simplex iterations over columns [0, allowed). Returns false if unbounded.
  bool optimise(std::size_t allowed, std::size_t& pivots) {
    for (;;) {
      std::size_t enter = allowed;
      for (std::size_t j = 0; j < allowed; ++j) {
        if (reduced_[j] < -kCostEps) {
          enter = j;
          break;
        }
      }
      if (enter == allowed) return true;

      std::size_t leave = m_;
      double best = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = at(i, enter);
        if (a <= kPivotEps) continue;
        const double ratio = rhs(i) / a;
        if (leave == m_ || ratio < best - 1e-12 ||
            (ratio <= best + 1e-12 && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == m_) return false;
      pivot(leave, enter);
      ++pivots;
    }
  }

 private:
  std::size_t m_, n_;
  std::vector<double> a_;
  std::vector<std::size_t> basis_;
  std::vector<double> cost_;
  std::vector<double> reduced_;
};

struct StdRow {
  std::vector<double> coeffs;
  Sense sense;
  double rhs;
};

}  // namespace

Solution solve(const LinearProgram& program) {
  const std::size_t n = program.variable_count();

  // Shift x = lower + y so every structural variable is y >= 0, and turn
  // finite upper bounds into explicit rows.
  std::vector<StdRow> rows;
  rows.reserve(program.row_count() + n);
  for (const auto& r : program.rows()) {
    StdRow s{std::vector<double>(n, 0.0), r.sense, r.rhs};
    for (const auto& [j, a] : r.terms) {
      s.coeffs[j] += a;
      s.rhs -= a * program.lower(j);
    }
    rows.push_back(std::move(s));
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(program.upper(j))) continue;
    StdRow s{std::vector<double>(n, 0.0), Sense::LessEqual, program.upper(j) - program.lower(j)};
    s.coeffs[j] = 1.0;
    rows.push_back(std::move(s));
  }
  for (auto& r : rows) {
    if (r.rhs < 0.0) {
      for (double& a : r.coeffs) a = -a;
      r.rhs = -r.rhs;
      if (r.sense == Sense::LessEqual)
        r.sense = Sense::GreaterEqual;
      else if (r.sense == Sense::GreaterEqual)
        r.sense = Sense::LessEqual;
    }
  }

  const std::size_t m = rows.size();
  std::size_t slack_count = 0, artificial_count = 0;
  for (const auto& r : rows) {
    if (r.sense != Sense::Equal) ++slack_count;
    if (r.sense != Sense::LessEqual) ++artificial_count;
  }
  const std::size_t first_slack = n;
  const std::size_t first_artificial = n + slack_count;
  const std::size_t total = first_artificial + artificial_count;

  Tableau t(m, total);
  std::size_t next_slack = first_slack, next_art = first_artificial;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& r = rows[i];
    for (std::size_t j = 0; j < n; ++j) t.at(i, j) = r.coeffs[j];
    t.rhs(i) = r.rhs;
    switch (r.sense) {
      case Sense::LessEqual:
        t.at(i, next_slack) = 1.0;
        t.basis()[i] = next_slack++;
        break;
      case Sense::GreaterEqual:
        t.at(i, next_slack++) = -1.0;
        t.at(i, next_art) = 1.0;
        t.basis()[i] = next_art++;
        break;
      case Sense::Equal:
        t.at(i, next_art) = 1.0;
        t.basis()[i] = next_art++;
        break;
    }
  }

  Solution sol;

  if (artificial_count > 0) {
    std::vector<double> phase1(total, 0.0);
    for (std::size_t j = first_artificial; j < total; ++j) phase1[j] = 1.0;
    t.load_objective(phase1);
    t.optimise(total, sol.pivots);
    double scale = 1.0;
    for (const auto& r : rows) scale = std::max(scale, std::abs(r.rhs));
    if (t.objective() > 1e-9 * scale) throw InfeasibleLP("linear program has no feasible point");

    // Drive remaining zero-level artificials out of the basis where possible.
    for (std::size_t i = 0; i < m; ++i) {
      if (t.basis()[i] < first_artificial) continue;
      for (std::size_t j = 0; j < first_artificial; ++j) {
        if (std::abs(t.at(i, j)) > 1e-9) {
          t.pivot(i, j);
          ++sol.pivots;
          break;
        }
      }
    }
  }

  std::vector<double> phase2(total, 0.0);
  for (std::size_t j = 0; j < n; ++j) phase2[j] = program.cost(j);
  t.load_objective(phase2);
  if (!t.optimise(first_artificial, sol.pivots)) throw UnboundedLP("linear program is unbounded");

  sol.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (t.basis()[i] < n) sol.x[t.basis()[i]] = std::max(0.0, t.rhs(i));
  for (std::size_t j = 0; j < n; ++j) sol.x[j] += program.lower(j);
  sol.objective = program.evaluate(sol.x);
  return sol;
}

}  // namespace energytwin::lp
