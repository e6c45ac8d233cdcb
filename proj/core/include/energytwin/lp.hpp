#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace energytwin::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Sense { LessEqual, Equal, GreaterEqual };

/// Minimise c'x subject to sparse rows and finite lower / optional upper bounds.
class LinearProgram {
 public:
  using Term = std::pair<std::size_t, double>;

  std::size_t add_variable(double cost, double lower = 0.0, double upper = kInfinity);
  void add_row(std::vector<Term> terms, Sense sense, double rhs);

  std::size_t variable_count() const { return cost_.size(); }
  std::size_t row_count() const { return rows_.size(); }

  double cost(std::size_t j) const { return cost_[j]; }
  double lower(std::size_t j) const { return lower_[j]; }
  double upper(std::size_t j) const { return upper_[j]; }

  struct Row {
    std::vector<Term> terms;
    Sense sense;
    double rhs;
  };
  const std::vector<Row>& rows() const { return rows_; }

  /// Objective value of an arbitrary point (no feasibility check).
  double evaluate(const std::vector<double>& x) const;

  /// Largest constraint or bound violation at x; zero means feasible.
  double max_violation(const std::vector<double>& x) const;

 private:
  std::vector<double> cost_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<Row> rows_;
};

struct Solution {
  std::vector<double> x;
  double objective = 0.0;
  std::size_t pivots = 0;
};

/// Exact dense two-phase simplex (Bland's rule, so it cannot cycle).
/// Throws InfeasibleLP or UnboundedLP.
Solution solve(const LinearProgram& program);

}  // namespace energytwin::lp
