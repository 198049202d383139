#pragma once

#include <vector>

#include <Eigen/Dense>

namespace omwu::lp {

enum class Status { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

const char* to_string(Status s);

/// maximize c^T x  subject to  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0.
/// Either constraint block may have zero rows.
struct Problem {
  Eigen::MatrixXd A_ub;
  Eigen::VectorXd b_ub;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::VectorXd c;
};

struct Options {
  double pivot_tolerance = 1e-10;
  double cost_tolerance = 1e-11;
  int max_iterations = 100000;
  /// Consecutive degenerate pivots before switching to Bland's rule.
  int degenerate_switch = 50;
};

struct Solution {
  Status status = Status::kIterationLimit;
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
  /// Final basis in standard-form column ids (structural first, then one
  /// slack/surplus per inequality row).
  std::vector<Eigen::Index> basis;
};

/// Two-phase primal simplex on a dense tableau. Dantzig pricing, falling
/// back to Bland's rule on degenerate stalls. The returned basic solution is
/// recomputed from the original data by an LU solve on the final basis.
Solution maximize(const Problem& problem, const Options& options = {});

}  // namespace omwu::lp
