#include "omwu/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

#include <fmt/format.h>

#include "omwu/lp.hpp"

namespace omwu {

const char* to_string(Uniqueness u) {
  switch (u) {
    case Uniqueness::kUnique: return "unique";
    case Uniqueness::kNotUnique: return "not unique";
    case Uniqueness::kIndeterminate: return "indeterminate";
  }
  return "unknown";
}

namespace {

constexpr double kDualityTolerance = 1e-9;
constexpr double kDedupTolerance = 1e-8;
constexpr double kFeasibilityTolerance = 1e-9;
constexpr double kUniqueWidth = 1e-9;
constexpr double kNotUniqueWidth = 1e-6;

struct PlayerSolve {
  Eigen::VectorXd strategy;
  lp::Solution lp;
};

// Column player's optimal strategy for payoff matrix M (rows maximize):
// maximize 1^T w  s.t. (M + s) w <= 1, w >= 0, then y = w / 1^T w.
PlayerSolve solve_min_player(const Eigen::MatrixXd& M) {
  const double shift = 1.0 - M.minCoeff();
  lp::Problem p;
  p.A_ub = M.array() + shift;
  p.b_ub = Eigen::VectorXd::Ones(M.rows());
  p.A_eq.resize(0, M.cols());
  p.b_eq.resize(0);
  p.c = Eigen::VectorXd::Ones(M.cols());
  PlayerSolve out;
  out.lp = lp::maximize(p);
  if (out.lp.status != lp::Status::kOptimal || !(out.lp.objective > 0.0)) {
    throw NumericalError(fmt::format(
        "game LP ended with status '{}' after {} pivots (objective {:.6g}, shift {:.6g})",
        lp::to_string(out.lp.status), out.lp.iterations, out.lp.objective, shift));
  }
  out.strategy = out.lp.x / out.lp.x.sum();
  return out;
}

double linf_distance(const Equilibrium& a, const Equilibrium& b) {
  return std::max((a.x_star.values() - b.x_star.values()).cwiseAbs().maxCoeff(),
                  (a.y_star.values() - b.y_star.values()).cwiseAbs().maxCoeff());
}

std::vector<Eigen::Index> bits_to_indices(std::uint32_t mask) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; mask != 0; ++i, mask >>= 1U) {
    if (mask & 1U) idx.push_back(i);
  }
  return idx;
}

// Solves  sum_{c in cols} M(r, c) p_c = v  for r in rows,  sum p = 1.
// Returns false when the bordered system is singular.
bool solve_indifference(const Eigen::MatrixXd& M, const std::vector<Eigen::Index>& rows,
                        const std::vector<Eigen::Index>& cols, Eigen::VectorXd& p, double& v) {
  const auto k = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(k + 1, k + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = 0; c < k; ++c) {
      K(r, c) = M(rows[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(c)]);
    }
    K(r, k) = -1.0;
  }
  K.row(k).head(k).setOnes();
  rhs[k] = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) return false;
  const Eigen::VectorXd sol = lu.solve(rhs);
  if (!sol.allFinite() || (K * sol - rhs).cwiseAbs().maxCoeff() > 1e-10) return false;
  p = sol.head(k);
  v = sol[k];
  return true;
}

}  // namespace

Equilibrium make_equilibrium(const MatrixGame& game, SimplexPoint x, SimplexPoint y) {
  const double v = payoff(game, x, y);
  auto sx = x.support();
  auto sy = y.support();
  return Equilibrium{std::move(x), std::move(y), v, std::move(sx), std::move(sy), false};
}

namespace {

Equilibrium solve_lp_unchecked(const MatrixGame& game) {
  const Eigen::MatrixXd& A = game.payoffs();
  const PlayerSolve col = solve_min_player(A);
  const PlayerSolve row = solve_min_player(-A.transpose());

  auto x = SimplexPoint::normalized(row.strategy);
  auto y = SimplexPoint::normalized(col.strategy);

  // Minimax duality: what x guarantees from below must meet what y concedes.
  const double lower = (A.transpose() * x.values()).minCoeff();
  const double upper = (A * y.values()).maxCoeff();
  if (std::abs(upper - lower) > kDualityTolerance) {
    throw NumericalError(fmt::format(
        "primal/dual game values disagree: {:.17g} vs {:.17g} (gap {:.3e}; "
        "pivots {} and {}; max |A| {:.6g})",
        lower, upper, upper - lower, row.lp.iterations, col.lp.iterations,
        game.max_abs_payoff()));
  }

  return make_equilibrium(game, std::move(x), std::move(y));
}

}  // namespace

Equilibrium solve_lp(const MatrixGame& game) {
  Equilibrium eq = solve_lp_unchecked(game);
  eq.unique = check_uniqueness_lp(game, eq) == Uniqueness::kUnique;
  return eq;
}

std::vector<Equilibrium> solve_support_enum(const MatrixGame& game, int max_dim) {
  const Eigen::Index n = game.rows();
  const Eigen::Index m = game.cols();
  if (max_dim > 30) max_dim = 30;
  if (n > max_dim || m > max_dim) {
    throw std::invalid_argument(fmt::format(
        "support enumeration limited to {} strategies per player, game is {}x{}", max_dim, n, m));
  }
  const Eigen::MatrixXd& A = game.payoffs();
  const Eigen::MatrixXd At = A.transpose();
  const double scale = std::max(1.0, game.max_abs_payoff());
  const double tol = kFeasibilityTolerance * scale;

  std::vector<Equilibrium> found;
  Eigen::VectorXd px;
  Eigen::VectorXd py;
  for (std::uint32_t rmask = 1; rmask < (1U << n); ++rmask) {
    const auto rows = bits_to_indices(rmask);
    for (std::uint32_t cmask = 1; cmask < (1U << m); ++cmask) {
      // Extreme equilibria sit on square kernels; unequal supports give
      // non-square indifference systems and are skipped.
      if (std::popcount(rmask) != std::popcount(cmask)) continue;
      const auto cols = bits_to_indices(cmask);

      double vy = 0.0;
      if (!solve_indifference(A, rows, cols, py, vy)) continue;
      if (py.minCoeff() < -tol) continue;
      Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
      for (std::size_t c = 0; c < cols.size(); ++c) y[cols[c]] = py[static_cast<Eigen::Index>(c)];
      if ((A * y).maxCoeff() > vy + tol) continue;

      double vx = 0.0;
      if (!solve_indifference(At, cols, rows, px, vx)) continue;
      if (px.minCoeff() < -tol) continue;
      Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
      for (std::size_t r = 0; r < rows.size(); ++r) x[rows[r]] = px[static_cast<Eigen::Index>(r)];
      if ((At * x).minCoeff() < vx - tol) continue;
      if (std::abs(vx - vy) > tol) continue;

      Equilibrium eq = make_equilibrium(game, SimplexPoint::normalized(std::move(x), tol),
                                        SimplexPoint::normalized(std::move(y), tol));
      if (epsilon_gap(game, eq.x_star, eq.y_star) > tol) continue;
      const bool duplicate = std::any_of(found.begin(), found.end(), [&](const Equilibrium& e) {
        return linf_distance(e, eq) <= kDedupTolerance;
      });
      if (!duplicate) found.push_back(std::move(eq));
    }
  }
  const bool unique = found.size() == 1;
  for (auto& e : found) e.unique = unique;
  return found;
}

double complementarity_margin(const MatrixGame& game, const Equilibrium& eq) {
  const Eigen::VectorXd Ay = game.payoffs() * eq.y_star.values();
  const Eigen::VectorXd Atx = game.payoffs().transpose() * eq.x_star.values();
  double margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < game.rows(); ++i) {
    if (eq.x_star[i] <= kSupportTolerance) margin = std::min(margin, eq.value - Ay[i]);
  }
  for (Eigen::Index j = 0; j < game.cols(); ++j) {
    if (eq.y_star[j] <= kSupportTolerance) margin = std::min(margin, Atx[j] - eq.value);
  }
  return margin;
}

namespace {

// Widest coordinate range over the two optimal faces, relaxed by `slack`.
// nullopt when some face LP fails.
std::optional<double> optimal_face_width(const MatrixGame& game, double value, double slack) {
  const Eigen::MatrixXd& A = game.payoffs();
  const Eigen::Index n = A.rows();
  const Eigen::Index m = A.cols();

  // Optimal face of the row player: x >= 0, 1^T x = 1, A^T x >= v.
  lp::Problem fx;
  fx.A_ub = -A.transpose();
  fx.b_ub = Eigen::VectorXd::Constant(m, -(value - slack));
  fx.A_eq = Eigen::MatrixXd::Ones(1, n);
  fx.b_eq = Eigen::VectorXd::Ones(1);
  // Optimal face of the column player: y >= 0, 1^T y = 1, A y <= v.
  lp::Problem fy;
  fy.A_ub = A;
  fy.b_ub = Eigen::VectorXd::Constant(n, value + slack);
  fy.A_eq = Eigen::MatrixXd::Ones(1, m);
  fy.b_eq = Eigen::VectorXd::Ones(1);

  double widest = 0.0;
  auto coordinate_width = [&](lp::Problem& face, Eigen::Index dim, Eigen::Index i) -> bool {
    face.c = Eigen::VectorXd::Zero(dim);
    face.c[i] = 1.0;
    const lp::Solution hi = lp::maximize(face);
    face.c[i] = -1.0;
    const lp::Solution lo = lp::maximize(face);
    if (hi.status != lp::Status::kOptimal || lo.status != lp::Status::kOptimal) return false;
    widest = std::max(widest, hi.objective + lo.objective);
    return true;
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!coordinate_width(fx, n, i)) return std::nullopt;
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    if (!coordinate_width(fy, m, j)) return std::nullopt;
  }
  return widest;
}

}  // namespace

Uniqueness check_uniqueness_lp(const MatrixGame& game, const Equilibrium& eq) {
  const double slack = 1e-12 * std::max(1.0, game.max_abs_payoff());
  std::optional<double> widest = optimal_face_width(game, eq.value, slack);
  if (!widest) return Uniqueness::kIndeterminate;
  // The relaxation widens a single-point face by about slack / margin. A width
  // in the grey zone is re-measured with less slack; a real face keeps its size.
  if (*widest > kUniqueWidth && *widest <= kNotUniqueWidth) {
    const std::optional<double> tight = optimal_face_width(game, eq.value, slack / 100.0);
    if (tight) widest = tight;
  }

  if (*widest > kNotUniqueWidth) return Uniqueness::kNotUnique;
  if (*widest > kUniqueWidth) return Uniqueness::kIndeterminate;
  if (complementarity_margin(game, eq) <= kUniqueWidth) return Uniqueness::kIndeterminate;
  return Uniqueness::kUnique;
}

Uniqueness check_uniqueness(const MatrixGame& game, int enum_max_dim) {
  if (game.rows() <= enum_max_dim && game.cols() <= enum_max_dim) {
    return solve_support_enum(game, enum_max_dim).size() == 1 ? Uniqueness::kUnique
                                                               : Uniqueness::kNotUnique;
  }
  return check_uniqueness_lp(game, solve_lp_unchecked(game));
}

}  // namespace omwu
