#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "omwu/game.hpp"

namespace omwu {

/// A min-max solution (x*, y*) with value v = x*^T A y*.
struct Equilibrium {
  SimplexPoint x_star;
  SimplexPoint y_star;
  double value = 0.0;
  std::vector<Eigen::Index> support_x;
  std::vector<Eigen::Index> support_y;
  bool unique = false;
};

enum class Uniqueness { kUnique, kNotUnique, kIndeterminate };

const char* to_string(Uniqueness u);

/// Raised when an exact solve loses accuracy (e.g. the primal and dual game
/// values disagree). The message carries the diagnostics.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Builds an Equilibrium record from a strategy pair; `unique` is left false.
Equilibrium make_equilibrium(const MatrixGame& game, SimplexPoint x, SimplexPoint y);

/// Solves the two game LPs (one per player) with the dense simplex solver.
/// Sets `unique` from check_uniqueness_lp.
Equilibrium solve_lp(const MatrixGame& game);

/// All extreme equilibria, found by enumerating pairs of equal-size row and
/// column supports and solving their indifference systems. Results are
/// deduplicated at l-infinity distance 1e-8; every record's `unique` flag is
/// true iff exactly one equilibrium was found.
std::vector<Equilibrium> solve_support_enum(const MatrixGame& game, int max_dim = 12);

/// min over off-support strategies of the payoff gap to v: v - (Ay*)_i for
/// rows, (A^T x*)_j - v for columns. +infinity when both supports are full.
double complementarity_margin(const MatrixGame& game, const Equilibrium& eq);

/// Uniqueness from strict complementarity plus, for every coordinate, the
/// range of that coordinate over the optimal face (two LPs per coordinate).
Uniqueness check_uniqueness_lp(const MatrixGame& game, const Equilibrium& eq);

/// Exhaustive enumeration when both dimensions are <= enum_max_dim, otherwise
/// the LP path on the solve_lp solution.
Uniqueness check_uniqueness(const MatrixGame& game, int enum_max_dim = 12);

}  // namespace omwu
