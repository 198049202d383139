#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace omwu {

/// Coordinates with mass at or below this are treated as outside the support.
inline constexpr double kSupportTolerance = 1e-12;

/// Maximum allowed |sum - 1| for a probability vector.
inline constexpr double kSimplexTolerance = 1e-12;

/// Two-player zero-sum game in normal form.
///
/// Rows belong to the maximizing player (x), columns to the minimizing
/// player (y). The payoff of a mixed profile is x^T A y, paid by the column
/// player to the row player.
class MatrixGame {
 public:
  /// Throws std::invalid_argument on an empty or non-finite matrix.
  explicit MatrixGame(Eigen::MatrixXd payoffs);

  /// Row-major nested vectors; rows must be rectangular.
  static MatrixGame from_rows(const std::vector<std::vector<double>>& rows);

  const Eigen::MatrixXd& payoffs() const { return A_; }
  Eigen::Index rows() const { return A_.rows(); }
  Eigen::Index cols() const { return A_.cols(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return A_(i, j); }

  /// max_{ij} |A_ij|
  double max_abs_payoff() const { return max_abs_; }

 private:
  Eigen::MatrixXd A_;
  double max_abs_ = 0.0;
};

/// A probability vector. Construction validates nonnegativity and unit sum.
class SimplexPoint {
 public:
  explicit SimplexPoint(Eigen::VectorXd p);

  static SimplexPoint uniform(Eigen::Index n);
  static SimplexPoint vertex(Eigen::Index n, Eigen::Index i);

  /// Clamps tiny negatives produced by linear solves and rescales to unit
  /// sum. Throws when an entry is more negative than `neg_tol`.
  static SimplexPoint normalized(Eigen::VectorXd p, double neg_tol = 1e-9);

  const Eigen::VectorXd& values() const { return p_; }
  Eigen::Index size() const { return p_.size(); }
  double operator[](Eigen::Index i) const { return p_[i]; }

  /// Indices with mass strictly above kSupportTolerance, ascending.
  std::vector<Eigen::Index> support() const;

 private:
  Eigen::VectorXd p_;
};

struct QualityReport {
  double alpha = 0.0;
  double epsilon = 0.0;
  double value = 0.0;
};

double payoff(const MatrixGame& game, const SimplexPoint& x, const SimplexPoint& y);

/// Smallest eps for which (x, y) is an eps-approximate equilibrium.
double epsilon_gap(const MatrixGame& game, const SimplexPoint& x, const SimplexPoint& y);

/// Smallest alpha for which (x, y) is alpha-close: every coordinate either
/// carries mass <= alpha or earns a payoff within alpha of x^T A y.
double alpha_closeness(const MatrixGame& game, const SimplexPoint& x, const SimplexPoint& y);

QualityReport quality(const MatrixGame& game, const SimplexPoint& x, const SimplexPoint& y);

// Variants that reuse precomputed payoff vectors Ay and A^T x.
double epsilon_gap(const Eigen::VectorXd& Ay, const Eigen::VectorXd& Atx, double value);
double alpha_closeness(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& Ay, const Eigen::VectorXd& Atx,
                       double value);

// Game files: {"A": [[a00, a01, ...], [a10, ...], ...]}
MatrixGame parse_game_json(std::string_view text);
MatrixGame load_game(const std::filesystem::path& path);
std::string game_to_json(const MatrixGame& game);

}  // namespace omwu
