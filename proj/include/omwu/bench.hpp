#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "omwu/game.hpp"

namespace omwu {

/// n x m game with entries i.i.d. Uniform[-1, 1): entry (i, j) is draw
/// i * m + j of the counter-based SplitMix64 stream for `seed`.
MatrixGame gen_random_game(Eigen::Index n, Eigen::Index m, std::uint64_t seed);

using GameFactory = std::function<MatrixGame(Eigen::Index n, std::uint64_t seed)>;

struct SweepConfig {
  std::vector<Eigen::Index> sizes;  // dimension sweep, strictly increasing
  std::vector<double> errors;       // error sweep, strictly decreasing
  double eta = 0.01;
  int trials_per_point = 5;
  std::uint64_t seed = 0;
  double target_error = 0.1;  // dimension sweep only
  Eigen::Index n_fixed = 50;  // error sweep only
  std::int64_t max_iters = 2'000'000;
  /// Worker threads; 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
  /// When false the wall_time_seconds column is written as 0 so that
  /// repeated runs produce identical bytes.
  bool record_wall_time = true;
  /// Square game of size n for a trial seed; defaults to gen_random_game.
  GameFactory game_factory;

  void validate_dimension() const;
  void validate_error() const;
};

struct SweepRow {
  double point = 0.0;  // n for the dimension sweep, epsilon for the error sweep
  int trial = 0;
  std::uint64_t seed = 0;
  std::int64_t iterations = 0;
  bool converged = false;
  double final_l1_error = 0.0;
  double wall_time_seconds = 0.0;
  /// Trial dropped because the equilibrium was not certified unique. Written
  /// as iterations 0, converged 0, final_l1_error nan.
  bool skipped = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by (point order in config, trial)
};

/// Per (n, trial): generate a game, solve it exactly, run OMWU from uniform
/// until the l1 error reaches target_error or max_iters.
SweepResult sweep_dimension(const SweepConfig& config);

/// Per trial: one OMWU trajectory on an n_fixed x n_fixed game; each error
/// threshold records the first iteration at which it was crossed.
SweepResult sweep_error(const SweepConfig& config);

/// Seed of the game used by trial `trial` at sweep point index `point_index`.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t point_index, int trial);

std::string_view sweep_csv_header();
void write_sweep_csv(std::ostream& out, const SweepResult& result);

struct PointSummary {
  double point = 0.0;
  double median_iterations = 0.0;
  int converged = 0;
  int total = 0;  // non-skipped trials
};

/// Median iterations per point over non-skipped trials, in row order.
std::vector<PointSummary> summarize(const SweepResult& result);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace omwu
