#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "omwu/game.hpp"
#include "omwu/oracle.hpp"

namespace omwu {

enum class Method { kOmwu, kOmwuLinear, kMwu };

const char* to_string(Method m);
/// Accepts "omwu", "omwu-linear" (or "omwu_linear") and "mwu".
Method parse_method(std::string_view name);

/// The quadruple (x^t, y^t, x^{t-1}, y^{t-1}) acted on by one update.
struct DynamicsState {
  SimplexPoint x_cur;
  SimplexPoint y_cur;
  SimplexPoint x_prev;
  SimplexPoint y_prev;

  /// (x, y, x, y): both time slots hold the same profile.
  static DynamicsState repeated(const SimplexPoint& x, const SimplexPoint& y);
  static DynamicsState uniform(const MatrixGame& game);
};

/// Raised by the linear update when a multiplicative weight is not positive.
class StepSizeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct StepOutput {
  DynamicsState state;
  /// Partition sums of the two player updates before normalization.
  double normalizer_x = 1.0;
  double normalizer_y = 1.0;
};

StepOutput advance(Method method, const DynamicsState& state, const MatrixGame& game,
                   double eta);

/// x'_i ~ x_i exp(2 eta (Ay^t)_i - eta (Ay^{t-1})_i), and symmetrically for y
/// with the sign flipped. Returns (x', y', x^t, y^t).
DynamicsState omwu_step(const DynamicsState& state, const MatrixGame& game, double eta);

/// First-order variant with weights 1 + 2 eta (Ay^t)_i - eta (Ay^{t-1})_i.
/// Throws StepSizeError when a weight is <= 0.
DynamicsState linear_omwu_step(const DynamicsState& state, const MatrixGame& game, double eta);

/// Plain multiplicative weights, x'_i ~ x_i exp(eta (Ay^t)_i). The previous
/// slots are shifted exactly as for OMWU.
DynamicsState mwu_step(const DynamicsState& state, const MatrixGame& game, double eta);

/// sum_i x*_i ln(x*_i / x_i) + sum_j y*_j ln(y*_j / y_j). Coordinates outside
/// the equilibrium support contribute nothing; zero mass on a support
/// coordinate gives +infinity.
double kl_divergence(const Equilibrium& eq, const SimplexPoint& x, const SimplexPoint& y);
double kl_divergence(const Equilibrium& eq, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Leading term of the per-step KL progress bound,
///   -1/2 eta^2 [ sum_i x_i (2(Ay)_i - 2 x^T A y - (Ay')_i + x^T A y')^2
///              + sum_j y_j (2(A^T x)_j - 2 x^T A y - (A^T x')_j + x'^T A y)^2 ]
/// with (x, y) current and (x', y') previous. The O(eta) and O(eta^3)
/// corrections are dropped; the value is a diagnostic, not a bound.
double kl_decrement_bound(const DynamicsState& state, const MatrixGame& game, double eta);

struct StepDistances {
  double eta = 0.0;
  double exp_step = 0.0;       // |(x', y') - (x, y)|_1 for OMWU
  double linear_step = 0.0;    // same for the linear variant
  double exp_vs_linear = 0.0;  // |OMWU step - linear step|_1
};

std::vector<StepDistances> step_distance_profile(const MatrixGame& game,
                                                 const DynamicsState& state,
                                                 std::span<const double> etas);

/// Values checked by the optimism anchor inequalities at one time step.
struct AnchorValues {
  double row_anchor = 0.0;  // x*^T A (2 y^t - y^{t-1}); should be >= v
  double col_anchor = 0.0;  // (2 x^t - x^{t-1})^T A y*; should be <= v
  double min_x_extrapolation = 0.0;  // min_i (2 x^t - x^{t-1})_i
  double min_y_extrapolation = 0.0;
};

AnchorValues anchor_values(const MatrixGame& game, const Equilibrium& eq,
                           const Eigen::VectorXd& x_cur, const Eigen::VectorXd& y_cur,
                           const Eigen::VectorXd& x_prev, const Eigen::VectorXd& y_prev);

struct RunConfig {
  double eta = 0.01;
  std::int64_t max_iters = 1'000'000;
  double target_l1_error = 0.1;
  Method method = Method::kOmwu;
  /// Keep every k-th record (0 keeps only the first and last).
  std::int64_t log_every = 0;
  /// Seeds the interior start when random_start is set.
  std::uint64_t seed = 0;
  bool random_start = false;
  /// Stall time T is the first step whose KL change exceeds -c eta^3.
  double stall_constant = 1.0;
  /// Explicit start; overrides uniform and random starts.
  std::optional<DynamicsState> start;

  /// Throws std::invalid_argument when the config is unusable for `game`.
  void validate(const MatrixGame& game) const;
};

struct TrajectoryRecord {
  std::int64_t iter = 0;
  double kl = 0.0;
  double l1_error = 0.0;
  double alpha = 0.0;
  double epsilon = 0.0;
  double value = 0.0;
  double kl_decrement = 0.0;
  double normalizer_x = 1.0;
  double normalizer_y = 1.0;
};

struct RunResult {
  std::int64_t iterations = 0;
  TrajectoryRecord final_record;
  bool converged = false;
  std::optional<std::int64_t> stall_iter;
};

/// Incremental driver. Caches Ay and A^T x for the current and previous
/// iterates so each step costs two matrix-vector products.
class Trajectory {
 public:
  Trajectory(const MatrixGame& game, const Equilibrium& eq, Method method, double eta,
             const DynamicsState& start);

  void step();

  std::int64_t iter() const { return record_.iter; }
  const TrajectoryRecord& record() const { return record_; }
  const Eigen::VectorXd& x_cur() const { return x_; }
  const Eigen::VectorXd& y_cur() const { return y_; }
  const Eigen::VectorXd& x_prev() const { return x_prev_; }
  const Eigen::VectorXd& y_prev() const { return y_prev_; }
  DynamicsState state() const;

 private:
  void refresh_record(double normalizer_x, double normalizer_y);

  const MatrixGame* game_;
  const Equilibrium* eq_;
  Method method_;
  double eta_;
  Eigen::VectorXd x_, y_, x_prev_, y_prev_;
  Eigen::VectorXd Ay_, Ay_prev_, Atx_, Atx_prev_;
  Eigen::VectorXd scratch_x_, scratch_y_;
  TrajectoryRecord record_;
};

using Observer = std::function<void(const Trajectory&)>;

struct RunOutput {
  RunResult result;
  std::vector<TrajectoryRecord> records;
  DynamicsState final_state;
};

/// Iterates from the configured start until the l1 error to `eq` reaches the
/// target or max_iters steps have run. The observer sees every iterate,
/// including the initial one.
RunOutput run(const MatrixGame& game, const Equilibrium& eq, const RunConfig& config,
              const Observer& observer = {});

/// Column header of the trajectory CSV log.
std::string_view trajectory_csv_header();
void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryRecord> records);

/// A random point in the interior of the simplex (Dirichlet(1) via the
/// counter-based generator), used for random starts.
SimplexPoint random_interior_point(Eigen::Index n, std::uint64_t seed);

namespace detail {

/// out_i = p_i exp(e_i) / S with S = sum_i p_i exp(e_i), evaluated after
/// subtracting max_i e_i over the support of p. Returns S.
double exp_reweight(const Eigen::VectorXd& p, const Eigen::VectorXd& e, Eigen::VectorXd& out);

/// out_i = p_i w_i / sum_j p_j w_j. Throws StepSizeError if some w_i <= 0.
double linear_reweight(const Eigen::VectorXd& p, const Eigen::VectorXd& w, Eigen::VectorXd& out);

}  // namespace detail

}  // namespace omwu
