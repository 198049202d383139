#include "omwu/dynamics.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "omwu/random.hpp"

namespace omwu {

const char* to_string(Method m) {
  switch (m) {
    case Method::kOmwu: return "omwu";
    case Method::kOmwuLinear: return "omwu-linear";
    case Method::kMwu: return "mwu";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "omwu") return Method::kOmwu;
  if (name == "omwu-linear" || name == "omwu_linear") return Method::kOmwuLinear;
  if (name == "mwu") return Method::kMwu;
  throw std::invalid_argument(fmt::format("unknown method '{}'", name));
}

DynamicsState DynamicsState::repeated(const SimplexPoint& x, const SimplexPoint& y) {
  return DynamicsState{x, y, x, y};
}

DynamicsState DynamicsState::uniform(const MatrixGame& game) {
  return repeated(SimplexPoint::uniform(game.rows()), SimplexPoint::uniform(game.cols()));
}

namespace detail {

// Off-support mass decays geometrically and eventually goes subnormal, where
// every multiply runs an order of magnitude slower. Such entries carry no
// usable information, so drop them to zero.
void flush_subnormals(Eigen::VectorXd& v) {
  for (double& c : v) {
    if (c < std::numeric_limits<double>::min()) c = 0.0;
  }
}

double exp_reweight(const Eigen::VectorXd& p, const Eigen::VectorXd& e, Eigen::VectorXd& out) {
  double shift = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0 && e[i] > shift) shift = e[i];
  }
  out.resize(p.size());
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    out[i] = p[i] > 0.0 ? p[i] * std::exp(e[i] - shift) : 0.0;
    s += out[i];
  }
  out /= s;
  flush_subnormals(out);
  return s * std::exp(shift);
}

double linear_reweight(const Eigen::VectorXd& p, const Eigen::VectorXd& w, Eigen::VectorXd& out) {
  const Eigen::Index bad = [&] {
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      if (!(w[i] > 0.0)) return i;
    }
    return Eigen::Index{-1};
  }();
  if (bad >= 0) {
    throw StepSizeError(fmt::format(
        "linear update weight {} is {:.6g} <= 0; reduce the stepsize", bad, w[bad]));
  }
  out = p.cwiseProduct(w);
  const double s = out.sum();
  out /= s;
  flush_subnormals(out);
  return s;
}

}  // namespace detail

namespace {

void require_state_dims(const DynamicsState& s, const MatrixGame& game) {
  if (s.x_cur.size() != game.rows() || s.x_prev.size() != game.rows() ||
      s.y_cur.size() != game.cols() || s.y_prev.size() != game.cols()) {
    throw std::invalid_argument(fmt::format("dimension mismatch: state does not fit a {}x{} game",
                                            game.rows(), game.cols()));
  }
}

// Exponents (or weights minus one) of both players for the given method.
void update_signals(Method method, const DynamicsState& s, const MatrixGame& game, double eta,
                    Eigen::VectorXd& ex, Eigen::VectorXd& ey) {
  const Eigen::MatrixXd& A = game.payoffs();
  if (method == Method::kMwu) {
    ex = eta * (A * s.y_cur.values());
    ey = -eta * (A.transpose() * s.x_cur.values());
    return;
  }
  ex = eta * (A * (2.0 * s.y_cur.values() - s.y_prev.values()));
  ey = -eta * (A.transpose() * (2.0 * s.x_cur.values() - s.x_prev.values()));
}

}  // namespace

StepOutput advance(Method method, const DynamicsState& state, const MatrixGame& game, double eta) {
  require_state_dims(state, game);
  // All weights are 1; skip the renormalization so the iterate is kept bit for bit.
  if (eta == 0.0) return StepOutput{DynamicsState{state.x_cur, state.y_cur, state.x_cur, state.y_cur}};
  Eigen::VectorXd ex;
  Eigen::VectorXd ey;
  update_signals(method, state, game, eta, ex, ey);
  Eigen::VectorXd xn;
  Eigen::VectorXd yn;
  double sx = 1.0;
  double sy = 1.0;
  if (method == Method::kOmwuLinear) {
    sx = detail::linear_reweight(state.x_cur.values(), ex.array() + 1.0, xn);
    sy = detail::linear_reweight(state.y_cur.values(), ey.array() + 1.0, yn);
  } else {
    sx = detail::exp_reweight(state.x_cur.values(), ex, xn);
    sy = detail::exp_reweight(state.y_cur.values(), ey, yn);
  }
  return StepOutput{
      DynamicsState{SimplexPoint(std::move(xn)), SimplexPoint(std::move(yn)), state.x_cur,
                    state.y_cur},
      sx, sy};
}

DynamicsState omwu_step(const DynamicsState& state, const MatrixGame& game, double eta) {
  return advance(Method::kOmwu, state, game, eta).state;
}

DynamicsState linear_omwu_step(const DynamicsState& state, const MatrixGame& game, double eta) {
  return advance(Method::kOmwuLinear, state, game, eta).state;
}

DynamicsState mwu_step(const DynamicsState& state, const MatrixGame& game, double eta) {
  return advance(Method::kMwu, state, game, eta).state;
}

double kl_divergence(const Equilibrium& eq, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != eq.x_star.size() || y.size() != eq.y_star.size()) {
    throw std::invalid_argument("dimension mismatch between iterate and equilibrium");
  }
  double kl = 0.0;
  for (Eigen::Index i : eq.support_x) {
    if (!(x[i] > 0.0)) return std::numeric_limits<double>::infinity();
    kl += eq.x_star[i] * std::log(eq.x_star[i] / x[i]);
  }
  for (Eigen::Index j : eq.support_y) {
    if (!(y[j] > 0.0)) return std::numeric_limits<double>::infinity();
    kl += eq.y_star[j] * std::log(eq.y_star[j] / y[j]);
  }
  return kl;
}

double kl_divergence(const Equilibrium& eq, const SimplexPoint& x, const SimplexPoint& y) {
  return kl_divergence(eq, x.values(), y.values());
}

double kl_decrement_bound(const DynamicsState& state, const MatrixGame& game, double eta) {
  require_state_dims(state, game);
  const Eigen::MatrixXd& A = game.payoffs();
  const Eigen::VectorXd& x = state.x_cur.values();
  const Eigen::VectorXd& y = state.y_cur.values();
  const Eigen::VectorXd& xp = state.x_prev.values();
  const Eigen::VectorXd& yp = state.y_prev.values();

  const Eigen::VectorXd Ay = A * y;
  const Eigen::VectorXd Ayp = A * yp;
  const Eigen::VectorXd Atx = A.transpose() * x;
  const Eigen::VectorXd Atxp = A.transpose() * xp;
  const double v = x.dot(Ay);
  const double x_yp = x.dot(Ayp);
  const double xp_y = xp.dot(Ay);

  const Eigen::ArrayXd dx = 2.0 * Ay.array() - 2.0 * v - Ayp.array() + x_yp;
  const Eigen::ArrayXd dy = 2.0 * Atx.array() - 2.0 * v - Atxp.array() + xp_y;
  const double spread = (x.array() * dx.square()).sum() + (y.array() * dy.square()).sum();
  return -0.5 * eta * eta * spread;
}

std::vector<StepDistances> step_distance_profile(const MatrixGame& game,
                                                 const DynamicsState& state,
                                                 std::span<const double> etas) {
  std::vector<StepDistances> rows;
  rows.reserve(etas.size());
  const Eigen::VectorXd& x = state.x_cur.values();
  const Eigen::VectorXd& y = state.y_cur.values();
  for (double eta : etas) {
    const DynamicsState e = omwu_step(state, game, eta);
    const DynamicsState l = linear_omwu_step(state, game, eta);
    StepDistances r;
    r.eta = eta;
    r.exp_step = (e.x_cur.values() - x).lpNorm<1>() + (e.y_cur.values() - y).lpNorm<1>();
    r.linear_step = (l.x_cur.values() - x).lpNorm<1>() + (l.y_cur.values() - y).lpNorm<1>();
    r.exp_vs_linear = (e.x_cur.values() - l.x_cur.values()).lpNorm<1>() +
                      (e.y_cur.values() - l.y_cur.values()).lpNorm<1>();
    rows.push_back(r);
  }
  return rows;
}

AnchorValues anchor_values(const MatrixGame& game, const Equilibrium& eq,
                           const Eigen::VectorXd& x_cur, const Eigen::VectorXd& y_cur,
                           const Eigen::VectorXd& x_prev, const Eigen::VectorXd& y_prev) {
  const Eigen::VectorXd xe = 2.0 * x_cur - x_prev;
  const Eigen::VectorXd ye = 2.0 * y_cur - y_prev;
  const Eigen::MatrixXd& A = game.payoffs();
  AnchorValues a;
  a.row_anchor = eq.x_star.values().dot(A * ye);
  a.col_anchor = xe.dot(A * eq.y_star.values());
  a.min_x_extrapolation = xe.minCoeff();
  a.min_y_extrapolation = ye.minCoeff();
  return a;
}

void RunConfig::validate(const MatrixGame& game) const {
  if (!(eta > 0.0 && eta < 1.0)) {
    throw std::invalid_argument(fmt::format("stepsize must lie in (0, 1), got {}", eta));
  }
  if (method == Method::kOmwuLinear && !(eta * 3.0 * game.max_abs_payoff() < 1.0)) {
    throw std::invalid_argument(fmt::format(
        "linear OMWU needs eta < 1/(3 max|A|) = {:.6g}, got {}",
        1.0 / (3.0 * game.max_abs_payoff()), eta));
  }
  if (max_iters < 0) throw std::invalid_argument("max_iters must be nonnegative");
  if (!(target_l1_error >= 0.0)) throw std::invalid_argument("target error must be >= 0");
  if (log_every < 0) throw std::invalid_argument("log_every must be nonnegative");
  if (!(stall_constant > 0.0)) throw std::invalid_argument("stall constant must be positive");
  if (start) require_state_dims(*start, game);
}

Trajectory::Trajectory(const MatrixGame& game, const Equilibrium& eq, Method method, double eta,
                       const DynamicsState& start)
    : game_(&game),
      eq_(&eq),
      method_(method),
      eta_(eta),
      x_(start.x_cur.values()),
      y_(start.y_cur.values()),
      x_prev_(start.x_prev.values()),
      y_prev_(start.y_prev.values()) {
  require_state_dims(start, game);
  const Eigen::MatrixXd& A = game.payoffs();
  Ay_ = A * y_;
  Ay_prev_ = A * y_prev_;
  Atx_ = A.transpose() * x_;
  Atx_prev_ = A.transpose() * x_prev_;
  record_.iter = 0;
  refresh_record(1.0, 1.0);
  record_.kl_decrement = 0.0;
}

void Trajectory::step() {
  Eigen::VectorXd ex;
  Eigen::VectorXd ey;
  if (method_ == Method::kMwu) {
    ex = eta_ * Ay_;
    ey = -eta_ * Atx_;
  } else {
    ex = eta_ * (2.0 * Ay_ - Ay_prev_);
    ey = -eta_ * (2.0 * Atx_ - Atx_prev_);
  }
  double sx = 1.0;
  double sy = 1.0;
  if (method_ == Method::kOmwuLinear) {
    sx = detail::linear_reweight(x_, ex.array() + 1.0, scratch_x_);
    sy = detail::linear_reweight(y_, ey.array() + 1.0, scratch_y_);
  } else {
    sx = detail::exp_reweight(x_, ex, scratch_x_);
    sy = detail::exp_reweight(y_, ey, scratch_y_);
  }
  x_prev_.swap(x_);
  y_prev_.swap(y_);
  x_.swap(scratch_x_);
  y_.swap(scratch_y_);
  Ay_prev_.swap(Ay_);
  Atx_prev_.swap(Atx_);
  Ay_.noalias() = game_->payoffs() * y_;
  Atx_.noalias() = game_->payoffs().transpose() * x_;

  const double kl_before = record_.kl;
  ++record_.iter;
  refresh_record(sx, sy);
  record_.kl_decrement = record_.kl - kl_before;
}

void Trajectory::refresh_record(double normalizer_x, double normalizer_y) {
  record_.kl = kl_divergence(*eq_, x_, y_);
  record_.l1_error = (x_ - eq_->x_star.values()).lpNorm<1>() +
                     (y_ - eq_->y_star.values()).lpNorm<1>();
  record_.value = x_.dot(Ay_);
  record_.epsilon = epsilon_gap(Ay_, Atx_, record_.value);
  record_.alpha = alpha_closeness(x_, y_, Ay_, Atx_, record_.value);
  record_.normalizer_x = normalizer_x;
  record_.normalizer_y = normalizer_y;
}

DynamicsState Trajectory::state() const {
  return DynamicsState{SimplexPoint(x_), SimplexPoint(y_), SimplexPoint(x_prev_),
                       SimplexPoint(y_prev_)};
}

SimplexPoint random_interior_point(Eigen::Index n, std::uint64_t seed) {
  const SplitMix64 rng(seed);
  Eigen::VectorXd p(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    // 1 - u lies in (0, 1], so the log is finite.
    p[i] = -std::log(1.0 - rng.uniform01(static_cast<std::uint64_t>(i)));
  }
  return SimplexPoint::normalized(std::move(p));
}

RunOutput run(const MatrixGame& game, const Equilibrium& eq, const RunConfig& config,
              const Observer& observer) {
  config.validate(game);
  DynamicsState start = [&] {
    if (config.start) return *config.start;
    if (config.random_start) {
      return DynamicsState::repeated(random_interior_point(game.rows(), derive_seed(config.seed, 0)),
                                     random_interior_point(game.cols(), derive_seed(config.seed, 1)));
    }
    return DynamicsState::uniform(game);
  }();

  Trajectory traj(game, eq, config.method, config.eta, start);
  RunResult result;
  std::vector<TrajectoryRecord> records;
  const double stall_threshold = -config.stall_constant * std::pow(config.eta, 3);

  records.push_back(traj.record());
  if (observer) observer(traj);
  while (traj.iter() < config.max_iters && traj.record().l1_error > config.target_l1_error) {
    traj.step();
    const TrajectoryRecord& rec = traj.record();
    if (!result.stall_iter && rec.kl_decrement > stall_threshold) result.stall_iter = rec.iter;
    if (config.log_every > 0 && rec.iter % config.log_every == 0) records.push_back(rec);
    if (observer) observer(traj);
  }
  if (records.back().iter != traj.iter()) records.push_back(traj.record());

  result.iterations = traj.iter();
  result.final_record = traj.record();
  result.converged = traj.record().l1_error <= config.target_l1_error;
  return RunOutput{std::move(result), std::move(records), traj.state()};
}

std::string_view trajectory_csv_header() {
  return "iter,kl,l1_error,alpha,epsilon,value,kl_decrement,normalizer_x,normalizer_y";
}

void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryRecord> records) {
  out << trajectory_csv_header() << '\n';
  for (const auto& r : records) {
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n",
                       r.iter, r.kl, r.l1_error, r.alpha, r.epsilon, r.value, r.kl_decrement,
                       r.normalizer_x, r.normalizer_y);
  }
}

}  // namespace omwu
