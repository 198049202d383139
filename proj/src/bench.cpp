#include "omwu/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "omwu/dynamics.hpp"
#include "omwu/oracle.hpp"
#include "omwu/random.hpp"

namespace omwu {

MatrixGame gen_random_game(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
  if (n < 1 || m < 1) {
    throw std::invalid_argument(fmt::format("gen_random_game: bad shape {}x{}", n, m));
  }
  const SplitMix64 rng(seed);
  Eigen::MatrixXd A(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      A(i, j) = rng.uniform(static_cast<std::uint64_t>(i * m + j), -1.0, 1.0);
    }
  }
  return MatrixGame(std::move(A));
}

namespace {

void validate_common(const SweepConfig& c) {
  if (!(c.eta > 0.0 && c.eta < 1.0)) {
    throw std::invalid_argument(fmt::format("eta must lie in (0, 1), got {}", c.eta));
  }
  if (c.trials_per_point < 1) {
    throw std::invalid_argument(fmt::format("trials must be >= 1, got {}", c.trials_per_point));
  }
  if (c.max_iters < 1) {
    throw std::invalid_argument(fmt::format("max_iters must be >= 1, got {}", c.max_iters));
  }
}

MatrixGame make_game(const SweepConfig& c, Eigen::Index n, std::uint64_t seed) {
  return c.game_factory ? c.game_factory(n, seed) : gen_random_game(n, n, seed);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Runs jobs [0, count) on a bounded pool. The first exception is rethrown.
template <typename Job>
void run_pool(std::size_t count, unsigned threads, Job&& job) {
  if (count == 0) return;
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        job(k);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

SweepRow skipped_row(double point, int trial, std::uint64_t seed) {
  SweepRow row;
  row.point = point;
  row.trial = trial;
  row.seed = seed;
  row.final_l1_error = std::numeric_limits<double>::quiet_NaN();
  row.skipped = true;
  return row;
}

double l1_to(const Equilibrium& eq, const Trajectory& traj) {
  return (traj.x_cur() - eq.x_star.values()).lpNorm<1>() +
         (traj.y_cur() - eq.y_star.values()).lpNorm<1>();
}

}  // namespace

void SweepConfig::validate_dimension() const {
  validate_common(*this);
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k] < 1) throw std::invalid_argument(fmt::format("size {} is not positive", sizes[k]));
    if (k > 0 && sizes[k] <= sizes[k - 1]) {
      throw std::invalid_argument("sizes must be strictly increasing");
    }
  }
  if (!(target_error > 0.0)) {
    throw std::invalid_argument(fmt::format("target error must be positive, got {}", target_error));
  }
}

void SweepConfig::validate_error() const {
  validate_common(*this);
  if (n_fixed < 1) throw std::invalid_argument(fmt::format("n must be >= 1, got {}", n_fixed));
  for (std::size_t k = 0; k < errors.size(); ++k) {
    if (!(errors[k] > 0.0) || !std::isfinite(errors[k])) {
      throw std::invalid_argument(fmt::format("error threshold {} is not positive", errors[k]));
    }
    if (k > 0 && errors[k] >= errors[k - 1]) {
      throw std::invalid_argument(
          errors[k] == errors[k - 1] ? fmt::format("duplicate error threshold {}", errors[k])
                                     : std::string("errors must be strictly decreasing"));
    }
  }
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t point_index, int trial) {
  return derive_seed(seed, point_index, static_cast<std::uint64_t>(trial));
}

SweepResult sweep_dimension(const SweepConfig& config) {
  config.validate_dimension();
  const std::size_t trials = static_cast<std::size_t>(config.trials_per_point);
  const std::size_t jobs = config.sizes.size() * trials;
  SweepResult result;
  result.rows.resize(jobs);

  run_pool(jobs, config.threads, [&](std::size_t k) {
    const std::size_t p = k / trials;
    const int trial = static_cast<int>(k % trials);
    const Eigen::Index n = config.sizes[p];
    const std::uint64_t seed = trial_seed(config.seed, p, trial);
    const auto start = std::chrono::steady_clock::now();

    const MatrixGame game = make_game(config, n, seed);
    const Equilibrium eq = solve_lp(game);
    if (!eq.unique) {
      result.rows[k] = skipped_row(static_cast<double>(n), trial, seed);
      return;
    }
    RunConfig rc;
    rc.eta = config.eta;
    rc.max_iters = config.max_iters;
    rc.target_l1_error = config.target_error;
    const RunOutput out = run(game, eq, rc);

    SweepRow row;
    row.point = static_cast<double>(n);
    row.trial = trial;
    row.seed = seed;
    row.iterations = out.result.iterations;
    row.converged = out.result.converged;
    row.final_l1_error = out.result.final_record.l1_error;
    row.wall_time_seconds = config.record_wall_time ? seconds_since(start) : 0.0;
    result.rows[k] = row;
  });
  return result;
}

SweepResult sweep_error(const SweepConfig& config) {
  config.validate_error();
  const std::size_t trials = static_cast<std::size_t>(config.trials_per_point);
  const std::size_t points = config.errors.size();
  // rows_by_trial[t][p]
  std::vector<std::vector<SweepRow>> rows_by_trial(trials);

  run_pool(points == 0 ? 0 : trials, config.threads, [&](std::size_t t) {
    const int trial = static_cast<int>(t);
    const std::uint64_t seed = trial_seed(config.seed, 0, trial);
    const auto start = std::chrono::steady_clock::now();
    auto& rows = rows_by_trial[t];

    const MatrixGame game = make_game(config, config.n_fixed, seed);
    const Equilibrium eq = solve_lp(game);
    if (!eq.unique) {
      for (double e : config.errors) rows.push_back(skipped_row(e, trial, seed));
      return;
    }
    Trajectory traj(game, eq, Method::kOmwu, config.eta, DynamicsState::uniform(game));
    std::size_t next = 0;
    double l1 = l1_to(eq, traj);
    auto record_crossings = [&] {
      while (next < points && l1 <= config.errors[next]) {
        SweepRow row;
        row.point = config.errors[next];
        row.trial = trial;
        row.seed = seed;
        row.iterations = traj.iter();
        row.converged = true;
        row.final_l1_error = l1;
        row.wall_time_seconds = config.record_wall_time ? seconds_since(start) : 0.0;
        rows.push_back(row);
        ++next;
      }
    };
    record_crossings();
    while (next < points && traj.iter() < config.max_iters) {
      traj.step();
      l1 = l1_to(eq, traj);
      record_crossings();
    }
    for (; next < points; ++next) {
      SweepRow row;
      row.point = config.errors[next];
      row.trial = trial;
      row.seed = seed;
      row.iterations = traj.iter();
      row.converged = false;
      row.final_l1_error = l1;
      row.wall_time_seconds = config.record_wall_time ? seconds_since(start) : 0.0;
      rows.push_back(row);
    }
  });

  SweepResult result;
  result.rows.reserve(points * trials);
  for (std::size_t p = 0; p < points; ++p) {
    for (std::size_t t = 0; t < trials; ++t) result.rows.push_back(rows_by_trial[t][p]);
  }
  return result;
}

std::string_view sweep_csv_header() {
  return "point,trial,seed,iterations,converged,final_l1_error,wall_time_seconds";
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << sweep_csv_header() << '\n';
  for (const auto& r : result.rows) {
    out << fmt::format("{},{},{},{},{},{:.17g},{:.6f}\n", r.point, r.trial, r.seed,
                       r.iterations, r.converged ? 1 : 0, r.final_l1_error,
                       r.wall_time_seconds);
  }
}

std::vector<PointSummary> summarize(const SweepResult& result) {
  std::vector<PointSummary> out;
  std::vector<std::vector<double>> iters;
  for (const auto& r : result.rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& s) { return s.point == r.point; });
    std::size_t idx = static_cast<std::size_t>(it - out.begin());
    if (it == out.end()) {
      out.push_back(PointSummary{r.point, 0.0, 0, 0});
      iters.emplace_back();
    }
    if (r.skipped) continue;
    iters[idx].push_back(static_cast<double>(r.iterations));
    out[idx].total += 1;
    out[idx].converged += r.converged ? 1 : 0;
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    auto& v = iters[k];
    if (v.empty()) {
      out[k].median_iterations = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    out[k].median_iterations = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
  }
  return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("loglog_slope needs two or more paired points");
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) {
      throw std::invalid_argument("loglog_slope needs positive data");
    }
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = std::log(x[k]) - mx;
    sxy += dx * (std::log(y[k]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw std::invalid_argument("loglog_slope: x values are all equal");
  return sxy / sxx;
}

}  // namespace omwu
