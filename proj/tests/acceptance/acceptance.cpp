// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "omwu/bench.hpp"
#include "omwu/dynamics.hpp"
#include "omwu/eigensolver.hpp"
#include "omwu/game.hpp"
#include "omwu/oracle.hpp"
#include "omwu/random.hpp"
#include "omwu/spectral.hpp"

namespace {

using namespace omwu;
using cd = std::complex<double>;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Pick {
  MatrixGame game;
  Equilibrium eq;
};

// First `count` games with a unique equilibrium from the stream `seed`;
// sizes come from `shape(k)`.
std::vector<Pick> unique_games(int count, std::uint64_t seed,
                               const std::function<std::pair<Eigen::Index, Eigen::Index>(std::uint64_t)>& shape) {
  std::vector<Pick> out;
  for (std::uint64_t k = 0; static_cast<int>(out.size()) < count; ++k) {
    const auto [n, m] = shape(k);
    MatrixGame g = gen_random_game(n, m, derive_seed(seed, k));
    Equilibrium eq = solve_lp(g);
    if (eq.unique) out.push_back({std::move(g), std::move(eq)});
  }
  return out;
}

auto shape_upto(Eigen::Index hi, std::uint64_t seed) {
  return [hi, seed](std::uint64_t k) {
    const SplitMix64 r(seed);
    const auto span = static_cast<std::uint64_t>(hi - 1);
    return std::pair<Eigen::Index, Eigen::Index>(2 + static_cast<Eigen::Index>(r.bits(2 * k) % span),
                                                 2 + static_cast<Eigen::Index>(r.bits(2 * k + 1) % span));
  };
}

double simplex_violation(const Eigen::VectorXd& p) {
  return std::max(std::abs(p.sum() - 1.0), std::max(0.0, -p.minCoeff()));
}

double quad_l1(const DynamicsState& a, const DynamicsState& b) {
  return (pack(a) - pack(b)).lpNorm<1>();
}

SimplexPoint sp2(double a, double b) { return SimplexPoint(Eigen::Vector2d(a, b)); }

Outcome criterion1() {
  const auto games = unique_games(50, 101, shape_upto(10, 102));
  double fixed = 0.0;
  double simplex = 0.0;
  for (const auto& [g, eq] : games) {
    const DynamicsState e = DynamicsState::repeated(eq.x_star, eq.y_star);
    fixed = std::max(fixed, quad_l1(omwu_step(e, g, 0.01), e));
    DynamicsState s = DynamicsState::uniform(g);
    for (int t = 0; t < 500; ++t) {
      s = omwu_step(s, g, 0.1);
      simplex = std::max({simplex, simplex_violation(s.x_cur.values()), simplex_violation(s.y_cur.values())});
    }
  }
  return {fixed <= 1e-12 && simplex <= 1e-12,
          fmt::format("50 games, max fixed-point drift {:.2e}, max simplex violation {:.2e}", fixed, simplex)};
}

// Criterion-2 trajectories; criterion 9 checks the anchors along the same runs.
struct MonotoneStats {
  double worst_kl_increase = -1e300;  // over steps leaving iterate t >= 2 (start is t = 1)
  double worst_first_step = -1e300;   // the t = 1 -> 2 step, reported only
  double worst_row_anchor = 1e300;  // min over t of x*^T A (2y^t - y^{t-1}) - v
  double worst_col_anchor = 1e300;  // min over t of v - (2x^t - x^{t-1})^T A y*
  bool all_converged = true;
  std::int64_t max_iters = 0;
  int games = 0;
};

const MonotoneStats& monotone_runs() {
  static const MonotoneStats stats = [] {
    MonotoneStats st;
    std::vector<Pick> games;
    const MatrixGame fixture = MatrixGame::from_rows({{3, 1}, {0, 2}});
    games.push_back({fixture, solve_lp(fixture)});
    for (auto& p : unique_games(10, 202, [](std::uint64_t) { return std::pair<Eigen::Index, Eigen::Index>(5, 5); })) {
      games.push_back(std::move(p));
    }
    for (const auto& [g, eq] : games) {
      ++st.games;
      Trajectory traj(g, eq, Method::kOmwu, 0.01, DynamicsState::uniform(g));
      double kl = traj.record().kl;
      while (traj.record().l1_error >= 0.1 && traj.iter() < 2'000'000) {
        traj.step();
        // iter() counts steps, so iterate t (with x^1 = x^0) is iter() + 1.
        double& slot = traj.iter() == 1 ? st.worst_first_step : st.worst_kl_increase;
        slot = std::max(slot, traj.record().kl - kl);
        kl = traj.record().kl;
        if (traj.iter() >= 2) {
          const AnchorValues a = anchor_values(g, eq, traj.x_cur(), traj.y_cur(), traj.x_prev(), traj.y_prev());
          st.worst_row_anchor = std::min(st.worst_row_anchor, a.row_anchor - eq.value);
          st.worst_col_anchor = std::min(st.worst_col_anchor, eq.value - a.col_anchor);
        }
      }
      st.all_converged = st.all_converged && traj.record().l1_error < 0.1;
      st.max_iters = std::max(st.max_iters, traj.iter());
    }
    return st;
  }();
  return stats;
}

Outcome criterion2() {
  const MonotoneStats& st = monotone_runs();
  return {st.all_converged && st.worst_kl_increase <= 1e-12,
          fmt::format("{} games, largest KL step for t >= 2 {:.2e} (first step {:.2e}), longest run {} iterations{}",
                      st.games, st.worst_kl_increase, st.worst_first_step, st.max_iters,
                      st.all_converged ? "" : ", not all converged")};
}

Outcome criterion3() {
  const MatrixGame g = MatrixGame::from_rows({{1, -1}, {-1, 1}});
  const Equilibrium eq = solve_lp(g);
  const DynamicsState start = DynamicsState::repeated(sp2(0.9, 0.1), sp2(0.5, 0.5));

  RunConfig omwu;
  omwu.eta = 0.01;
  omwu.max_iters = 1'000'000;
  omwu.target_l1_error = 0.1;
  omwu.start = start;
  const RunResult r = run(g, eq, omwu).result;
  const bool omwu_ok = r.final_record.l1_error < 0.1;

  RunConfig mwu = omwu;
  mwu.method = Method::kMwu;
  mwu.max_iters = 100'000;
  mwu.target_l1_error = 0.0;
  const RunOutput m = run(g, eq, mwu);
  const double kl0 = m.records.front().kl;
  const double kl1 = m.result.final_record.kl;
  return {omwu_ok && kl1 >= kl0 && m.result.iterations == 100'000,
          fmt::format("OMWU l1 {:.4f} after {} iterations; MWU KL {:.4f} -> {:.4f} over {} iterations",
                      r.final_record.l1_error, r.iterations, kl0, kl1, m.result.iterations)};
}

Outcome criterion4() {
  double strat = 0.0;
  double value = 0.0;
  int mismatched = 0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const MatrixGame g = gen_random_game(4, 4, derive_seed(404, k));
    const Equilibrium lp = solve_lp(g);
    const auto all = solve_support_enum(g);
    if (all.size() != 1) {
      ++mismatched;
      continue;
    }
    strat = std::max({strat, (lp.x_star.values() - all[0].x_star.values()).lpNorm<Eigen::Infinity>(),
                      (lp.y_star.values() - all[0].y_star.values()).lpNorm<Eigen::Infinity>()});
    value = std::max(value, std::abs(lp.value - all[0].value));
  }
  return {mismatched == 0 && strat <= 1e-8 && value <= 1e-9,
          fmt::format("100 games, max strategy gap {:.2e}, max value gap {:.2e}, {} without a single equilibrium",
                      strat, value, mismatched)};
}

Outcome criterion5() {
  const auto games = unique_games(5, 505, shape_upto(5, 506));
  constexpr double eta = 0.05;
  constexpr double h = 1e-6;
  double fd = 0.0;
  double consistency = 0.0;
  for (std::size_t gi = 0; gi < games.size(); ++gi) {
    const auto& [g, eq] = games[gi];
    const Eigen::Index n = g.rows();
    const Eigen::Index m = g.cols();
    for (int s = 0; s < 20; ++s) {
      const DynamicsState st{random_interior_point(n, derive_seed(507, gi, 4 * s)),
                             random_interior_point(m, derive_seed(507, gi, 4 * s + 1)),
                             random_interior_point(n, derive_seed(507, gi, 4 * s + 2)),
                             random_interior_point(m, derive_seed(507, gi, 4 * s + 3))};
      const Eigen::VectorXd q = pack(st);
      const Eigen::MatrixXd J = jacobian_general(q, g, eta).M;
      Eigen::MatrixXd F(q.size(), q.size());
      for (Eigen::Index k = 0; k < q.size(); ++k) {
        Eigen::VectorXd qp = q;
        Eigen::VectorXd qm = q;
        qp[k] += h;
        qm[k] -= h;
        F.col(k) = (g_map(qp, g, eta) - g_map(qm, g, eta)) / (2 * h);
      }
      fd = std::max(fd, (J - F).lpNorm<Eigen::Infinity>() / J.lpNorm<Eigen::Infinity>());
    }
    const Eigen::VectorXd qe = pack(DynamicsState::repeated(eq.x_star, eq.y_star));
    consistency = std::max(consistency, (jacobian_general(qe, g, eta).M -
                                         jacobian_at_equilibrium(eq, g, eta).M)
                                            .lpNorm<Eigen::Infinity>());
  }
  return {fd < 1e-6 && consistency <= 1e-12,
          fmt::format("5 games x 20 states, max relative FD error {:.2e}; general vs closed form at equilibrium {:.2e}",
                      fd, consistency)};
}

Outcome criterion6() {
  const auto games = unique_games(20, 606, shape_upto(6, 607));
  double rho = 0.0;
  double skew = 0.0;
  double real_ratio = 0.0;
  std::size_t unpaired = 0;
  double mult = 0.0;
  for (const auto& [g, eq] : games) {
    const ContractionCertificate c = certify_contraction(eq, g, 0.01);
    rho = std::max(rho, c.spectral_radius);
    skew = std::max(skew, c.skew_residual);
    const ReducedBlocks rb = reduce(eq, g, 0.01);
    real_ratio = std::max(real_ratio, c.max_real_part / rb.J_small.norm());
    unpaired += c.unpaired;
    for (double v : c.off_support_multipliers) mult = std::max(mult, v);
  }
  const bool ok = rho < 1.0 && skew <= 1e-12 && real_ratio <= 1e-10 && unpaired == 0 && mult < 1.0;
  return {ok, fmt::format("20 games, max rho {:.12f}, skew {:.1e}, max |Re|/|J_small| {:.1e}, unpaired {}, "
                          "max off-support multiplier {:.6f}",
                          rho, skew, real_ratio, unpaired, mult)};
}

Outcome criterion7() {
  double root = 0.0;
  double modulus = 0.0;
  for (double sigma : {0.0, 0.1, 0.3, 0.5}) {
    const auto [a, b] = lambda_from_sigma(sigma);
    const double disc = std::sqrt(1.0 - 4.0 * sigma * sigma);
    int k = 0;
    for (const cd& l : {a, b}) {
      // Cleared denominator; at sigma = 1/2 the double root makes 2 lambda - 1 vanish.
      root = std::max(root, std::abs(l * (l - 1.0) - cd(0, sigma) * (2.0 * l - 1.0)));
      const double want = k++ == 0 ? (1 + disc) / 2 : (1 - disc) / 2;
      modulus = std::max(modulus, std::abs(std::norm(l) - want));
    }
  }
  return {root <= 1e-12 && modulus <= 1e-12,
          fmt::format("max root residual {:.1e}, max |lambda|^2 error {:.1e}", root, modulus)};
}

Outcome criterion8() {
  const MatrixGame g = gen_random_game(6, 5, 808);
  const DynamicsState st{random_interior_point(6, 809), random_interior_point(5, 810),
                         random_interior_point(6, 811), random_interior_point(5, 812)};
  std::vector<double> etas;
  for (int k = 2; k <= 8; ++k) etas.push_back(std::pow(10.0, -0.5 * k));
  std::vector<double> step;
  std::vector<double> gap;
  for (const auto& r : step_distance_profile(g, st, etas)) {
    step.push_back(r.exp_step);
    gap.push_back(r.exp_vs_linear);
  }
  const double s1 = loglog_slope(etas, step);
  const double s2 = loglog_slope(etas, gap);
  return {std::abs(s1 - 1.0) <= 0.15 && std::abs(s2 - 2.0) <= 0.15,
          fmt::format("slope |step| {:.4f}, slope |exp - linear| {:.4f}", s1, s2)};
}

Outcome criterion9() {
  const MonotoneStats& st = monotone_runs();
  return {st.worst_row_anchor >= -1e-10 && st.worst_col_anchor >= -1e-10,
          fmt::format("{} trajectories, min x*A(2y-y') - v = {:.3e}, min v - (2x-x')Ay* = {:.3e}", st.games,
                      st.worst_row_anchor, st.worst_col_anchor)};
}

// The 2e6 sweep default stops short of the n=25 and n=50 medians at eta=0.01.
constexpr std::int64_t kSweepIters = 10'000'000;

Outcome criterion10() {
  const auto start = std::chrono::steady_clock::now();
  SweepConfig dim;
  dim.sizes = {10, 25, 50};
  dim.eta = 0.01;
  dim.target_error = 0.1;
  dim.trials_per_point = 5;
  dim.seed = 7;
  dim.max_iters = kSweepIters;
  const auto ds = summarize(sweep_dimension(dim));

  SweepConfig err;
  err.errors = {0.5, 0.25, 0.0625, 0.015625, 0.007812};
  err.n_fixed = 50;
  err.eta = 0.01;
  err.trials_per_point = 5;
  err.seed = 7;
  err.max_iters = kSweepIters;
  const auto es = summarize(sweep_error(err));

  std::vector<double> n;
  std::vector<double> med;
  bool dim_increasing = ds.size() == 3;
  int dim_conv = 0;
  for (std::size_t k = 0; k < ds.size(); ++k) {
    n.push_back(ds[k].point);
    med.push_back(ds[k].median_iterations);
    dim_conv += ds[k].converged;
    if (k > 0 && !(ds[k].median_iterations > ds[k - 1].median_iterations)) dim_increasing = false;
  }
  const double slope = dim_increasing ? loglog_slope(n, med) : std::nan("");
  bool err_increasing = es.size() == 5;
  int err_conv = 0;
  for (std::size_t k = 0; k < es.size(); ++k) {
    err_conv += es[k].converged;
    if (k > 0 && !(es[k].median_iterations > es[k - 1].median_iterations)) err_increasing = false;
  }
  std::string dims;
  for (const auto& s : ds) dims += fmt::format(" {}:{}", s.point, s.median_iterations);
  std::string errs;
  for (const auto& s : es) errs += fmt::format(" {}:{}", s.point, s.median_iterations);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = dim_increasing && slope >= 0.5 && slope <= 3.0 && err_increasing && secs < 900.0;
  return {ok, fmt::format("median iterations by n{} (slope {:.3f}, {}/15 converged); by eps{} ({}/25 converged); cap {}",
                          dims, slope, dim_conv, errs, err_conv, kSweepIters)};
}

// Zero-sum perturbation of each block, nonnegative off the support, l1 norm 1e-3.
DynamicsState perturb(const Equilibrium& eq, std::uint64_t seed) {
  const Eigen::Index n = eq.x_star.size();
  const Eigen::Index m = eq.y_star.size();
  const Eigen::VectorXd q = pack(DynamicsState::repeated(eq.x_star, eq.y_star));
  const SplitMix64 r(seed);
  Eigen::VectorXd d(q.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = r.uniform(static_cast<std::uint64_t>(i), -1, 1);
  auto fix = [&](Eigen::Index off, Eigen::Index len, const std::vector<Eigen::Index>& sup) {
    for (Eigen::Index i = 0; i < len; ++i) {
      if (!std::binary_search(sup.begin(), sup.end(), i)) d[off + i] = std::abs(d[off + i]);
    }
    const double sum = d.segment(off, len).sum();
    for (Eigen::Index i : sup) d[off + i] -= sum / static_cast<double>(sup.size());
  };
  fix(0, n, eq.support_x);
  fix(n, m, eq.support_y);
  fix(n + m, n, eq.support_x);
  fix(2 * n + m, m, eq.support_y);
  d *= 1e-3 / d.lpNorm<1>();
  const Eigen::VectorXd p = q + d;
  return DynamicsState{SimplexPoint::normalized(p.segment(0, n)), SimplexPoint::normalized(p.segment(n, m)),
                       SimplexPoint::normalized(p.segment(n + m, n)),
                       SimplexPoint::normalized(p.segment(2 * n + m, m))};
}

Outcome criterion11() {
  const std::vector<double> grid = {0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9};
  std::string detail;
  int chosen = 0;
  bool ok = true;
  for (std::uint64_t s = 1; chosen < 5 && s < 1000; ++s) {
    const MatrixGame g = gen_random_game(2 + static_cast<Eigen::Index>(s % 3),
                                         2 + static_cast<Eigen::Index>((s / 3) % 3), s);
    const Equilibrium eq = solve_lp(g);
    if (!eq.unique || eq.support_x.size() < 2) continue;
    double rho = 2.0;
    double eta = 0.0;
    for (double e : grid) {
      const ContractionCertificate c = certify_contraction(eq, g, e);
      if (c.certified && c.spectral_radius < rho) {
        rho = c.spectral_radius;
        eta = e;
      }
    }
    if (eta == 0.0 || std::pow(rho, 200) > 0.01) continue;
    ++chosen;

    const DynamicsState target = DynamicsState::repeated(eq.x_star, eq.y_star);
    const double envelope = std::pow((rho + 1.0) / 2.0, 200);
    double worst = 1e300;
    bool within_envelope = true;
    for (std::uint64_t trial = 0; trial < 3; ++trial) {
      DynamicsState st = perturb(eq, derive_seed(1100, s, trial));
      const double d0 = quad_l1(st, target);
      for (int t = 0; t < 200; ++t) st = omwu_step(st, g, eta);
      const double d200 = quad_l1(st, target);
      worst = std::min(worst, d0 / d200);
      within_envelope = within_envelope && d200 / d0 <= envelope;
    }
    ok = ok && worst >= 10.0 && within_envelope;
    detail += fmt::format("{}seed {} {}x{} eta {} rho {:.4f} factor {:.3g}", chosen == 1 ? "" : "; ", s, g.rows(),
                          g.cols(), eta, rho, worst);
  }
  return {ok && chosen == 5, detail};
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  struct Entry {
    int id;
    const char* name;
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {1, "fixed point and simplex invariants", criterion1},
      {2, "KL monotone decrease", criterion2},
      {3, "OMWU converges, MWU diverges", criterion3},
      {4, "LP and support enumeration agree", criterion4},
      {5, "Jacobian vs finite differences", criterion5},
      {6, "spectral structure", criterion6},
      {7, "lambda_from_sigma closed form", criterion7},
      {8, "step-size scaling orders", criterion8},
      {9, "anchor inequalities", criterion9},
      {10, "dimension and error sweep trends", criterion10},
      {11, "local contraction dynamics", criterion11},
  };
  int failed = 0;
  for (const auto& e : entries) {
    const auto t0 = clock::now();
    Outcome o;
    try {
      o = e.fn();
    } catch (const std::exception& ex) {
      o = {false, fmt::format("exception: {}", ex.what())};
    }
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    if (!o.pass) ++failed;
    fmt::print("[{}] criterion {:>2}: {} ({:.2f} s) | {}\n", o.pass ? "PASS" : "FAIL", e.id, e.name, secs, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", std::size(entries) - static_cast<std::size_t>(failed), std::size(entries));
  return failed == 0 ? 0 : 1;
}
