#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "omwu/bench.hpp"
#include "omwu/dynamics.hpp"
#include "omwu/eigensolver.hpp"
#include "omwu/game.hpp"
#include "omwu/oracle.hpp"
#include "omwu/spectral.hpp"

namespace omwu::cli {

namespace {

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error(fmt::format("cannot open {} for writing", path));
  return f;
}

struct ExactArgs {
  std::string game;
  bool json = false;
};

void cmd_exact(const ExactArgs& a, std::ostream& out) {
  const MatrixGame game = load_game(a.game);
  const Equilibrium eq = solve_lp(game);
  const Uniqueness u = check_uniqueness(game);
  if (a.json) {
    nlohmann::json j;
    j["x"] = to_vector(eq.x_star.values());
    j["y"] = to_vector(eq.y_star.values());
    j["value"] = eq.value;
    j["unique"] = u == Uniqueness::kUnique;
    j["uniqueness"] = to_string(u);
    out << j.dump(2) << '\n';
    return;
  }
  fmt::print(out, "value       {:.17g}\n", eq.value);
  fmt::print(out, "x*          [{:.12g}]\n", fmt::join(to_vector(eq.x_star.values()), ", "));
  fmt::print(out, "y*          [{:.12g}]\n", fmt::join(to_vector(eq.y_star.values()), ", "));
  fmt::print(out, "uniqueness  {}\n", to_string(u));
}

struct SolveArgs {
  std::string game;
  std::string method = "omwu";
  RunConfig config;
  std::string log;
  bool json = false;
};

void cmd_solve(SolveArgs a, std::ostream& out) {
  const MatrixGame game = load_game(a.game);
  const Equilibrium eq = solve_lp(game);
  a.config.method = parse_method(a.method);
  if (!a.log.empty() && a.config.log_every == 0) a.config.log_every = 1;
  const RunOutput run_out = run(game, eq, a.config);
  if (!a.log.empty()) {
    auto f = open_output(a.log);
    write_trajectory_csv(f, run_out.records);
  }
  const RunResult& r = run_out.result;
  const TrajectoryRecord& fin = r.final_record;
  if (a.json) {
    nlohmann::json j;
    j["method"] = to_string(a.config.method);
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["final"] = {{"kl", fin.kl},         {"l1_error", fin.l1_error}, {"alpha", fin.alpha},
                  {"epsilon", fin.epsilon}, {"value", fin.value}};
    j["stall_iter"] = r.stall_iter ? nlohmann::json(*r.stall_iter) : nlohmann::json(nullptr);
    j["equilibrium_unique"] = eq.unique;
    j["x"] = to_vector(run_out.final_state.x_cur.values());
    j["y"] = to_vector(run_out.final_state.y_cur.values());
    out << j.dump(2) << '\n';
    return;
  }
  fmt::print(out, "method      {}\n", to_string(a.config.method));
  fmt::print(out, "iterations  {}\n", r.iterations);
  fmt::print(out, "converged   {}\n", r.converged ? "yes" : "no");
  fmt::print(out, "l1_error    {:.6g}\n", fin.l1_error);
  fmt::print(out, "kl          {:.6g}\n", fin.kl);
  fmt::print(out, "epsilon     {:.6g}\n", fin.epsilon);
  if (r.stall_iter) fmt::print(out, "stall_iter  {}\n", *r.stall_iter);
  if (!eq.unique) fmt::print(out, "warning     equilibrium not certified unique\n");
}

struct SpectralArgs {
  std::string game;
  double eta = 0.01;
  bool json = false;
};

void cmd_spectral(const SpectralArgs& a, std::ostream& out) {
  const MatrixGame game = load_game(a.game);
  const Equilibrium eq = solve_lp(game);
  if (!eq.unique) {
    throw std::runtime_error("equilibrium is not certified unique; no certificate issued");
  }
  const ContractionCertificate cert = certify_contraction(eq, game, a.eta);
  if (a.json) {
    out << certificate_to_json(cert) << '\n';
    return;
  }
  fmt::print(out, "certified        {}\n", cert.certified ? "yes" : "no");
  fmt::print(out, "spectral_radius  {:.15g}\n", cert.spectral_radius);
  fmt::print(out, "1 - rho          {:.6e}\n", 1.0 - cert.spectral_radius);
  if (!cert.off_support_multipliers.empty()) {
    fmt::print(out, "off-support      [{:.12g}]\n", fmt::join(cert.off_support_multipliers, ", "));
  }
  fmt::print(out, "sigma            [{:.6e}]\n", fmt::join(cert.sigma_values, ", "));
  fmt::print(out, "unpaired         {}\n", cert.unpaired);
  fmt::print(out, "skew residual    {:.3e}\n", cert.skew_residual);
}

struct SweepArgs {
  SweepConfig config;
  std::string out;
  bool no_wall_time = false;
};

void print_summary(const SweepResult& result, std::ostream& out) {
  for (const auto& s : summarize(result)) {
    fmt::print(out, "point {:<10} median_iterations {:<12} converged {}/{}\n", s.point,
               s.median_iterations, s.converged, s.total);
  }
}

void cmd_sweep(SweepArgs a, bool dimension, std::ostream& out) {
  a.config.record_wall_time = !a.no_wall_time;
  const SweepResult result = dimension ? sweep_dimension(a.config) : sweep_error(a.config);
  auto f = open_output(a.out);
  write_sweep_csv(f, result);
  print_summary(result, out);
}

struct GenArgs {
  Eigen::Index n = 3;
  Eigen::Index m = 0;
  std::uint64_t seed = 0;
  std::string out;
};

void cmd_gen(const GenArgs& a, std::ostream& out) {
  const MatrixGame game = gen_random_game(a.n, a.m > 0 ? a.m : a.n, a.seed);
  if (a.out.empty()) {
    out << game_to_json(game);
  } else {
    auto f = open_output(a.out);
    f << game_to_json(game);
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"OMWU dynamics, exact solvers and contraction certificates for zero-sum games",
               "omwu"};
  app.require_subcommand(1);

  ExactArgs exact;
  auto* sc_exact = app.add_subcommand("exact", "Solve the game exactly (LP) and test uniqueness");
  sc_exact->add_option("--game", exact.game, "Game JSON file {\"A\": [[...]]}")->required();
  sc_exact->add_flag("--json", exact.json, "Print JSON");

  SolveArgs solve;
  auto* sc_solve = app.add_subcommand("solve", "Run a learning dynamic and log its trajectory");
  sc_solve->add_option("--game", solve.game, "Game JSON file")->required();
  sc_solve->add_option("--method", solve.method, "omwu | omwu-linear | mwu")
      ->check(CLI::IsMember({"omwu", "omwu-linear", "omwu_linear", "mwu"}));
  sc_solve->add_option("--eta", solve.config.eta, "Step size");
  sc_solve->add_option("--max-iters", solve.config.max_iters, "Iteration cap");
  sc_solve->add_option("--target-error", solve.config.target_l1_error,
                       "Stop once the l1 error to the equilibrium is at most this");
  sc_solve->add_option("--log", solve.log, "Trajectory CSV output");
  sc_solve->add_option("--log-every", solve.config.log_every,
                       "Log every k-th iterate (default 1 when --log is given)");
  sc_solve->add_option("--seed", solve.config.seed, "Seed of the random interior start");
  sc_solve->add_flag("--random-start", solve.config.random_start,
                     "Start from a random interior point instead of uniform");
  sc_solve->add_option("--stall-constant", solve.config.stall_constant,
                       "c in the stall rule: KL change > -c eta^3");
  sc_solve->add_flag("--json", solve.json, "Print the summary as JSON");

  SpectralArgs spectral;
  auto* sc_spec = app.add_subcommand("spectral", "Certify local contraction at the equilibrium");
  sc_spec->add_option("--game", spectral.game, "Game JSON file")->required();
  sc_spec->add_option("--eta", spectral.eta, "Step size")->check(CLI::PositiveNumber);
  sc_spec->add_flag("--json", spectral.json, "Print the certificate as JSON");

  SweepArgs dim;
  std::vector<Eigen::Index> sizes;
  auto* sc_dim = app.add_subcommand("sweep-dim", "Iterations to a target error versus n");
  sc_dim->add_option("--sizes", sizes, "Comma-separated sizes")->delimiter(',')->required();
  sc_dim->add_option("--eta", dim.config.eta, "Step size");
  sc_dim->add_option("--target-error", dim.config.target_error, "Target l1 error");
  sc_dim->add_option("--trials", dim.config.trials_per_point, "Trials per size");
  sc_dim->add_option("--seed", dim.config.seed, "Sweep seed");
  sc_dim->add_option("--max-iters", dim.config.max_iters, "Iteration cap per run");
  sc_dim->add_option("--threads", dim.config.threads, "Worker threads (0 = all cores)");
  sc_dim->add_flag("--no-wall-time", dim.no_wall_time, "Write 0 for wall_time_seconds");
  sc_dim->add_option("--out", dim.out, "CSV output")->required();

  SweepArgs err_sweep;
  auto* sc_err = app.add_subcommand("sweep-err", "Iterations to each error threshold");
  sc_err->add_option("--n", err_sweep.config.n_fixed, "Game size");
  sc_err->add_option("--errors", err_sweep.config.errors, "Comma-separated, decreasing")
      ->delimiter(',')
      ->required();
  sc_err->add_option("--eta", err_sweep.config.eta, "Step size");
  sc_err->add_option("--trials", err_sweep.config.trials_per_point, "Trials");
  sc_err->add_option("--seed", err_sweep.config.seed, "Sweep seed");
  sc_err->add_option("--max-iters", err_sweep.config.max_iters, "Iteration cap per trial");
  sc_err->add_option("--threads", err_sweep.config.threads, "Worker threads (0 = all cores)");
  sc_err->add_flag("--no-wall-time", err_sweep.no_wall_time, "Write 0 for wall_time_seconds");
  sc_err->add_option("--out", err_sweep.out, "CSV output")->required();

  GenArgs gen;
  auto* sc_gen = app.add_subcommand("gen-game", "Write a Uniform[-1,1] random game as JSON");
  sc_gen->add_option("--n", gen.n, "Rows")->check(CLI::PositiveNumber);
  sc_gen->add_option("--m", gen.m, "Columns (default n)");
  sc_gen->add_option("--seed", gen.seed, "Seed");
  sc_gen->add_option("--out", gen.out, "Output file (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (sc_exact->parsed()) cmd_exact(exact, out);
    if (sc_solve->parsed()) cmd_solve(solve, out);
    if (sc_spec->parsed()) cmd_spectral(spectral, out);
    if (sc_dim->parsed()) {
      dim.config.sizes = sizes;
      cmd_sweep(dim, true, out);
    }
    if (sc_err->parsed()) cmd_sweep(err_sweep, false, out);
    if (sc_gen->parsed()) cmd_gen(gen, out);
  } catch (const std::exception& e) {
    fmt::print(err, "omwu: error: {}\n", e.what());
    return 1;
  }
  return 0;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace omwu::cli
