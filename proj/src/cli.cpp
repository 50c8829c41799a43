#include "riskdiv/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <set>

#include "riskdiv/config.hpp"
#include "riskdiv/exp_solver.hpp"
#include "riskdiv/howard.hpp"
#include "riskdiv/oracle.hpp"
#include "riskdiv/output.hpp"
#include "riskdiv/parallel.hpp"
#include "riskdiv/power_solver.hpp"
#include "riskdiv/simulate.hpp"

namespace riskdiv::cli {

namespace {

using nlohmann::json;
using S = std::vector<std::string>;

struct Flags {
  std::string config;
  int threads = 0;
  int x0 = -1;
  long paths = 10000;
  int max_steps = 10000;
  int max_iter = 1000;
  long max_nodes = 2'000'000;
};

std::string path_in(const RunConfig& rc, const char* name) { return rc.output_dir + "/" + name; }

std::string num(double v) { return format_number(v); }
std::string num(int v) { return std::to_string(v); }

void require(const InvariantReport& rep, const char* what) {
  if (rep.ok()) return;
  std::string msg = std::string(what) + ": " + std::to_string(rep.violations.size()) + " violation(s); first: " +
                    rep.violations.front();
  throw Error(ErrorCode::InvariantViolation, msg);
}

json problem_json(const ProblemConfig& p) {
  json d = json::object();
  for (const auto& [k, q] : p.dist.to_map()) d[std::to_string(k)] = q;
  return {{"utility", utility_name(p.utility)}, {"beta", p.beta},   {"gamma", p.gamma},
          {"x_max", p.x_max},                   {"distribution", d}, {"tail_eps", p.tail_eps}};
}

json exp_summary_rows(const ProblemConfig& p, const ExpValueTable& v) {
  json rows = json::array();
  for (int x = 0; x <= p.x_max; ++x) {
    double lo = v.lo(0, x), hi = v.hi(0, x);
    rows.push_back({{"x", x},
                    {"j_lo", lo},
                    {"j_hi", hi},
                    {"expected_utility", {hi / p.gamma, lo / p.gamma}},
                    {"certainty_equivalent", {std::log(hi) / p.gamma, std::log(lo) / p.gamma}}});
  }
  return rows;
}

void write_exp_tables(const RunConfig& rc, const ExpSolution& sol, const std::vector<BandFunction>& bands) {
  const int N = sol.schedule.depth();
  const int X = rc.problem.x_max;
  CsvWriter values(path_in(rc, "values.csv"), {"n", "theta", "x", "j_lo", "j_hi", "action", "xi", "band_cuts"});
  for (int n = 0; n <= N; ++n) {
    for (int x = 0; x <= X; ++x) {
      bool row = n < N;
      values.row({num(n), num(sol.schedule.theta(n)), num(x), num(sol.values.lo(n, x)), num(sol.values.hi(n, x)),
                  row ? num(static_cast<int>(sol.policy.action(n, x))) : "", row ? num(sol.policy.xi(n)) : "",
                  row ? bands[static_cast<size_t>(n)].cuts_string() : ""});
    }
  }
  values.close();
  CsvWriter policy(path_in(rc, "policy.csv"), {"n", "x", "action"});
  for (int n = 0; n < N; ++n)
    for (int x = 0; x <= X; ++x) policy.row({num(n), num(x), num(static_cast<int>(sol.policy.action(n, x)))});
  policy.close();
  CsvWriter bc(path_in(rc, "bands.csv"), {"n", "theta", "xi", "band_cuts"});
  for (int n = 0; n < N; ++n)
    bc.row({num(n), num(sol.schedule.theta(n)), num(sol.policy.xi(n)), bands[static_cast<size_t>(n)].cuts_string()});
  bc.close();
}

int cmd_solve_exp(const RunConfig& rc, bool bands_only) {
  ExpSolution sol = solve_exp(rc.problem);
  require(verify_exp_solution(sol), "exponential solution");
  std::vector<BandFunction> bands = extract_bands(sol.policy);
  if (bands_only) {
    CsvWriter bc(path_in(rc, "bands.csv"), {"n", "theta", "xi", "band_cuts"});
    for (int n = 0; n < sol.schedule.depth(); ++n)
      bc.row({num(n), num(sol.schedule.theta(n)), num(sol.policy.xi(n)), bands[static_cast<size_t>(n)].cuts_string()});
    bc.close();
  } else {
    write_exp_tables(rc, sol, bands);
  }
  json xi = json::array();
  for (int n = 0; n < sol.schedule.depth(); ++n) xi.push_back(sol.policy.xi(n));
  json summary = {{"problem", problem_json(rc.problem)},
                  {"depth", sol.schedule.depth()},
                  {"s_star", sol.s_star},
                  {"max_width0", sol.max_width0},
                  {"xi", xi},
                  {"depth0", exp_summary_rows(rc.problem, sol.values)}};
  write_json(path_in(rc, "summary.json"), summary);
  std::cout << "solved depth " << sol.schedule.depth() << ", s* = " << format_number(sol.s_star) << ", outputs in "
            << rc.output_dir << "\n";
  return kExitOk;
}

int cmd_solve_power(const RunConfig& rc) {
  const ProblemConfig& p = rc.problem;
  PowerSolution sol = p.utility == Utility::Logarithmic ? solve_log(p) : solve_power(p);
  require(verify_power_solution(sol), "power solution");
  BarrierReport br = barrier_diagnostics(sol);
  const int N = sol.depth, X = sol.x_max, M = sol.grid.size();
  CsvWriter values(path_in(rc, "values.csv"), {"d", "x", "s", "w_lo", "w_hi", "action", "xi_of_s"});
  for (int d = 0; d <= N; ++d)
    for (int x = 0; x <= X; ++x)
      for (int j = 0; j < M; ++j) {
        bool row = d < N;
        values.row({num(d), num(x), num(sol.grid[j]), num(sol.values.lo(d, x, j)), num(sol.values.hi(d, x, j)),
                    row ? num(static_cast<int>(sol.policy.action(d, x, j))) : "", row ? num(br.at(d, j)) : ""});
      }
  values.close();
  CsvWriter policy(path_in(rc, "policy.csv"), {"d", "x", "s", "action"});
  for (int d = 0; d < N; ++d)
    for (int x = 0; x <= X; ++x)
      for (int j = 0; j < M; ++j)
        policy.row({num(d), num(x), num(sol.grid[j]), num(static_cast<int>(sol.policy.action(d, x, j)))});
  policy.close();
  // Band structure in x for fixed s is reported, not required.
  CsvWriter bc(path_in(rc, "bands.csv"), {"d", "s", "xi", "is_band", "band_cuts"});
  long bands_found = 0, columns = 0;
  std::vector<std::int32_t> col(static_cast<size_t>(X) + 1);
  for (int d = 0; d < N; ++d)
    for (int j = 0; j < M; ++j) {
      for (int x = 0; x <= X; ++x) col[static_cast<size_t>(x)] = sol.policy.action(d, x, j);
      std::string cuts;
      bool ok = true;
      try {
        cuts = extract_band(col).cuts_string();
      } catch (const Error&) {
        ok = false;
      }
      ++columns;
      bands_found += ok;
      bc.row({num(d), num(sol.grid[j]), num(br.at(d, j)), ok ? "1" : "0", cuts});
    }
  bc.close();
  json rows = json::array();
  for (int x = 0; x <= X; ++x) {
    double lo = sol.j_hat_lo(x), hi = sol.j_hat_hi(x);
    rows.push_back({{"x", x},
                    {"j_hat_lo", lo},
                    {"j_hat_hi", hi},
                    {"certainty_equivalent",
                     {certainty_equivalent(p.utility, p.gamma, lo), certainty_equivalent(p.utility, p.gamma, hi)}}});
  }
  json summary = {{"problem", problem_json(p)},
                  {"y0", p.y0},
                  {"depth", N},
                  {"grid_size", M},
                  {"lattice_points", sol.grid.lattice_points},
                  {"xi_star", sol.xi_star},
                  {"max_xi", br.max_xi},
                  {"shift_pairs_checked", br.shift_pairs_checked},
                  {"band_columns", columns},
                  {"band_columns_with_band", bands_found},
                  {"max_width0", sol.max_width0},
                  {"depth0", rows}};
  write_json(path_in(rc, "summary.json"), summary);
  std::cout << "solved depth " << N << " on " << M << " s-nodes, outputs in " << rc.output_dir << "\n";
  return kExitOk;
}

int cmd_solve_neutral(const RunConfig& rc) {
  NeutralSolution sol = solve_neutral(rc.problem);
  CsvWriter values(path_in(rc, "values.csv"), {"x", "value", "action"});
  for (int x = 0; x <= rc.problem.x_max; ++x)
    values.row({num(x), num(sol.value[static_cast<size_t>(x)]), num(static_cast<int>(sol.action[static_cast<size_t>(x)]))});
  values.close();
  BandFunction band = extract_band(sol.action);
  CsvWriter bc(path_in(rc, "bands.csv"), {"band_cuts"});
  bc.row({band.cuts_string()});
  bc.close();
  int xi = 0;
  for (int x = rc.problem.x_max; x >= 0; --x)
    if (sol.action[static_cast<size_t>(x)] == 0) {
      xi = x;
      break;
    }
  json summary = {{"problem", problem_json(rc.problem)}, {"iterations", sol.iterations},
                  {"residual", sol.residual},           {"barrier_bound", sol.barrier_bound},
                  {"xi", xi},                           {"band_cuts", band.cuts_string()}};
  write_json(path_in(rc, "summary.json"), summary);
  std::cout << "converged in " << sol.iterations << " iterations, outputs in " << rc.output_dir << "\n";
  return kExitOk;
}

int cmd_howard(const RunConfig& rc, const Flags& f) {
  HowardOptions opt;
  opt.max_iter = f.max_iter;
  opt.keep_history = true;
  HowardResult hr = howard_solve(rc.problem, nullptr, opt);
  ExpSolution vi = solve_exp(rc.problem);
  const int N = hr.policy.depth(), X = rc.problem.x_max;
  CsvWriter policy(path_in(rc, "policy.csv"), {"iteration", "n", "x", "action", "j_hi"});
  for (const HowardStep& st : hr.history)
    for (int n = 0; n < N; ++n)
      for (int x = 0; x <= X; ++x)
        policy.row({num(st.iteration), num(n), num(x), num(static_cast<int>(st.rule.action(n, x))),
                    num(st.values.hi(n, x))});
  policy.close();
  CsvWriter values(path_in(rc, "values.csv"), {"n", "x", "j_lo", "j_hi", "action"});
  for (int n = 0; n < N; ++n)
    for (int x = 0; x <= X; ++x)
      values.row({num(n), num(x), num(hr.values.lo(n, x)), num(hr.values.hi(n, x)),
                  num(static_cast<int>(hr.policy.action(n, x)))});
  values.close();
  double worst = 0.0;
  for (int x = 0; x <= X; ++x) {
    double gap = std::max(std::fabs(hr.values.lo(0, x) - vi.values.lo(0, x)), std::fabs(hr.values.hi(0, x) - vi.values.hi(0, x)));
    double slack = hr.values.width(0, x) + vi.values.width(0, x);
    worst = std::max(worst, gap - slack);
  }
  bool same_rule = hr.policy == vi.policy;
  json summary = {{"problem", problem_json(rc.problem)},
                  {"iterations", hr.iterations},
                  {"final_gap", hr.final_gap},
                  {"rule_equals_value_iteration", same_rule},
                  {"values_within_widths", worst <= 0.0}};
  write_json(path_in(rc, "summary.json"), summary);
  std::cout << "converged in " << hr.iterations << " iteration(s), outputs in " << rc.output_dir << "\n";
  if (!same_rule || worst > 0.0)
    throw Error(ErrorCode::InvariantViolation, "policy improvement disagrees with value iteration");
  return kExitOk;
}

int cmd_oracle_check(const RunConfig& rc, const Flags& f) {
  const ProblemConfig& p = rc.problem;
  oracle::OracleOptions oo;
  oo.max_nodes = f.max_nodes;
  json rows = json::array();
  bool all_pass = true;
  int checked = 0;
  auto one = [&](int x0, double lo, double hi, const oracle::TreeProblem& plo, const oracle::TreeProblem& phi) {
    if (oracle::count_nodes(plo, x0, oo.max_nodes) > oo.max_nodes) {
      rows.push_back({{"x0", x0}, {"skipped", "tree too large"}});
      return;
    }
    double olo = static_cast<double>(oracle::exact_optimal(plo, x0, oo).value);
    double ohi = static_cast<double>(oracle::exact_optimal(phi, x0, oo).value);
    double gap = std::max(std::fabs(lo - olo), std::fabs(hi - ohi));
    double tol = (hi - lo) + 1e-10;
    bool pass = gap <= tol;
    all_pass = all_pass && pass;
    ++checked;
    rows.push_back({{"x0", x0}, {"solver", {lo, hi}}, {"oracle", {olo, ohi}}, {"gap", gap}, {"tolerance", tol}, {"pass", pass}});
  };
  int depth = 0;
  if (p.utility == Utility::Exponential) {
    ExpSolution sol = solve_exp(p);
    depth = sol.schedule.depth();
    auto plo = oracle::exp_problem(p, sol, oracle::TailEnd::Lower);
    auto phi = oracle::exp_problem(p, sol, oracle::TailEnd::Upper);
    for (int x0 = 0; x0 <= p.x_max; ++x0) one(x0, sol.values.lo(0, x0), sol.values.hi(0, x0), plo, phi);
  } else if (p.utility == Utility::Power || p.utility == Utility::Logarithmic) {
    PowerSolution sol = p.utility == Utility::Power ? solve_power(p) : solve_log(p);
    depth = sol.depth;
    auto plo = oracle::power_problem(p, depth, oracle::TailEnd::Lower);
    auto phi = oracle::power_problem(p, depth, oracle::TailEnd::Upper);
    for (int x0 = 0; x0 <= p.x_max; ++x0) one(x0, sol.j_hat_lo(x0), sol.j_hat_hi(x0), plo, phi);
  } else {
    throw Error(ErrorCode::ValidationError, "oracle-check supports exponential, power and log utility");
  }
  if (checked == 0) throw Error(ErrorCode::ValidationError, "every history tree exceeds the node budget; lower depth or x_max");
  json summary = {{"problem", problem_json(p)}, {"depth", depth}, {"checked", checked}, {"pass", all_pass}, {"rows", rows}};
  write_json(path_in(rc, "summary.json"), summary);
  std::cout << (all_pass ? "PASS" : "FAIL") << ": " << checked << " start state(s) compared, outputs in "
            << rc.output_dir << "\n";
  if (!all_pass) throw Error(ErrorCode::InvariantViolation, "solver and oracle disagree");
  return kExitOk;
}

int cmd_simulate(const RunConfig& rc, const Flags& f) {
  const ProblemConfig& p = rc.problem;
  SimulationOptions so;
  so.x0 = f.x0 < 0 ? 0 : f.x0;
  so.n_paths = f.paths;
  so.max_steps = f.max_steps;
  so.seed = p.seed;
  json extra = json::object();
  SimulationResult r;
  double xi_star = 0.0;
  PolicyFn pol;
  ExpSolution es;
  PowerSolution ps;
  NeutralSolution ns;
  switch (p.utility) {
    case Utility::Exponential: {
      es = solve_exp(p);
      pol = exp_policy_fn(es.policy);
      for (int n = 0; n < es.policy.depth(); ++n) xi_star = std::max(xi_star, static_cast<double>(es.policy.xi(n)));
      if (so.x0 <= p.x_max) {
        extra["solver_j"] = {es.values.lo(0, so.x0), es.values.hi(0, so.x0)};
        extra["solver_expected_utility"] = {es.values.hi(0, so.x0) / p.gamma, es.values.lo(0, so.x0) / p.gamma};
      }
      break;
    }
    case Utility::Power:
    case Utility::Logarithmic: {
      ps = p.utility == Utility::Power ? solve_power(p) : solve_log(p);
      pol = power_policy_fn(ps);
      xi_star = barrier_diagnostics(ps).max_xi;
      if (so.x0 <= p.x_max) extra["solver_expected_utility"] = {ps.j_hat_lo(so.x0), ps.j_hat_hi(so.x0)};
      break;
    }
    case Utility::RiskNeutral: {
      ns = solve_neutral(p);
      std::vector<std::int32_t> act = ns.action;
      int X = p.x_max;
      pol = [act, X](int, int x, double) { return x > X ? x - X + act[static_cast<size_t>(X)] : act[static_cast<size_t>(x)]; };
      for (int x = X; x >= 0; --x)
        if (act[static_cast<size_t>(x)] == 0) {
          xi_star = x;
          break;
        }
      if (so.x0 <= p.x_max) extra["solver_expected_utility"] = ns.value[static_cast<size_t>(so.x0)];
      break;
    }
  }
  r = simulate_paths(p, pol, so);
  double bound = ruin_block_bound(p.dist.ruin_mass(), xi_star, so.max_steps);
  double sigma = std::sqrt(bound * (1.0 - bound) / static_cast<double>(so.n_paths));
  bool ruin_ok = r.ruin_fraction >= bound - 5.0 * sigma;
  json summary = {{"n_paths", r.n_paths},
                  {"mean_utility", r.mean_utility},
                  {"std_err", r.std_err},
                  {"ruin_fraction", r.ruin_fraction},
                  {"mean_ruin_time", r.mean_ruin_time},
                  {"truncated_fraction", r.truncated_fraction},
                  {"x0", so.x0},
                  {"max_steps", so.max_steps},
                  {"seed", so.seed},
                  {"truncation_bound", r.truncation_bound},
                  {"barrier", xi_star},
                  {"ruin_bound", bound},
                  {"ruin_check_pass", ruin_ok}};
  summary.update(extra);
  write_json(path_in(rc, "summary.json"), summary);
  std::cout << "simulated " << r.n_paths << " paths, outputs in " << rc.output_dir << "\n";
  if (!ruin_ok) throw Error(ErrorCode::InvariantViolation, "ruined fraction falls below the block bound");
  return kExitOk;
}

const std::set<std::string> kCommands{"solve-exp", "solve-power", "solve-log", "solve-neutral",
                                      "howard",    "oracle-check", "simulate", "bands"};

int dispatch(const std::string& cmd, const Flags& f) {
  set_thread_count(f.threads);
  RunConfig rc = load_config(f.config);
  ProblemConfig& p = rc.problem;
  auto need = [&](std::initializer_list<Utility> ok) {
    for (Utility u : ok)
      if (p.utility == u) return;
    throw Error(ErrorCode::ValidationError, cmd + " does not apply to utility '" + utility_name(p.utility) + "'");
  };
  ensure_directory(rc.output_dir);
  if (cmd == "solve-exp") return need({Utility::Exponential}), cmd_solve_exp(rc, false);
  if (cmd == "bands") return need({Utility::Exponential}), cmd_solve_exp(rc, true);
  if (cmd == "solve-power") return need({Utility::Power}), cmd_solve_power(rc);
  if (cmd == "solve-log") return need({Utility::Logarithmic}), cmd_solve_power(rc);
  if (cmd == "solve-neutral") return need({Utility::RiskNeutral}), cmd_solve_neutral(rc);
  if (cmd == "howard") return need({Utility::Exponential}), cmd_howard(rc, f);
  if (cmd == "oracle-check") return cmd_oracle_check(rc, f);
  return cmd_simulate(rc, f);
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Risk-sensitive dividend payout solver"};
  app.require_subcommand(1);
  Flags f;
  std::string chosen;
  for (const std::string& name : kCommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", f.config, "YAML problem file")->required();
    sub->add_option("--threads", f.threads, "worker threads (0 = all)")->check(CLI::NonNegativeNumber);
    if (name == "simulate") {
      sub->add_option("--x0", f.x0, "initial surplus");
      sub->add_option("--paths", f.paths, "number of simulated paths")->check(CLI::PositiveNumber);
      sub->add_option("--max-steps", f.max_steps, "truncation horizon")->check(CLI::PositiveNumber);
    }
    if (name == "howard") sub->add_option("--max-iter", f.max_iter, "improvement step cap")->check(CLI::PositiveNumber);
    if (name == "oracle-check")
      sub->add_option("--max-nodes", f.max_nodes, "history-tree node budget")->check(CLI::PositiveNumber);
    sub->callback([&chosen, name] { chosen = name; });
  }
  if (!args.empty() && args[0].rfind("-", 0) != 0 && !kCommands.count(args[0])) {
    std::cerr << error_code_name(ErrorCode::UnknownSubcommand) << ": '" << args[0] << "'\n";
    return kExitValidation;
  }
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitValidation;
  }
  try {
    return dispatch(chosen, f);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return is_invariant_error(e.code()) ? kExitInvariant : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInvariant;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace riskdiv::cli
