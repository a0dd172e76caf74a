// ring_verify: safety, well-formedness and simulation for oblivious robot
// protocols on rings.
#include <CLI11.hpp>

#include <iostream>

#include "ringverify/commands.hpp"

using namespace ringverify;

namespace {

struct SolverCli {
  std::string command;
  std::int64_t timeout = 60;
  bool keep = false;
  std::string dir = ".";

  void attach(CLI::App* app) {
    app->add_option("--solver-cmd", command, "solver command template containing {file}");
    app->add_option("--timeout", timeout, "solver timeout in seconds")->check(CLI::PositiveNumber);
    app->add_flag("--keep-smt", keep, "keep the generated SMT-LIB files");
    app->add_option("--smt-dir", dir, "directory for kept SMT-LIB files");
  }

  cli::SolverFlags flags() const {
    cli::SolverFlags f;
    if (!command.empty()) f.command = command;
    f.timeout_seconds = timeout;
    if (keep) f.keep_smt = dir;
    return f;
  }
};

Mode mode_option(const std::string& s) {
  try {
    return parse_mode(s);
  } catch (const Error& e) {
    throw cli::UsageError(e.what());
  }
}

int emit(const cli::RunReport& r, bool json) {
  if (json) {
    std::cout << cli::to_json(r).dump(2) << "\n";
  } else {
    std::cout << cli::render_text(r);
  }
  return cli::exit_code(r.verdict);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parameterized verification of oblivious robot protocols on rings"};
  app.require_subcommand(1);

  std::string echo;
  for (int i = 0; i < argc; ++i) echo += (i ? " " : "") + std::string(argv[i]);

  std::string protocol, ring, bad, mode = "sync", goal;
  bool json = false;
  std::size_t max_states = kDefaultMaxStates;
  SolverCli solver;

  auto* verify = app.add_subcommand("verify", "decide safety for every accepted ring size");
  verify->add_option("--protocol", protocol, "protocol file")->required();
  verify->add_option("--ring", ring, "ring formula over y (file or expression)")->required();
  verify->add_option("--bad", bad, "bad configurations over x1..xk (file or expression)")->required();
  verify->add_option("--mode", mode, "sync, semisync or async");
  verify->add_option("--goal", goal, "goal formula (rejected: reachability is undecidable)");
  verify->add_flag("--json", json, "machine-readable report");
  verify->add_option("--max-states", max_states, "explicit-state budget");
  solver.attach(verify);

  std::string property;
  auto* check = app.add_subcommand("check", "check well-formedness (validity) or unique sequentializability");
  check->add_option("property", property, "validity or uniqseq")->required();
  check->add_option("--protocol", protocol, "protocol file")->required();
  check->add_flag("--json", json, "machine-readable report");
  solver.attach(check);

  std::string start;
  std::int64_t n = 0;
  std::vector<std::int64_t> positions;
  std::size_t steps = 10;
  bool reach = false;
  auto* simulate = app.add_subcommand("simulate", "run the explicit-state semantics");
  simulate->add_option("--protocol", protocol, "protocol file")->required();
  simulate->add_option("--start", start, "start configuration, e.g. \"n=5; p=0,1\"");
  simulate->add_option("--n", n, "ring size");
  simulate->add_option("--positions", positions, "robot positions")->delimiter(',');
  simulate->add_option("--mode", mode, "sync, semisync or async");
  simulate->add_option("--steps", steps, "trace length");
  simulate->add_flag("--reach", reach, "print every reachable configuration");
  simulate->add_option("--max-states", max_states, "explicit-state budget");

  std::int64_t n_min = 2, n_max = 6;
  std::string fault;
  auto* crosscheck = app.add_subcommand("crosscheck", "compare the successor encoding with the explicit semantics");
  crosscheck->add_option("--protocol", protocol, "protocol file")->required();
  crosscheck->add_option("--n-min", n_min, "smallest ring size");
  crosscheck->add_option("--n-max", n_max, "largest ring size");
  crosscheck->add_option("--mode", mode, "sync, semisync or async");
  crosscheck->add_option("--bad", bad, "also compare solver verdicts for this bad formula");
  crosscheck->add_option("--max-states", max_states, "explicit-state budget per ring size");
  crosscheck->add_option("--inject-fault", fault)->group("");
  solver.attach(crosscheck);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitUsage;
  }

  try {
    if (*verify) {
      cli::VerifyArgs a{protocol, ring, bad, mode_option(mode), std::nullopt, solver.flags()};
      if (verify->count("--goal")) a.goal = goal;
      return emit(cli::cmd_verify(a, echo), json);
    }
    if (*check) return emit(cli::cmd_check(protocol, cli::parse_property(property), solver.flags(), echo), json);
    if (*simulate) {
      cli::SimulateArgs a;
      a.protocol = protocol;
      if (!start.empty()) {
        a.start = parse_configuration(start);
      } else if (n > 0 && !positions.empty()) {
        a.start = Configuration{n, positions};
      } else {
        throw cli::UsageError("simulate needs --start or both --n and --positions");
      }
      a.mode = mode_option(mode);
      a.steps = steps;
      a.reach = reach;
      a.max_states = max_states;
      for (auto& line : cli::cmd_simulate(a)) std::cout << line << "\n";
      return 0;
    }
    if (*crosscheck) {
      cli::CrosscheckArgs a;
      a.protocol = protocol;
      a.n_min = n_min;
      a.n_max = n_max;
      a.mode = mode_option(mode);
      if (!bad.empty()) a.bad = bad;
      if (!fault.empty()) {
        if (fault != "wraparound") throw cli::UsageError("unknown fault '" + fault + "'");
        a.inject_wraparound_fault = true;
      }
      a.max_states = max_states;
      a.solver = solver.flags();
      auto r = cli::cmd_crosscheck(a);
      for (auto& line : r.lines) std::cout << line << "\n";
      return r.exit;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return cli::kExitUsage;
  } catch (const cli::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitUsage;
  } catch (const smt::WitnessError& e) {
    std::cerr << "internal error: solver model failed re-validation: " << e.what() << "\n";
    return cli::kExitInternal;
  } catch (const smt::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return cli::kExitInternal;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return cli::kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitUsage;
  }
  return cli::kExitUsage;
}
