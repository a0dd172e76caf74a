#include "ringverify/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "ringverify/evaluator.hpp"

namespace ringverify::cli {

using Clock = std::chrono::steady_clock;

namespace {

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Safe: return "SAFE";
    case Verdict::Violation: return "VIOLATION";
    case Verdict::Valid: return "VALID";
    case Verdict::Invalid: return "INVALID";
    case Verdict::UniqSeq: return "UNIQSEQ";
    case Verdict::NotUniqSeq: return "NOT-UNIQSEQ";
    case Verdict::Unknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::Safe:
    case Verdict::Valid:
    case Verdict::UniqSeq: return 0;
    case Verdict::Violation:
    case Verdict::Invalid:
    case Verdict::NotUniqSeq: return 1;
    case Verdict::Unknown: return 2;
  }
  return 2;
}

Protocol parse_protocol(const std::string& text) {
  static const std::regex header(R"(^\s*#\s*robots\s*:\s*(\d+)\s*$)");
  std::optional<std::size_t> declared;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    std::smatch m;
    if (std::regex_match(line, m, header)) declared = std::stoul(m[1]);
  }
  return Protocol::from_formula(pb::parse_formula(text), declared);
}

Protocol load_protocol(const std::string& path) { return parse_protocol(read_file(path)); }

pb::Formula load_formula(const std::string& arg) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(arg, ec)) return pb::parse_formula(read_file(arg));
  return pb::parse_formula(arg);
}

smt::RunOptions SolverFlags::run_options(const std::string& tag) const {
  smt::RunOptions o;
  o.command = smt::resolve_solver_command(command);
  if (timeout_seconds <= 0) throw UsageError("timeout must be positive");
  o.timeout = std::chrono::seconds(timeout_seconds);
  if (keep_smt) o.keep_path = (std::filesystem::path(*keep_smt) / ("ring_verify-" + tag + ".smt2")).string();
  return o;
}

nlohmann::json to_json(const Witness& w, Mode mode) {
  return {{"n", w.n}, {"start", w.start.positions}, {"successor", w.successor.positions}, {"mode", to_string(mode)}};
}

nlohmann::json to_json(const RunReport& r) {
  nlohmann::json j;
  j["command"] = r.command;
  nlohmann::json inputs = nlohmann::json::object();
  for (auto& [key, value] : r.inputs) inputs[key] = value;
  inputs["k"] = r.k;
  j["inputs"] = inputs;
  if (r.mode) j["mode"] = to_string(*r.mode);
  j["verdict"] = to_string(r.verdict);
  j["witness"] = r.witness ? to_json(*r.witness, r.mode.value_or(Mode::Sync)) : nlohmann::json(nullptr);
  if (r.view) j["view"] = r.view->distances;
  j["notes"] = r.notes;
  nlohmann::json t = nlohmann::json::object();
  for (auto& [phase, secs] : r.timings) t[phase] = secs;
  j["timings"] = t;
  return j;
}

std::string render_text(const RunReport& r) {
  std::ostringstream out;
  out << "verdict: " << to_string(r.verdict) << "\n";
  for (auto& [key, value] : r.inputs) out << key << ": " << value << "\n";
  out << "robots: " << r.k << "\n";
  if (r.mode) out << "mode: " << to_string(*r.mode) << "\n";
  if (r.witness) {
    out << "start: " << to_string(r.witness->start) << "\n";
    out << "successor: " << to_string(r.witness->successor) << "\n";
  }
  if (r.view) out << "view: " << to_string(*r.view) << " reverted: " << to_string(revert(*r.view)) << "\n";
  for (auto& note : r.notes) out << "note: " << note << "\n";
  out << "timings:";
  for (auto& [phase, secs] : r.timings) out << " " << phase << "=" << secs << "s";
  out << "\n";
  return out.str();
}

namespace {

// Satisfiability of `q`, or nullopt when the solver gives up.
std::optional<bool> solve_query(const enc::VerificationQuery& q, const SolverFlags& flags, RunReport& report,
                                smt::SolverOutcome& outcome) {
  auto t0 = Clock::now();
  auto doc = smt::emit_smt(q);
  report.timings.emplace_back(enc::to_string(q.purpose) + "-emit", since(t0));
  t0 = Clock::now();
  outcome = smt::run_solver(doc, flags.run_options(enc::to_string(q.purpose)));
  report.timings.emplace_back(enc::to_string(q.purpose) + "-solve", since(t0));
  if (auto* u = std::get_if<smt::Unknown>(&outcome)) {
    report.notes.push_back("solver answered unknown (" + u->reason +
                           "); the explicit-state commands (simulate, crosscheck) decide fixed ring sizes");
    return std::nullopt;
  }
  return std::holds_alternative<smt::Sat>(outcome);
}

}  // namespace

RunReport cmd_verify(const VerifyArgs& args, const std::string& echo) {
  RunReport report;
  report.command = echo;
  report.mode = args.mode;
  auto t0 = Clock::now();
  if (args.goal) {
    load_formula(*args.goal);
    throw UsageError("reachability of a goal is undecidable in every scheduling mode; only safety can be verified");
  }
  Protocol phi = load_protocol(args.protocol);
  auto ring = load_formula(args.ring);
  auto bad = load_formula(args.bad);
  try {
    enc::check_conventions(phi.robots(), ring, bad);
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  report.k = phi.robots();
  report.inputs = {{"protocol", args.protocol}, {"ring", args.ring}, {"bad", args.bad}};
  report.timings.emplace_back("parse", since(t0));

  if (auto v = protocol_valid_bounded(phi, static_cast<std::int64_t>(phi.robots()) + 6))
    report.notes.push_back("protocol is not well-formed: both " + to_string(*v) + " and its reversal satisfy it");

  Mode query_mode = args.mode;
  if (args.mode == Mode::Async) {
    t0 = Clock::now();
    auto q = enc::uniqseq_query(phi);
    report.timings.emplace_back("uniqseq-encode", since(t0));
    smt::SolverOutcome outcome;
    auto sat = solve_query(q, args.solver, report, outcome);
    if (sat != false) {
      std::string why = !sat ? "could not be established" : "does not hold (two robots can move at once)";
      throw UsageError("asynchronous safety is undecidable in general; it is only checked for uniquely "
                       "sequentializable protocols, and that property " + why);
    }
    report.notes.push_back("protocol is uniquely sequentializable; asynchronous safety reduces to synchronous safety");
    query_mode = Mode::Sync;
  }

  t0 = Clock::now();
  auto q = enc::safety_query(phi, ring, bad, query_mode);
  report.timings.emplace_back("encode", since(t0));
  smt::SolverOutcome outcome;
  auto sat = solve_query(q, args.solver, report, outcome);
  if (!sat) {
    report.verdict = Verdict::Unknown;
    return report;
  }
  if (!*sat) {
    report.verdict = Verdict::Safe;
    return report;
  }
  t0 = Clock::now();
  report.witness = smt::extract_witness(outcome, q);
  report.timings.emplace_back("validate", since(t0));
  report.verdict = Verdict::Violation;
  return report;
}

Property parse_property(const std::string& s) {
  if (s == "validity") return Property::Validity;
  if (s == "uniqseq") return Property::UniqSeq;
  throw UsageError("unknown property '" + s + "' (expected validity or uniqseq)");
}

RunReport cmd_check(const std::string& protocol, Property which, const SolverFlags& solver, const std::string& echo) {
  RunReport report;
  report.command = echo;
  auto t0 = Clock::now();
  Protocol phi = load_protocol(protocol);
  report.k = phi.robots();
  report.inputs = {{"protocol", protocol}, {"property", which == Property::Validity ? "validity" : "uniqseq"}};
  report.timings.emplace_back("parse", since(t0));
  t0 = Clock::now();
  auto q = which == Property::Validity ? enc::validity_query(phi) : enc::uniqseq_query(phi);
  report.timings.emplace_back("encode", since(t0));
  smt::SolverOutcome outcome;
  auto sat = solve_query(q, solver, report, outcome);
  if (!sat) {
    report.verdict = Verdict::Unknown;
    return report;
  }
  t0 = Clock::now();
  if (which == Property::Validity) {
    report.verdict = *sat ? Verdict::Invalid : Verdict::Valid;
    if (*sat) report.view = smt::extract_invalid_view(outcome, q);
  } else {
    report.verdict = *sat ? Verdict::NotUniqSeq : Verdict::UniqSeq;
    if (*sat) {
      report.witness = smt::extract_concurrent_moves(outcome, q);
      report.mode = Mode::SemiSync;
    }
  }
  report.timings.emplace_back("validate", since(t0));
  return report;
}

std::string trace_line(std::size_t step, Mode mode, const Configuration& c, const std::optional<std::string>& phases) {
  std::string s = "step=" + std::to_string(step) + " mode=" + to_string(mode) + " p=" + join(c.positions);
  if (phases) s += " phases=" + *phases;
  return s;
}

std::vector<std::string> cmd_simulate(const SimulateArgs& args) {
  Protocol phi = load_protocol(args.protocol);
  const auto& c = args.start;
  c.validate();
  if (c.robots() != phi.robots())
    throw UsageError("protocol has " + std::to_string(phi.robots()) + " robots, start configuration has " +
                     std::to_string(c.robots()));
  std::vector<std::string> out;
  if (args.reach) {
    for (auto& x : post_star(phi, c, args.mode, args.max_states)) out.push_back(to_string(x));
    return out;
  }
  if (args.mode == Mode::Async) {
    AsyncState s = AsyncState::initial(c);
    out.push_back(trace_line(0, args.mode, s.config, s.phase_string()));
    for (std::size_t step = 1; step <= args.steps; ++step) {
      auto next = post_async(phi, s);
      auto it = std::find_if(next.begin(), next.end(), [&](const AsyncState& t) { return t != s; });
      if (it == next.end()) break;
      s = *it;
      out.push_back(trace_line(step, args.mode, s.config, s.phase_string()));
    }
    return out;
  }
  Configuration cur = c;
  out.push_back(trace_line(0, args.mode, cur));
  for (std::size_t step = 1; step <= args.steps; ++step) {
    auto next = post(phi, cur, args.mode);
    auto it = std::find_if(next.begin(), next.end(), [&](const Configuration& t) { return t != cur; });
    if (it == next.end()) {
      out.push_back("# fixed point");
      break;
    }
    cur = *it;
    out.push_back(trace_line(step, args.mode, cur));
  }
  return out;
}

std::vector<AsyncState> enumerate_async_states(std::size_t k, std::int64_t n) {
  auto views = enumerate_views(k, n);
  std::vector<AsyncState> out;
  for (auto& c : enumerate_configurations(k, n)) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
      AsyncState base = AsyncState::initial(c);
      std::vector<std::size_t> movers;
      for (std::size_t i = 0; i < k; ++i) {
        if (mask >> i & 1) {
          base.phases[i] = Phase::Move;
          movers.push_back(i);
        }
      }
      // every assignment of stored views to the MOVE-phase robots
      std::vector<std::size_t> pick(movers.size(), 0);
      for (;;) {
        AsyncState s = base;
        for (std::size_t m = 0; m < movers.size(); ++m) s.stored[movers[m]] = views[pick[m]];
        out.push_back(std::move(s));
        std::size_t m = 0;
        while (m < pick.size() && ++pick[m] == views.size()) pick[m++] = 0;
        if (m == pick.size()) break;
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Maps evaluator slots to the pieces of a (state, state) pair.
enum class Source { Ring, Pos, NextPos, Phase, NextPhase, Stored, NextStored };

struct SlotSource {
  Source source;
  std::size_t robot = 0;
  std::size_t index = 0;
};

std::vector<SlotSource> slot_sources(const pb::Evaluator& ev, std::size_t k) {
  std::map<std::string, SlotSource> known{{enc::ring_var(), {Source::Ring}}};
  for (std::size_t i = 1; i <= k; ++i) {
    known[enc::position_var(i)] = {Source::Pos, i - 1};
    known[enc::next_position_var(i)] = {Source::NextPos, i - 1};
    known[enc::phase_var(i)] = {Source::Phase, i - 1};
    known[enc::phase_var(i, true)] = {Source::NextPhase, i - 1};
    for (std::size_t l = 1; l <= k; ++l) {
      known[enc::stored_view_var(i, l)] = {Source::Stored, i - 1, l - 1};
      known[enc::stored_view_var(i, l, true)] = {Source::NextStored, i - 1, l - 1};
    }
  }
  std::vector<SlotSource> out;
  for (auto& name : ev.free_variables()) {
    auto it = known.find(name);
    if (it == known.end()) throw Error("unexpected free variable '" + name + "' in successor formula");
    out.push_back(it->second);
  }
  return out;
}

std::string describe(const AsyncState& s) {
  std::string out = to_string(s.config) + "; phases=" + s.phase_string() + "; views=";
  for (std::size_t i = 0; i < s.stored.size(); ++i) out += (i ? "," : "") + to_string(s.stored[i]);
  return out;
}

CrosscheckResult crosscheck_async(const Protocol& phi, std::int64_t n_min, std::int64_t n_max,
                                  const enc::Options& opts, std::size_t max_states) {
  const auto k = phi.robots();
  pb::Evaluator ev(enc::async_post_formula(phi, opts));
  auto sources = slot_sources(ev, k);
  std::vector<std::int64_t> values(sources.size());
  CrosscheckResult result;
  for (std::int64_t n = n_min; n <= n_max; ++n) {
    auto states = enumerate_async_states(k, n);
    if (states.size() > max_states)
      throw BudgetExceeded(std::to_string(states.size()) + " asynchronous states at n=" + std::to_string(n) +
                           " exceed the budget of " + std::to_string(max_states));
    for (auto& s : states) {
      auto succ = post_async(phi, s);
      for (auto& t : states) {
        for (std::size_t slot = 0; slot < sources.size(); ++slot) {
          auto& src = sources[slot];
          switch (src.source) {
            case Source::Ring: values[slot] = n; break;
            case Source::Pos: values[slot] = s.config.positions[src.robot]; break;
            case Source::NextPos: values[slot] = t.config.positions[src.robot]; break;
            case Source::Phase: values[slot] = static_cast<int>(s.phases[src.robot]); break;
            case Source::NextPhase: values[slot] = static_cast<int>(t.phases[src.robot]); break;
            case Source::Stored: values[slot] = s.stored[src.robot].distances[src.index]; break;
            case Source::NextStored: values[slot] = t.stored[src.robot].distances[src.index]; break;
          }
        }
        bool formula = ev(values, n);
        bool oracle = std::binary_search(succ.begin(), succ.end(), t);
        ++result.pairs;
        if (formula != oracle) {
          result.first = Discrepancy{n, describe(s), describe(t), formula, oracle};
          return result;
        }
      }
    }
  }
  return result;
}

}  // namespace

CrosscheckResult crosscheck_post(const Protocol& phi, Mode mode, std::int64_t n_min, std::int64_t n_max,
                                 const enc::Options& opts, std::size_t max_states) {
  const auto k = phi.robots();
  n_min = std::max<std::int64_t>(n_min, static_cast<std::int64_t>(k));
  if (mode == Mode::Async) return crosscheck_async(phi, n_min, n_max, opts, max_states);
  pb::Evaluator ev(enc::post_formula(phi, mode, opts));
  ev.set_memoize(true);
  auto sources = slot_sources(ev, k);
  std::vector<std::int64_t> values(sources.size());
  CrosscheckResult result;
  for (std::int64_t n = n_min; n <= n_max; ++n) {
    auto configs = enumerate_configurations(k, n);
    if (configs.size() > max_states)
      throw BudgetExceeded(std::to_string(configs.size()) + " configurations at n=" + std::to_string(n) +
                           " exceed the budget of " + std::to_string(max_states));
    for (auto& c : configs) {
      auto succ = post(phi, c, mode);
      bool someone_stays = false;
      for (std::size_t i = 0; i < k; ++i)
        if (move_set(phi, view_clockwise(c, i)) == MoveSet{0}) someone_stays = true;
      for (auto& d : configs) {
        for (std::size_t slot = 0; slot < sources.size(); ++slot) {
          auto& src = sources[slot];
          values[slot] = src.source == Source::Ring  ? n
                         : src.source == Source::Pos ? c.positions[src.robot]
                                                     : d.positions[src.robot];
        }
        bool formula = ev(values, n);
        bool oracle = std::binary_search(succ.begin(), succ.end(), d);
        // the formula needs a nonempty scheduled set; the relation allows the empty one
        if (mode == Mode::SemiSync && d == c && !someone_stays) oracle = false;
        ++result.pairs;
        if (formula != oracle) {
          result.first = Discrepancy{n, to_string(c), to_string(d), formula, oracle};
          return result;
        }
      }
    }
  }
  return result;
}

SolverAgreement solver_agreement(const Protocol& phi, const pb::Formula& bad, Mode mode, std::int64_t n,
                                 const smt::RunOptions& run) {
  SolverAgreement a;
  a.n = n;
  auto ring = pb::eq(pb::var(enc::ring_var()), pb::constant(n));
  ReachabilityOptions ro;
  ro.one_step = true;
  a.oracle_violation = reachable_bad_bounded(phi, ring, bad, mode, n, n, ro).has_value();
  auto q = enc::safety_query(phi, ring, bad, mode);
  auto t0 = Clock::now();
  auto outcome = smt::run_solver(smt::emit_smt(q), run);
  a.seconds = since(t0);
  if (std::holds_alternative<smt::Unknown>(outcome)) {
    a.unknown = true;
    return a;
  }
  a.witness = smt::extract_witness(outcome, q);
  a.solver_violation = a.witness.has_value();
  return a;
}

CrosscheckReport cmd_crosscheck(const CrosscheckArgs& args) {
  Protocol phi = load_protocol(args.protocol);
  if (args.n_max < args.n_min) throw UsageError("empty ring-size range");
  enc::Options opts;
  if (args.inject_wraparound_fault) opts.fault = enc::Fault::WraparoundOffByOne;
  CrosscheckReport report;
  const auto lo = std::max<std::int64_t>(args.n_min, static_cast<std::int64_t>(phi.robots()));
  report.encoding = crosscheck_post(phi, args.mode, lo, args.n_max, opts, args.max_states);
  std::string range = "n=" + std::to_string(lo) + ".." + std::to_string(args.n_max);
  if (auto& d = report.encoding.first) {
    report.lines.push_back("discrepancy " + to_string(args.mode) + " at n=" + std::to_string(d->n) + ": " + d->from +
                           " -> " + d->to + " formula=" + (d->formula ? "true" : "false") +
                           " oracle=" + (d->oracle ? "true" : "false"));
    report.exit = 1;
    return report;
  }
  report.lines.push_back("agreement " + to_string(args.mode) + " " + range + ": " +
                         std::to_string(report.encoding.pairs) + " pairs");
  if (!args.bad) return report;

  if (args.mode == Mode::Async) throw UsageError("solver agreement is only available for sync and semisync");
  auto bad = load_formula(args.bad.value());
  enc::check_conventions(phi.robots(), pb::truth(), bad);
  bool unknown = false;
  for (std::int64_t n = lo; n <= args.n_max; ++n) {
    auto a = solver_agreement(phi, bad, args.mode, n, args.solver.run_options("crosscheck-n" + std::to_string(n)));
    std::string solver = a.unknown ? "UNKNOWN" : a.solver_violation ? "VIOLATION" : "SAFE";
    std::string oracle = a.oracle_violation ? "VIOLATION" : "SAFE";
    report.lines.push_back("n=" + std::to_string(n) + " solver=" + solver + " oracle=" + oracle);
    if (a.unknown) {
      unknown = true;
    } else if (a.solver_violation != a.oracle_violation) {
      report.exit = 1;
    }
    report.solver.push_back(std::move(a));
  }
  if (report.exit == 0 && unknown) report.exit = 2;
  return report;
}

}  // namespace ringverify::cli
