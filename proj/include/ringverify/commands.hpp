// Library side of the ring_verify command line: input loading, the four
// subcommands and report rendering.
#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ringverify/encoding.hpp"
#include "ringverify/semantics.hpp"
#include "ringverify/solver.hpp"

namespace ringverify::cli {

/// Bad command line or input that does not satisfy the conventions.
class UsageError : public Error {
 public:
  using Error::Error;
};

enum class Verdict { Safe, Violation, Valid, Invalid, UniqSeq, NotUniqSeq, Unknown };

std::string to_string(Verdict v);
/// 0 holds, 1 refuted, 2 unknown.
int exit_code(Verdict v);

inline constexpr int kExitUsage = 3;
inline constexpr int kExitInternal = 4;

/// Protocol text with an optional `# robots: K` header line.
Protocol parse_protocol(const std::string& text);
Protocol load_protocol(const std::string& path);
/// Reads `arg` as a file when one exists at that path, else parses it.
pb::Formula load_formula(const std::string& arg);

struct SolverFlags {
  std::optional<std::string> command;
  std::int64_t timeout_seconds = 60;
  std::optional<std::string> keep_smt;  // directory or file prefix

  smt::RunOptions run_options(const std::string& tag) const;
};

struct RunReport {
  std::string command;
  std::vector<std::pair<std::string, std::string>> inputs;
  std::size_t k = 0;
  std::optional<Mode> mode;
  Verdict verdict = Verdict::Unknown;
  std::optional<Witness> witness;
  std::optional<View> view;  // validity counterexample
  std::vector<std::string> notes;
  std::vector<std::pair<std::string, double>> timings;
};

nlohmann::json to_json(const RunReport& r);
nlohmann::json to_json(const Witness& w, Mode mode);
std::string render_text(const RunReport& r);

struct VerifyArgs {
  std::string protocol;
  std::string ring;
  std::string bad;
  Mode mode = Mode::Sync;
  std::optional<std::string> goal;
  SolverFlags solver;
};

RunReport cmd_verify(const VerifyArgs& args, const std::string& echo = "verify");

enum class Property { Validity, UniqSeq };
Property parse_property(const std::string& s);

RunReport cmd_check(const std::string& protocol, Property which, const SolverFlags& solver,
                    const std::string& echo = "check");

struct SimulateArgs {
  std::string protocol;
  Configuration start;
  Mode mode = Mode::Sync;
  std::size_t steps = 10;
  bool reach = false;
  std::size_t max_states = kDefaultMaxStates;
};

/// Trace lines, or the sorted Post* listing when `reach` is set.
std::vector<std::string> cmd_simulate(const SimulateArgs& args);

/// One line of the step trace.
std::string trace_line(std::size_t step, Mode mode, const Configuration& c,
                       const std::optional<std::string>& phases = std::nullopt);

struct Discrepancy {
  std::int64_t n = 0;
  std::string from;
  std::string to;
  bool formula = false;
  bool oracle = false;
};

struct CrosscheckResult {
  std::size_t pairs = 0;
  std::optional<Discrepancy> first;
};

/// Evaluates the one-step successor formula on every (state, state) pair for
/// n in [n_min, n_max] and compares with the explicit-state relation.
/// SEMISYNC compares against the relation without the empty scheduling step
/// whenever every robot is forced to move. Throws BudgetExceeded when the
/// number of states at some n exceeds `max_states`.
CrosscheckResult crosscheck_post(const Protocol& phi, Mode mode, std::int64_t n_min, std::int64_t n_max,
                                 const enc::Options& opts = {}, std::size_t max_states = kDefaultMaxStates);

/// Every canonical asynchronous state with k robots on a ring of size n.
std::vector<AsyncState> enumerate_async_states(std::size_t k, std::int64_t n);

struct SolverAgreement {
  std::int64_t n = 0;
  bool solver_violation = false;
  bool oracle_violation = false;
  bool unknown = false;
  std::optional<Witness> witness;
  double seconds = 0;
};

/// Runs the safety query with the ring pinned to y = n and compares its
/// verdict with the one-step explicit search; Sat witnesses are re-validated.
SolverAgreement solver_agreement(const Protocol& phi, const pb::Formula& bad, Mode mode, std::int64_t n,
                                 const smt::RunOptions& run);

struct CrosscheckArgs {
  std::string protocol;
  std::int64_t n_min = 2;
  std::int64_t n_max = 6;
  Mode mode = Mode::Sync;
  std::optional<std::string> bad;
  bool inject_wraparound_fault = false;
  std::size_t max_states = kDefaultMaxStates;
  SolverFlags solver;
};

struct CrosscheckReport {
  CrosscheckResult encoding;
  std::vector<SolverAgreement> solver;
  std::vector<std::string> lines;
  int exit = 0;
};

CrosscheckReport cmd_crosscheck(const CrosscheckArgs& args);

}  // namespace ringverify::cli
