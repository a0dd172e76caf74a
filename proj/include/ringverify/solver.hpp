// SMT-LIB 2 serialization of verification queries, external solver driver,
// model parsing and witness decoding.
#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>

#include "ringverify/encoding.hpp"

namespace ringverify::smt {

class SolverError : public Error {
 public:
  using Error::Error;
};

/// A model that contradicts the concrete semantics: an encoding or parsing bug.
class WitnessError : public Error {
 public:
  using Error::Error;
};

struct Sat {
  std::map<std::string, std::int64_t> model;
};
struct Unsat {};
struct Unknown {
  std::string reason;
};
using SolverOutcome = std::variant<Sat, Unsat, Unknown>;

std::string describe(const SolverOutcome& o);

/// Byte-stable SMT-LIB document: logic, declarations, nonnegativity, body,
/// check-sat and get-value over every free variable.
std::string emit_smt(const enc::VerificationQuery& q);

inline constexpr const char* kDefaultSolverCommand = "z3 -smt2 {file}";
inline constexpr const char* kSolverEnvVar = "RING_VERIFY_SOLVER";

/// Command template from the flag, else RING_VERIFY_SOLVER, else the default.
std::string resolve_solver_command(const std::optional<std::string>& flag);

struct RunOptions {
  std::string command = kDefaultSolverCommand;  // must contain {file}
  std::chrono::seconds timeout{60};
  /// When set, the document is written here and left in place.
  std::optional<std::string> keep_path;
};

/// Writes `doc` to a temporary file, runs the solver and parses its answer.
SolverOutcome run_solver(const std::string& doc, const RunOptions& opts);

/// Parses solver stdout: first status token, then get-value bindings.
SolverOutcome parse_solver_output(const std::string& out);

/// Decodes and re-validates a safety counterexample. Throws WitnessError when
/// the model does not describe a real violation.
std::optional<Witness> extract_witness(const SolverOutcome& outcome, const enc::VerificationQuery& q);

/// A view V with V != rev(V), V |= phi and rev(V) |= phi, re-validated.
std::optional<View> extract_invalid_view(const SolverOutcome& outcome, const enc::VerificationQuery& q);

/// A configuration where two robots both move, with one such pair of
/// successor positions, re-validated.
std::optional<Witness> extract_concurrent_moves(const SolverOutcome& outcome, const enc::VerificationQuery& q);

}  // namespace ringverify::smt
