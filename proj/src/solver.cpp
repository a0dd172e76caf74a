#include "ringverify/solver.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ringverify::smt {

std::string describe(const SolverOutcome& o) {
  if (std::holds_alternative<Sat>(o)) return "sat";
  if (std::holds_alternative<Unsat>(o)) return "unsat";
  return "unknown (" + std::get<Unknown>(o).reason + ")";
}

std::string emit_smt(const enc::VerificationQuery& q) {
  std::ostringstream os;
  os << "; ringverify " << enc::to_string(q.purpose) << " query, k=" << q.k << "\n";
  os << "(set-option :produce-models true)\n";
  os << "(set-logic LIA)\n";
  for (auto& v : q.variables) os << "(declare-fun " << v << " () Int)\n";
  for (auto& v : q.variables) os << "(assert (>= " << v << " 0))\n";
  os << "(assert " << pb::to_smtlib(q.body) << ")\n";
  os << "(check-sat)\n";
  os << "(get-value (";
  for (std::size_t i = 0; i < q.variables.size(); ++i) os << (i ? " " : "") << q.variables[i];
  os << "))\n";
  os << "(exit)\n";
  return os.str();
}

std::string resolve_solver_command(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv(kSolverEnvVar); env && *env) return env;
  return kDefaultSolverCommand;
}

// ---------------------------------------------------------------------------
// Output parsing

namespace {

struct SExpr {
  std::string atom;
  std::vector<SExpr> list;
  bool is_list = false;
};

class SExprReader {
 public:
  explicit SExprReader(std::string_view s) : s_(s) {}

  bool at_end() {
    skip();
    return pos_ >= s_.size();
  }

  SExpr read() {
    skip();
    if (pos_ >= s_.size()) throw SolverError("malformed model: unexpected end of solver output");
    SExpr e;
    if (s_[pos_] == '(') {
      ++pos_;
      e.is_list = true;
      for (;;) {
        skip();
        if (pos_ >= s_.size()) throw SolverError("malformed model: unbalanced parentheses");
        if (s_[pos_] == ')') {
          ++pos_;
          break;
        }
        e.list.push_back(read());
      }
      return e;
    }
    if (s_[pos_] == ')') throw SolverError("malformed model: unexpected ')'");
    std::size_t start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '(' &&
           s_[pos_] != ')')
      ++pos_;
    e.atom = std::string(s_.substr(start, pos_ - start));
    return e;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  std::string_view s_;
  std::size_t pos_ = 0;
};

std::int64_t parse_int_atom(const std::string& a) {
  if (a.empty() || !std::all_of(a.begin(), a.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    throw SolverError("malformed model: expected integer literal, got '" + a + "'");
  try {
    return std::stoll(a);
  } catch (const std::exception&) {
    throw SolverError("malformed model: integer literal out of range '" + a + "'");
  }
}

std::int64_t parse_value(const SExpr& e) {
  if (!e.is_list) return parse_int_atom(e.atom);
  if (e.list.size() == 2 && !e.list[0].is_list && e.list[0].atom == "-") return -parse_value(e.list[1]);
  throw SolverError("malformed model: unsupported value expression");
}

}  // namespace

SolverOutcome parse_solver_output(const std::string& out) {
  std::istringstream is(out);
  std::string line;
  std::size_t consumed = 0;
  std::optional<std::string> status;
  while (std::getline(is, line)) {
    consumed += line.size() + 1;
    auto b = line.find_first_not_of(" \t\r");
    auto e = line.find_last_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto tok = line.substr(b, e - b + 1);
    if (tok == "sat" || tok == "unsat" || tok == "unknown") {
      status = tok;
      break;
    }
  }
  if (!status) throw SolverError("solver output has no sat/unsat/unknown status:\n" + out);
  if (*status == "unsat") return Unsat{};
  if (*status == "unknown") return Unknown{"solver returned unknown"};

  Sat sat;
  std::string rest = consumed < out.size() ? out.substr(consumed) : std::string();
  SExprReader reader(rest);
  if (reader.at_end()) return sat;
  SExpr bindings = reader.read();
  if (!bindings.is_list) throw SolverError("malformed model: expected get-value binding list");
  for (auto& b : bindings.list) {
    if (!b.is_list || b.list.size() != 2 || b.list[0].is_list)
      throw SolverError("malformed model: expected (name value) pair");
    sat.model[b.list[0].atom] = parse_value(b.list[1]);
  }
  return sat;
}

// ---------------------------------------------------------------------------
// Process driver

namespace {

struct ProcessResult {
  std::string output;
  int exit_code = -1;
  bool timed_out = false;
};

ProcessResult run_shell(const std::string& command, std::chrono::seconds timeout) {
  int fds[2];
  if (pipe(fds) != 0) throw SolverError(std::string("pipe failed: ") + std::strerror(errno));
  pid_t pid = fork();
  if (pid < 0) throw SolverError(std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    setpgid(0, 0);
    dup2(fds[1], STDOUT_FILENO);
    dup2(fds[1], STDERR_FILENO);
    close(fds[0]);
    close(fds[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(fds[1]);
  ProcessResult r;
  auto deadline = std::chrono::steady_clock::now() + timeout;
  char buf[4096];
  for (;;) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      r.timed_out = true;
      break;
    }
    pollfd p{fds[0], POLLIN, 0};
    int rc = poll(&p, 1, static_cast<int>(std::min<long long>(left.count(), 1000)));
    if (rc < 0 && errno != EINTR) break;
    if (rc <= 0) continue;
    ssize_t n = read(fds[0], buf, sizeof buf);
    if (n <= 0) break;
    r.output.append(buf, static_cast<std::size_t>(n));
  }
  close(fds[0]);
  if (r.timed_out) kill(-pid, SIGKILL);
  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  return r;
}

class TempFile {
 public:
  TempFile() {
    auto tmpl = (std::filesystem::temp_directory_path() / "ringverify-XXXXXX.smt2").string();
    int fd = mkstemps(tmpl.data(), 5);
    if (fd < 0) throw SolverError(std::string("cannot create temporary file: ") + std::strerror(errno));
    close(fd);
    path_ = tmpl;
  }
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace

SolverOutcome run_solver(const std::string& doc, const RunOptions& opts) {
  auto at = opts.command.find("{file}");
  if (at == std::string::npos) throw SolverError("solver command template lacks a {file} placeholder");

  std::optional<TempFile> temp;
  std::string path;
  if (opts.keep_path) {
    path = *opts.keep_path;
  } else {
    temp.emplace();
    path = temp->path();
  }
  {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw SolverError("cannot write SMT document to " + path);
    f << doc;
  }
  std::string command = opts.command;
  command.replace(at, 6, "'" + path + "'");

  auto r = run_shell(command, opts.timeout);
  if (r.timed_out) return Unknown{"timeout"};
  if (r.exit_code == 127) throw SolverError("solver executable not found (command: " + command + ")");
  try {
    return parse_solver_output(r.output);
  } catch (const SolverError& e) {
    if (r.exit_code != 0)
      throw SolverError("solver exited with status " + std::to_string(r.exit_code) + ": " + r.output);
    throw;
  }
}

// ---------------------------------------------------------------------------
// Witness decoding

namespace {

std::int64_t lookup(const std::map<std::string, std::int64_t>& model, const std::string& name) {
  auto it = model.find(name);
  if (it == model.end()) throw WitnessError("model lacks a value for '" + name + "'");
  return it->second;
}

Configuration read_positions(const Sat& sat, const enc::VerificationQuery& q, bool primed) {
  Configuration c;
  c.n = lookup(sat.model, enc::ring_var());
  if (c.n < static_cast<std::int64_t>(q.k)) throw WitnessError("model ring size is smaller than the robot count");
  for (std::size_t i = 1; i <= q.k; ++i) {
    auto v = lookup(sat.model, primed ? enc::next_position_var(i) : enc::position_var(i));
    if (v < 0 || v >= c.n)
      throw WitnessError("model position " + std::to_string(v) + " outside the ring of size " + std::to_string(c.n));
    c.positions.push_back(v);
  }
  return c;
}

void require_purpose(const enc::VerificationQuery& q, enc::Purpose p) {
  if (q.purpose != p) throw Error("query purpose is " + enc::to_string(q.purpose) + ", expected " + enc::to_string(p));
  if (!q.protocol) throw Error("query carries no protocol");
}

}  // namespace

std::optional<Witness> extract_witness(const SolverOutcome& outcome, const enc::VerificationQuery& q) {
  require_purpose(q, enc::Purpose::Safety);
  const auto* sat = std::get_if<Sat>(&outcome);
  if (!sat) return std::nullopt;
  Witness w{0, read_positions(*sat, q, false), read_positions(*sat, q, true)};
  w.n = w.start.n;
  if (!ring_accepts(q.ring, w.n)) throw WitnessError("model ring size " + std::to_string(w.n) + " violates Ring");
  if (holds_on(q.bad, w.start)) throw WitnessError("model start configuration " + to_string(w.start) + " is already bad");
  if (!holds_on(q.bad, w.successor)) throw WitnessError("model successor " + to_string(w.successor) + " is not bad");
  auto succ = post(*q.protocol, w.start, q.mode);
  if (!std::binary_search(succ.begin(), succ.end(), w.successor))
    throw WitnessError("model successor " + to_string(w.successor) + " is not a " + to_string(q.mode) +
                       " successor of " + to_string(w.start));
  return w;
}

std::optional<View> extract_invalid_view(const SolverOutcome& outcome, const enc::VerificationQuery& q) {
  require_purpose(q, enc::Purpose::Validity);
  const auto* sat = std::get_if<Sat>(&outcome);
  if (!sat) return std::nullopt;
  View v;
  for (std::size_t l = 1; l <= q.k; ++l) v.distances.push_back(lookup(sat->model, enc::view_var(l)));
  try {
    v.validate();
  } catch (const Error& e) {
    throw WitnessError(std::string("model is not a view: ") + e.what());
  }
  if (v.ring_size() != lookup(sat->model, enc::ring_var())) throw WitnessError("model view does not sum to y");
  View r = revert(v);
  if (r == v || !q.protocol->holds(v) || !q.protocol->holds(r))
    throw WitnessError("model view " + to_string(v) + " does not violate protocol well-formedness");
  return v;
}

std::optional<Witness> extract_concurrent_moves(const SolverOutcome& outcome, const enc::VerificationQuery& q) {
  require_purpose(q, enc::Purpose::UniqSeq);
  const auto* sat = std::get_if<Sat>(&outcome);
  if (!sat) return std::nullopt;
  Configuration start = read_positions(*sat, q, false);
  Configuration target = read_positions(*sat, q, true);
  Configuration succ = start;
  std::size_t movers = 0;
  for (std::size_t i = 0; i < q.k; ++i) {
    auto moves = move_set(*q.protocol, view_clockwise(start, i));
    bool reached = std::any_of(moves.begin(), moves.end(), [&](int m) {
      return m != 0 && ring_mod(start.positions[i] + m, start.n) == target.positions[i];
    });
    if (reached) {
      succ.positions[i] = target.positions[i];
      ++movers;
    }
  }
  if (movers < 2) throw WitnessError("model configuration " + to_string(start) + " does not have two moving robots");
  return Witness{start.n, start, succ};
}

}  // namespace ringverify::smt
