// SPDX-License-Identifier: Apache-2.0
#include "ldbsm/smtbridge.hpp"

#include "ldbsm/error.hpp"
#include "ldbsm/random.hpp"

#include <chrono>
#include <csignal>
#include <fstream>
#include <sstream>
#include <thread>

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace ldbsm {

// ---------------------------------------------------------------------------
// Emission

namespace {

bool simple_symbol(const std::string& s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '\'')) return false;
  return true;
}

std::string smt_symbol(Symbol s) {
  const auto& name = symbol_name(s);
  return simple_symbol(name) ? name : "|" + name + "|";
}

std::string smt_integer(const Integer& z) { return z.get_str() + ".0"; }

} // namespace

std::string smt_literal(const Rational& r) {
  Integer num = abs(r.get_num());
  std::string mag = r.get_den() == 1 ? smt_integer(num) : "(/ " + smt_integer(num) + " " + smt_integer(r.get_den()) + ")";
  return r < 0 ? "(- " + mag + ")" : mag;
}

std::string smt_term(const Poly& p) {
  if (p.is_zero()) return "0.0";
  std::vector<std::string> terms;
  for (const auto& [m, c] : p.terms()) {
    std::vector<std::string> factors;
    if (m.is_one() || c != 1) factors.push_back(smt_literal(c));
    for (const auto& [s, e] : m.factors())
      for (std::uint32_t k = 0; k < e; ++k) factors.push_back(smt_symbol(s));
    if (factors.size() == 1) {
      terms.push_back(factors[0]);
    } else {
      std::string t = "(*";
      for (const auto& f : factors) t += " " + f;
      terms.push_back(t + ")");
    }
  }
  if (terms.size() == 1) return terms[0];
  std::string out = "(+";
  for (const auto& t : terms) out += " " + t;
  return out + ")";
}

std::string emit_smt(const ExistentialSystem& sys) {
  std::ostringstream out;
  out << "(set-logic QF_NRA)\n";
  for (Symbol u : sys.unknowns) out << "(declare-const " << smt_symbol(u) << " Real)\n";
  if (sys.constraints.empty()) out << "(assert true)\n";
  for (const auto& c : sys.constraints) {
    std::string label = c.label;
    for (char& ch : label)
      if (ch == '\n') ch = ' ';
    const char* op = c.atom.rel == Rel::Eq ? "=" : c.atom.rel == Rel::Gt ? ">" : c.atom.rel == Rel::Lt ? "<"
                                               : c.atom.rel == Rel::Le ? "<=" : ">=";
    out << "; " << label << "\n(assert (" << op << " " << smt_term(c.atom.poly) << " 0.0))\n";
  }
  out << "(check-sat)\n";
  if (!sys.unknowns.empty()) {
    out << "(get-value (";
    for (std::size_t i = 0; i < sys.unknowns.size(); ++i) out << (i ? " " : "") << smt_symbol(sys.unknowns[i]);
    out << "))\n";
  }
  out << "(exit)\n";
  return out.str();
}

const char* status_name(SolverStatus s) {
  switch (s) {
  case SolverStatus::Sat: return "sat";
  case SolverStatus::Unsat: return "unsat";
  case SolverStatus::Unknown: return "unknown";
  case SolverStatus::Timeout: return "timeout";
  case SolverStatus::SolverError: return "solver-error";
  case SolverStatus::SatUnverified: return "sat-unverified";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Output parsing

namespace {

struct Sexp {
  std::string atom;
  std::vector<Sexp> list;
  bool is_list = false;
};

class SexpReader {
public:
  explicit SexpReader(std::string_view text) : text_(text) {}

  bool at_end() {
    skip();
    return pos_ >= text_.size();
  }

  Sexp read() {
    skip();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of solver output", 0, 0);
    if (text_[pos_] == '(') {
      ++pos_;
      Sexp s;
      s.is_list = true;
      for (;;) {
        skip();
        if (pos_ >= text_.size()) throw ParseError("unbalanced parentheses in solver output", 0, 0);
        if (text_[pos_] == ')') {
          ++pos_;
          return s;
        }
        s.list.push_back(read());
      }
    }
    if (text_[pos_] == ')') throw ParseError("unexpected ')' in solver output", 0, 0);
    Sexp s;
    if (text_[pos_] == '"' || text_[pos_] == '|') {
      char close = text_[pos_];
      auto end = text_.find(close, pos_ + 1);
      if (end == std::string_view::npos) throw ParseError("unterminated literal in solver output", 0, 0);
      s.atom = std::string(text_.substr(pos_ + (close == '|'), end - pos_ + 1 - 2 * (close == '|')));
      pos_ = end + 1;
      return s;
    }
    auto start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != '(' &&
           text_[pos_] != ')')
      ++pos_;
    s.atom = std::string(text_.substr(start, pos_ - start));
    return s;
  }

private:
  void skip() {
    while (pos_ < text_.size()) {
      if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      } else if (text_[pos_] == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }
  std::string_view text_;
  std::size_t pos_ = 0;
};

struct NotRational : Error {
  using Error::Error;
};

Rational value_of(const Sexp& s) {
  if (!s.is_list) {
    try {
      return parse_rational(s.atom, true);
    } catch (const ParseError&) {
      throw NotRational("non-numeric value '" + s.atom + "'");
    }
  }
  if (s.list.empty() || s.list[0].is_list) throw NotRational("malformed value");
  const auto& op = s.list[0].atom;
  std::vector<Rational> args;
  if (op == "root-obj" || op == "_")
    throw NotRational("irrational (algebraic) value in solver model");
  for (std::size_t i = 1; i < s.list.size(); ++i) args.push_back(value_of(s.list[i]));
  if (op == "-" && args.size() == 1) return Rational(-args[0]);
  if (op == "-" && args.size() >= 2) {
    Rational r = args[0];
    for (std::size_t i = 1; i < args.size(); ++i) r -= args[i];
    return r;
  }
  if (op == "+") {
    Rational r = 0;
    for (auto& a : args) r += a;
    return r;
  }
  if (op == "*") {
    Rational r = 1;
    for (auto& a : args) r *= a;
    return r;
  }
  if (op == "/" && args.size() == 2) {
    if (args[1] == 0) throw NotRational("division by zero in solver model");
    return Rational(args[0] / args[1]);
  }
  throw NotRational("unsupported value operator '" + op + "'");
}

} // namespace

SolverOutcome parse_solver_output(const std::string& output) {
  SolverOutcome out;
  out.raw = output;
  SexpReader reader(output);
  try {
    if (reader.at_end()) {
      out.status = SolverStatus::SolverError;
      out.message = "solver produced no output";
      return out;
    }
    Sexp verdict = reader.read();
    // Skip leading diagnostics such as (error ...) or "success" replies.
    while (verdict.is_list || (verdict.atom != "sat" && verdict.atom != "unsat" && verdict.atom != "unknown" &&
                               verdict.atom != "timeout")) {
      if (verdict.is_list && !verdict.list.empty() && verdict.list[0].atom == "error") {
        out.message = verdict.list.size() > 1 ? verdict.list[1].atom : "solver error";
      }
      if (reader.at_end()) {
        out.status = SolverStatus::SolverError;
        if (out.message.empty()) out.message = "no verdict in solver output";
        return out;
      }
      verdict = reader.read();
    }
    if (verdict.atom == "unsat") {
      out.status = SolverStatus::Unsat;
      return out;
    }
    if (verdict.atom != "sat") {
      out.status = verdict.atom == "timeout" ? SolverStatus::Timeout : SolverStatus::Unknown;
      return out;
    }
    std::map<Symbol, Rational> model;
    while (!reader.at_end()) {
      Sexp block = reader.read();
      if (!block.is_list) continue;
      for (const auto& pair : block.list) {
        if (!pair.is_list || pair.list.size() != 2 || pair.list[0].is_list) continue;
        auto sym = lookup_symbol(pair.list[0].atom);
        if (!sym) continue;
        model[*sym] = value_of(pair.list[1]);
      }
    }
    out.status = SolverStatus::Sat;
    out.assignment = std::move(model);
  } catch (const NotRational& e) {
    out.status = SolverStatus::Unknown;
    out.assignment.reset();
    out.message = e.what();
  } catch (const ParseError& e) {
    out.status = SolverStatus::SolverError;
    out.assignment.reset();
    out.message = e.what();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Process management

namespace {

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
  return s;
}

std::string shell_quote(const std::string& s) { return "'" + replace_all(s, "'", "'\\''") + "'"; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

SolverOutcome run_solver(const std::string& script, const SolverConfig& cfg, const std::atomic<bool>* cancel) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.work_dir);
  fs::path script_path = cfg.work_dir / (cfg.stem + ".smt2");
  fs::path out_path = cfg.work_dir / (cfg.stem + ".out");
  {
    std::ofstream f(script_path);
    f << script;
    if (!f) throw ConfigError("cannot write solver script " + script_path.string());
  }
  bool uses_file = cfg.command.find("{file}") != std::string::npos;
  std::string command = replace_all(cfg.command, "{file}", shell_quote(script_path.string()));

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, uses_file ? "/dev/null" : script_path.c_str(), O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, out_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);

  std::string sh = "/bin/sh", dash_c = "-c";
  char* argv[] = {sh.data(), dash_c.data(), command.data(), nullptr};
  auto start = std::chrono::steady_clock::now();
  pid_t pid = 0;
  int rc = posix_spawn(&pid, "/bin/sh", &actions, &attr, argv, environ);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  SolverOutcome out;
  if (rc != 0) {
    out.status = SolverStatus::SolverError;
    out.message = "cannot start solver: " + std::string(std::strerror(rc));
    return out;
  }

  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  int wstatus = 0;
  bool killed = false, cancelled = false;
  for (;;) {
    pid_t r = waitpid(pid, &wstatus, WNOHANG);
    if (r == pid) break;
    if (r < 0 && errno != EINTR) break;
    bool over = elapsed() > cfg.timeout_seconds;
    bool stop = cancel && cancel->load();
    if ((over || stop) && !killed) {
      kill(-pid, SIGKILL);
      killed = true;
      cancelled = stop && !over;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  out.wall_time = elapsed();
  std::string transcript = slurp(out_path);

  if (killed) {
    out.status = SolverStatus::Timeout;
    out.raw = transcript;
    out.message = cancelled ? "cancelled" : "wall-clock timeout after " + std::to_string(cfg.timeout_seconds) + " s";
    return out;
  }
  double wall = out.wall_time;
  out = parse_solver_output(transcript);
  out.wall_time = wall;
  bool exited_badly = !WIFEXITED(wstatus) || WEXITSTATUS(wstatus) != 0;
  if (exited_badly && out.status == SolverStatus::SolverError && out.message.empty())
    out.message = "solver exited with status " + std::to_string(WIFEXITED(wstatus) ? WEXITSTATUS(wstatus) : -1);
  return out;
}

std::vector<std::string> violated_constraints(const ExistentialSystem& sys,
                                              const std::map<Symbol, Rational>& assignment) {
  std::map<Symbol, Rational> values = assignment;
  for (Symbol u : sys.unknowns) values.try_emplace(u, Rational(0));
  std::vector<std::string> bad;
  for (const auto& c : sys.constraints) {
    bool ok = false;
    try {
      ok = c.atom.holds(values);
    } catch (const BindingError&) {
      ok = false;
    }
    if (!ok) bad.push_back(c.label);
  }
  return bad;
}

std::string default_solver_command() {
  const char* path = std::getenv("PATH");
  std::istringstream dirs(path ? path : "");
  std::string dir;
  while (std::getline(dirs, dir, ':')) {
    if (dir.empty()) continue;
    if (access((std::filesystem::path(dir) / "yices-smt2").c_str(), X_OK) == 0) return "yices-smt2 {file}";
  }
  return "z3 -smt2 {file}";
}

ExistentialSystem shuffled(const ExistentialSystem& sys, std::uint64_t seed) {
  ExistentialSystem out = sys;
  auto g = stream_engine(seed, 0);
  // Fisher-Yates with our own draws so the order is the same everywhere.
  auto permute = [&](auto& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[g() % i]);
  };
  permute(out.unknowns);
  permute(out.constraints);
  return out;
}

namespace {

SolverOutcome solve_once(const ExistentialSystem& sys, const SolverConfig& cfg, const std::atomic<bool>* cancel) {
  for (const auto& c : sys.constraints) {
    if (!c.atom.poly.is_constant() || c.atom.holds({})) continue;
    SolverOutcome out;
    out.status = SolverStatus::Unsat;
    out.message = "constraint '" + c.label + "' is constant and false";
    return out;
  }
  SolverOutcome out = run_solver(emit_smt(sys), cfg, cancel);
  if (out.status != SolverStatus::Sat) return out;
  auto bad = violated_constraints(sys, *out.assignment);
  if (!bad.empty()) {
    out.status = SolverStatus::SatUnverified;
    out.message = std::to_string(bad.size()) + " constraint(s) fail exact re-validation, first: " + bad.front();
    out.assignment.reset();
    return out;
  }
  for (Symbol u : sys.unknowns) out.assignment->try_emplace(u, Rational(0));
  return out;
}

} // namespace

SolverOutcome solve(const ExistentialSystem& sys, const SolverConfig& cfg, const std::atomic<bool>* cancel) {
  if (cfg.restart_base <= 0) return solve_once(sys, cfg, cancel);
  double used = 0, slice = cfg.restart_base;
  SolverOutcome last;
  for (std::uint64_t k = 0;; ++k) {
    double left = cfg.timeout_seconds - used;
    if (left <= 0.01) break;
    SolverConfig attempt = cfg;
    attempt.timeout_seconds = std::min(slice, left);
    if (k > 0) {
      attempt.work_dir = cfg.work_dir / "restarts";
      attempt.stem = cfg.stem + "-r" + std::to_string(k);
    }
    last = solve_once(k == 0 ? sys : shuffled(sys, splitmix64(cfg.seed + k)), attempt, cancel);
    used += last.wall_time;
    bool retry = last.status == SolverStatus::Unknown ||
                 (last.status == SolverStatus::Timeout && last.message != "cancelled");
    if (!retry) {
      last.wall_time = used;
      if (k > 0) last.message += (last.message.empty() ? "" : "; ") + std::string("attempt ") + std::to_string(k + 1);
      return last;
    }
    slice *= 1.5;
  }
  last.status = SolverStatus::Timeout;
  last.assignment.reset();
  last.wall_time = used;
  last.message = "wall-clock timeout after " + std::to_string(cfg.timeout_seconds) + " s";
  return last;
}

} // namespace ldbsm
