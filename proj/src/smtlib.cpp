#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <sstream>

#include "horndim/decompose.hpp"
#include "horndim/verify.hpp"

namespace horndim {

namespace {

const std::set<std::string> reserved = {"_",      "!",      "as",     "let",   "exists", "forall",    "match",
                                        "par",    "and",    "or",     "not",   "xor",    "ite",       "distinct",
                                        "true",   "false",  "assert", "check-sat",       "declare-fun",
                                        "define-fun", "set-logic", "Int",  "Bool", "NUMERAL", "STRING"};

std::string symbol(const std::string& name) { return reserved.contains(name) ? "|" + name + "|" : name; }

std::string number(integer v) { return v < 0 ? "(- " + std::to_string(-v) + ")" : std::to_string(v); }

std::string smt_term(const lin_term& t) {
  std::vector<std::string> parts;
  for (const auto& [v, k] : t.coeffs) {
    if (k == 1) parts.push_back(symbol(v));
    else if (k == -1) parts.push_back("(- " + symbol(v) + ")");
    else parts.push_back("(* " + number(k) + " " + symbol(v) + ")");
  }
  if (t.constant != 0 || parts.empty()) parts.push_back(number(t.constant));
  if (parts.size() == 1) return parts.front();
  std::string out = "(+";
  for (const auto& s : parts) out += " " + s;
  return out + ")";
}

std::string smt_rel(rel r) {
  switch (r) {
    case rel::eq: return "=";
    case rel::ge: return ">=";
    case rel::gt: return ">";
    case rel::le: return "<=";
    case rel::lt: return "<";
  }
  return "=";
}

std::string smt_app(const std::string& name, const std::vector<std::string>& args) {
  if (args.empty()) return name;
  std::string out = "(" + name;
  for (const auto& a : args) out += " " + symbol(a);
  return out + ")";
}

std::string implication(const std::vector<std::string>& vars, const std::vector<std::string>& conj,
                        const std::string& head) {
  std::string body;
  if (conj.size() == 1) {
    body = "(=> " + conj.front() + " " + head + ")";
  } else if (conj.empty()) {
    body = head;
  } else {
    body = "(=> (and";
    for (const auto& c : conj) body += " " + c;
    body += ") " + head + ")";
  }
  if (vars.empty()) return "(assert " + body + ")";
  std::string q = "(assert (forall (";
  for (std::size_t i = 0; i < vars.size(); ++i) q += (i ? " (" : "(") + symbol(vars[i]) + " Int)";
  return q + ") " + body + "))";
}

}  // namespace

std::string emit_smtlib_horn(const program& p) {
  std::map<pred_key, std::string> names;
  std::map<std::string, pred_key> taken;
  for (const auto& [k, n] : p.arities) {
    if (k.is_false()) continue;
    std::string m = symbol(render_pred(k, style::ascii));
    auto [it, inserted] = taken.emplace(m, k);
    if (!inserted) throw error("predicate names collide after mangling: " + m);
    names.emplace(k, std::move(m));
  }
  const bool false_accepting = p.accepting.contains(pred_key::falsum());

  std::ostringstream out;
  out << "(set-logic HORN)\n";
  for (const auto& [m, k] : taken) {
    out << "(declare-fun " << m << " (";
    for (std::size_t i = 0; i < p.arities.at(k); ++i) out << (i ? " Int" : "Int");
    out << ") Bool)\n";
  }
  for (const auto& c : p.clauses) {
    // Integrity clauses only count when false is a query of this program.
    if (c.is_integrity() && !false_accepting) continue;
    std::vector<std::string> conj;
    for (const auto& k : c.constraints)
      conj.push_back("(" + smt_rel(k.op) + " " + smt_term(k.lhs) + " " + smt_term(k.rhs) + ")");
    for (const auto& b : c.body) conj.push_back(smt_app(names.at(b.pred), b.args));
    const std::string head = c.is_integrity() ? "false" : smt_app(names.at(c.head.pred), c.head.args);
    const auto vars = c.variables();
    out << implication({vars.begin(), vars.end()}, conj, head) << "\n";
  }
  for (const auto& f : p.accepting) {
    if (f.is_false()) continue;
    const auto vars = standard_vars(p.arities.at(f));
    out << implication(vars, {smt_app(names.at(f), vars)}, "false") << "\n";
  }
  out << "(check-sat)\n";
  return out.str();
}

namespace {

struct temp_file {
  std::string path;
  ~temp_file() {
    if (!path.empty()) ::unlink(path.c_str());
  }
};

}  // namespace

oracle_verdict external_oracle(const std::string& command, const program& p, std::chrono::milliseconds timeout) {
  const auto placeholder = command.find("{file}");
  if (placeholder == std::string::npos) return {verdict::unknown, std::nullopt, "oracle command lacks {file}"};

  std::string text;
  try {
    text = emit_smtlib_horn(p);
  } catch (const error& e) {
    return {verdict::unknown, std::nullopt, e.what()};
  }

  const char* tmpdir = std::getenv("TMPDIR");
  std::string templ = std::string(tmpdir && *tmpdir ? tmpdir : "/tmp") + "/horndim-XXXXXX.smt2";
  std::vector<char> buf(templ.begin(), templ.end());
  buf.push_back('\0');
  const int fd = ::mkstemps(buf.data(), 5);
  if (fd < 0) return {verdict::unknown, std::nullopt, std::string("cannot create temp file: ") + std::strerror(errno)};
  temp_file tmp{buf.data()};
  for (std::size_t off = 0; off < text.size();) {
    const ssize_t w = ::write(fd, text.data() + off, text.size() - off);
    if (w < 0) {
      ::close(fd);
      return {verdict::unknown, std::nullopt, "cannot write temp file"};
    }
    off += static_cast<std::size_t>(w);
  }
  ::close(fd);

  std::string cmd = command;
  for (std::size_t pos = cmd.find("{file}"); pos != std::string::npos; pos = cmd.find("{file}", pos + tmp.path.size()))
    cmd.replace(pos, 6, tmp.path);

  int pipefd[2];
  if (::pipe(pipefd) != 0) return {verdict::unknown, std::nullopt, "pipe failed"};
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(pipefd[0]);
    ::close(pipefd[1]);
    return {verdict::unknown, std::nullopt, "fork failed"};
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(pipefd[1], STDOUT_FILENO);
    const int devnull = ::open("/dev/null", O_WRONLY);
    if (devnull >= 0) ::dup2(devnull, STDERR_FILENO);
    ::close(pipefd[0]);
    ::close(pipefd[1]);
    ::execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(pipefd[1]);

  std::string output;
  bool timed_out = false;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      timed_out = true;
      break;
    }
    pollfd pfd{pipefd[0], POLLIN, 0};
    const int r = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 1000)));
    if (r < 0 && errno == EINTR) continue;
    if (r < 0) break;
    if (r == 0) continue;
    char chunk[4096];
    const ssize_t got = ::read(pipefd[0], chunk, sizeof chunk);
    if (got <= 0) break;
    output.append(chunk, static_cast<std::size_t>(got));
  }
  ::close(pipefd[0]);
  int status = 0;
  while (!timed_out) {
    const pid_t w = ::waitpid(pid, &status, WNOHANG);
    if (w == pid || (w < 0 && errno != EINTR)) break;
    if (std::chrono::steady_clock::now() >= deadline) timed_out = true;
    else ::usleep(2000);
  }
  if (timed_out) {
    ::kill(-pid, SIGKILL);
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
  }
  if (timed_out) return {verdict::unknown, std::nullopt, "oracle timed out"};

  std::istringstream words(output);
  std::string token;
  words >> token;
  if (token == "sat") return {verdict::safe, std::nullopt, "external solver: sat"};
  if (token == "unsat") return {verdict::unsafe, std::nullopt, "external solver: unsat"};
  return {verdict::unknown, std::nullopt, token.empty() ? "external solver gave no answer" : "external solver: " + token};
}

}  // namespace horndim
