#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "horndim/chc.hpp"
#include "horndim/decompose.hpp"
#include "horndim/derivation.hpp"
#include "horndim/instrument.hpp"
#include "horndim/tree_automata.hpp"
#include "horndim/verify.hpp"

namespace {

using namespace horndim;

constexpr int exit_usage = 64;
constexpr int exit_parse = 65;
constexpr int exit_noinput = 66;
constexpr int exit_internal = 70;

struct input_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parse errors carry the file they came from.
struct located_parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

program with_ids(program p) {
  if (p.has_ids()) return p;
  bool none = std::all_of(p.clauses.begin(), p.clauses.end(), [](const clause& c) { return c.id.empty(); });
  if (none) return assign_clause_ids(std::move(p), "c");
  id_source ids("c", p.ids());
  for (auto& c : p.clauses)
    if (c.id.empty()) c.id = ids.next();
  return p;
}

program load(const std::string& path) {
  const auto text = read_file(path);
  try {
    return with_ids(parse_program(text));
  } catch (const parse_error& e) {
    throw located_parse_error(path + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) + ": " +
                              e.what());
  } catch (const error& e) {
    throw located_parse_error(path + ": " + e.what());
  }
}

struct output_flags {
  std::string style = "ascii";
  bool ids = false;
  bool prune = false;
};

void add_output_flags(CLI::App* cmd, output_flags& f) {
  cmd->add_option("--style", f.style, "Predicate naming")->check(CLI::IsMember({"bracket", "ascii"}));
  cmd->add_flag("--ids", f.ids, "Prefix clauses with their identifiers");
  cmd->add_flag("--prune", f.prune, "Drop clauses that cannot reach an accepting predicate");
}

void print_program(const program& p, const output_flags& f) {
  render_options opts{f.style == "bracket" ? style::bracket : style::ascii, f.ids};
  std::cout << render_program(f.prune ? prune(p) : p, opts);
}

at_least_mode parse_mode(const std::string& m) { return m == "direct" ? at_least_mode::direct : at_least_mode::fta; }

int run(int argc, char** argv) {
  CLI::App app{"Tree-dimension decomposition of constrained Horn clauses"};
  app.require_subcommand(1);

  std::string tree_text;
  auto* dim_cmd = app.add_subcommand("dim", "Print the dimension of a trace tree");
  dim_cmd->add_option("tree", tree_text, "Tree in functional notation")->required();

  unsigned k = 0;
  std::string file, file_b;
  output_flags out_flags;
  bool unfold = false;
  auto* atmost_cmd = app.add_subcommand("atmost", "At-most-k dimension program");
  atmost_cmd->add_option("-k", k, "Dimension bound")->required();
  atmost_cmd->add_option("file", file)->required();
  atmost_cmd->add_flag("--unfold", unfold, "Unfold epsilon-clauses and inherit identifiers");
  add_output_flags(atmost_cmd, out_flags);

  std::string mode = "fta";
  auto* atleast_cmd = app.add_subcommand("atleast", "At-least-(k+1) dimension program");
  atleast_cmd->add_option("-k", k, "Dimension bound")->required();
  atleast_cmd->add_option("file", file)->required();
  atleast_cmd->add_option("--mode", mode, "Construction")->check(CLI::IsMember({"direct", "fta"}));
  add_output_flags(atleast_cmd, out_flags);

  auto* fta_cmd = app.add_subcommand("fta", "Trace automaton of a program");
  fta_cmd->add_option("file", file)->required();

  bool as_chc = false;
  auto* diff_cmd = app.add_subcommand("fta-diff", "Determinised difference of two trace automata");
  diff_cmd->add_option("file_a", file)->required();
  diff_cmd->add_option("file_b", file_b)->required();
  diff_cmd->add_flag("--chc", as_chc, "Print the clauses of the difference, using the first program's clauses");
  add_output_flags(diff_cmd, out_flags);

  std::string integrity;
  std::string encoding = "exact";
  auto* instr_cmd = app.add_subcommand("instrument", "Add a dimension argument to every predicate");
  instr_cmd->add_option("file", file)->required();
  instr_cmd->add_option("--integrity", integrity, "Integrity constraint to append");
  instr_cmd->add_option("--dim-encoding", encoding, "n-ary dimension clauses")
      ->check(CLI::IsMember({"exact", "fold"}));
  add_output_flags(instr_cmd, out_flags);

  unsigned k_max = 3;
  std::string oracle_cmd;
  double timeout_s = 10;
  std::size_t budget = 20;
  bool shrink = false, json = false, timings = false, parallel = false;
  auto* verify_cmd = app.add_subcommand("verify", "Decide safety by dimension decomposition");
  verify_cmd->add_option("file", file)->required();
  verify_cmd->add_option("-k", k_max, "Largest dimension to try");
  verify_cmd->add_option("--mode", mode, "At-least construction")->check(CLI::IsMember({"direct", "fta"}));
  verify_cmd->add_option("--oracle-cmd", oracle_cmd, "External solver command; {file} is the SMT-LIB input");
  verify_cmd->add_option("--timeout", timeout_s, "External solver timeout in seconds")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--budget", budget, "Node budget of the bounded counterexample search");
  verify_cmd->add_flag("--shrink", shrink, "Continue from the at-least program");
  verify_cmd->add_flag("--parallel", parallel, "Ask both branches concurrently");
  verify_cmd->add_flag("--json", json, "Print a JSON record");
  verify_cmd->add_flag("--timings", timings, "Include wall-clock timings in the JSON record");

  auto* export_cmd = app.add_subcommand("export", "SMT-LIB HORN encoding");
  export_cmd->add_option("file", file)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_usage;
  }

  if (*dim_cmd) {
    trace_tree t;
    try {
      t = parse_tree(tree_text);
    } catch (const error& e) {
      std::cerr << "horndim: " << e.what() << "\n";
      return exit_parse;
    }
    std::cout << tree_dim(t) << "\n";
    return 0;
  }
  if (*atmost_cmd) {
    const auto p = load(file);
    print_program(unfold ? at_most_k_unfolded(p, k) : at_most_k(p, k), out_flags);
    return 0;
  }
  if (*atleast_cmd) {
    const auto p = load(file);
    print_program(parse_mode(mode) == at_least_mode::direct ? at_least_k_direct(p, k) : at_least_via_fta(p, k),
                  out_flags);
    return 0;
  }
  if (*fta_cmd) {
    std::cout << render_fta(trace_fta(load(file)));
    return 0;
  }
  if (*diff_cmd) {
    const auto a = load(file);
    const auto b = load(file_b);
    const auto d = difference(trace_fta(a), trace_fta(b));
    if (as_chc) print_program(chc_of_fta(d, id_inverse(a)), out_flags);
    else std::cout << render_dfta(d);
    return 0;
  }
  if (*instr_cmd) {
    const auto p = load(file);
    instrument_options opts{encoding == "fold" ? dim_encoding::fold : dim_encoding::exact};
    program q = instrument_dim(p, opts);
    if (!integrity.empty()) {
      clause c;
      try {
        c = parse_clause(integrity);
      } catch (const parse_error& e) {
        throw located_parse_error("--integrity:" + std::to_string(e.line()) + ":" + std::to_string(e.column()) +
                                  ": " + e.what());
      }
      q = add_integrity(std::move(q), std::move(c));
    }
    print_program(q, out_flags);
    return 0;
  }
  if (*export_cmd) {
    std::cout << emit_smtlib_horn(load(file));
    return 0;
  }
  if (*verify_cmd) {
    const auto p = load(file);
    const auto timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000));
    std::vector<oracle> oracles{trivial_safe, [](const program& q) { return exhaustive_safe(q); },
                                [budget](const program& q) { return bounded_unsafe(q, budget); }};
    if (!oracle_cmd.empty())
      oracles.push_back([oracle_cmd, timeout](const program& q) { return external_oracle(oracle_cmd, q, timeout); });
    verify_options opts;
    opts.k_max = k_max;
    opts.mode = parse_mode(mode);
    opts.shrink = shrink;
    opts.parallel = parallel;
    const auto start = std::chrono::steady_clock::now();
    const auto res = verify_loop(p, compose(std::move(oracles)), opts);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (json) {
      nlohmann::ordered_json j;
      j["v"] = 1;
      j["verdict"] = std::string(to_string(res.result));
      j["k"] = res.resolved_k ? nlohmann::ordered_json(*res.resolved_k) : nlohmann::ordered_json();
      j["branch"] = res.side ? nlohmann::ordered_json(std::string(to_string(*res.side))) : nlohmann::ordered_json();
      j["witness"] = res.witness ? nlohmann::ordered_json(to_string(*res.witness)) : nlohmann::ordered_json();
      j["timings"] = timings ? nlohmann::ordered_json{{"total_s", secs}} : nlohmann::ordered_json();
      j["diagnostic"] = res.diagnostic;
      std::cout << j.dump() << "\n";
    } else {
      std::cout << to_string(res.result);
      if (res.resolved_k) std::cout << " k=" << *res.resolved_k << " branch=" << to_string(*res.side);
      if (res.witness) std::cout << " witness=" << to_string(*res.witness);
      std::cout << "\n";
      if (!res.diagnostic.empty()) std::cerr << res.diagnostic << "\n";
    }
    switch (res.result) {
      case verdict::safe: return 0;
      case verdict::unsafe: return 1;
      case verdict::unknown: return 2;
    }
  }
  return exit_usage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const located_parse_error& e) {
    std::cerr << "horndim: " << e.what() << "\n";
    return exit_parse;
  } catch (const input_error& e) {
    std::cerr << "horndim: " << e.what() << "\n";
    return exit_noinput;
  } catch (const horndim::error& e) {
    std::cerr << "horndim: " << e.what() << "\n";
    return exit_internal;
  }
}
