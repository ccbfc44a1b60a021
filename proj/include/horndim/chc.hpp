#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace horndim {

/// Base class for every error raised by the toolkit.
class error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class parse_error : public error {
public:
  parse_error(const std::string& msg, std::size_t line, std::size_t column);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

using integer = std::int64_t;

/// Linear integer term: sum of coefficient*variable plus a constant.
/// Zero coefficients are never stored.
struct lin_term {
  std::map<std::string, integer> coeffs;
  integer constant = 0;

  static lin_term var(std::string name, integer coeff = 1);
  static lin_term num(integer value);

  bool is_constant() const { return coeffs.empty(); }
  /// True when the term is exactly one variable with coefficient 1.
  std::optional<std::string> as_variable() const;

  lin_term& operator+=(const lin_term& other);
  lin_term& operator-=(const lin_term& other);
  lin_term& operator*=(integer factor);

  friend lin_term operator+(lin_term a, const lin_term& b) { return a += b; }
  friend lin_term operator-(lin_term a, const lin_term& b) { return a -= b; }
  friend lin_term operator*(lin_term a, integer f) { return a *= f; }

  auto operator<=>(const lin_term&) const = default;
};

enum class rel { eq, ge, gt, le, lt };

std::string_view rel_symbol(rel r);

struct lin_constraint {
  lin_term lhs;
  rel op = rel::eq;
  lin_term rhs;

  /// lhs - rhs, to be compared against zero with `op`.
  lin_term difference() const { return lhs - rhs; }
  /// Evaluates under an integer assignment; unassigned variables are an error.
  bool holds(const std::map<std::string, integer>& values) const;

  auto operator<=>(const lin_constraint&) const = default;
};

lin_constraint make_constraint(lin_term lhs, rel op, lin_term rhs);

/// Dimension annotation carried by a predicate name.
enum class annot { plain, exactly, at_most, exceeds, any_dim, fresh };

struct pred_key {
  std::string base;
  annot tag = annot::plain;
  unsigned index = 0;

  static pred_key plain(std::string base) { return {std::move(base), annot::plain, 0}; }
  static pred_key exactly(std::string base, unsigned d) { return {std::move(base), annot::exactly, d}; }
  static pred_key at_most(std::string base, unsigned d) { return {std::move(base), annot::at_most, d}; }
  static pred_key exceeds(std::string base, unsigned d) { return {std::move(base), annot::exceeds, d}; }
  static pred_key any_dim(std::string base, unsigned d) { return {std::move(base), annot::any_dim, d}; }
  static pred_key fresh(std::string base, unsigned n) { return {std::move(base), annot::fresh, n}; }
  /// The distinguished head of integrity constraints.
  static pred_key falsum() { return plain("false"); }

  bool is_false() const { return tag == annot::plain && base == "false"; }
  bool is_plain() const { return tag == annot::plain; }
  pred_key with_tag(annot t, unsigned i) const { return {base, t, i}; }

  auto operator<=>(const pred_key&) const = default;
};

struct atom {
  pred_key pred;
  std::vector<std::string> args;

  auto operator<=>(const atom&) const = default;
};

struct clause {
  atom head;
  std::vector<lin_constraint> constraints;
  std::vector<atom> body;
  /// Clause identifier symbol; empty when unassigned. Its arity is body.size().
  std::string id;
  /// Index of the clause of a source program this clause was derived from.
  std::optional<std::size_t> origin;

  bool is_integrity() const { return head.pred.is_false(); }
  bool is_fact() const { return body.empty(); }
  bool is_linear() const { return body.size() <= 1; }
  std::set<std::string> variables() const;
};

struct program {
  std::vector<clause> clauses;
  std::map<pred_key, std::size_t> arities;
  std::set<pred_key> accepting;

  bool has_integrity() const;
  bool has_ids() const;
  std::set<pred_key> predicates() const;
  std::set<std::string> ids() const;
  /// Throws when the arity, accepting-set or id-arity invariants are violated.
  void check() const;
};

/// Builds a program from clauses, inferring arities. When `accepting` is absent
/// it defaults to {false} if any integrity constraint exists.
program make_program(std::vector<clause> clauses,
                     std::optional<std::set<pred_key>> accepting = std::nullopt);

enum class style { bracket, ascii };

struct render_options {
  style name_style = style::ascii;
  bool ids = false;
};

program parse_program(std::string_view text);
/// Parses a single clause, e.g. an integrity constraint given on the command line.
clause parse_clause(std::string_view text);
/// Parses a predicate reference in either surface form (`fib[0]`, `fib_am_0`, `false`).
std::optional<pred_key> parse_pred_name(std::string_view text);

std::string render_pred(const pred_key& key, style s);
std::string render_term(const lin_term& t);
std::string render_constraint(const lin_constraint& c);
std::string render_atom(const atom& a, style s);
std::string render_clause(const clause& c, const render_options& opts = {});
std::string render_program(const program& p, const render_options& opts = {});
inline std::string render_program(const program& p, style s) {
  return render_program(p, render_options{s, false});
}

/// Gives every clause the id `prefix<i>` (1-based, textual order).
program assign_clause_ids(program p, std::string_view prefix);

/// Renames the keys of `second` that collide with keys of `first`.
/// The integrity head is not a predicate key and is never renamed.
std::pair<program, program> standardize_apart(program first, program second);

/// Applies a key renaming to every atom, the arity map and the accepting set.
program rename_predicates(const program& p, const std::map<pred_key, pred_key>& renaming);

/// Maps each id to its unique clause; throws if the assignment is not injective.
std::map<std::string, clause> id_inverse(const program& p);

/// Returns a clause-id generator producing `prefix1, prefix2, ...` that skips `taken`.
class id_source {
public:
  id_source(std::string prefix, std::set<std::string> taken)
      : prefix_(std::move(prefix)), taken_(std::move(taken)) {}
  std::string next();

private:
  std::string prefix_;
  std::set<std::string> taken_;
  std::size_t counter_ = 0;
};

/// True for pure renaming clauses `h(X) :- b(X).` with distinct variables X.
bool is_renaming_clause(const clause& c);

}  // namespace horndim
