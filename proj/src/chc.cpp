#include "horndim/chc.hpp"

#include <algorithm>
#include <sstream>

namespace horndim {

parse_error::parse_error(const std::string& msg, std::size_t line, std::size_t column)
    : error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
      line_(line),
      column_(column) {}

lin_term lin_term::var(std::string name, integer coeff) {
  lin_term t;
  if (coeff != 0) t.coeffs.emplace(std::move(name), coeff);
  return t;
}

lin_term lin_term::num(integer value) {
  lin_term t;
  t.constant = value;
  return t;
}

std::optional<std::string> lin_term::as_variable() const {
  if (constant != 0 || coeffs.size() != 1 || coeffs.begin()->second != 1) return std::nullopt;
  return coeffs.begin()->first;
}

lin_term& lin_term::operator+=(const lin_term& other) {
  for (const auto& [v, c] : other.coeffs) {
    auto& slot = coeffs[v];
    slot += c;
    if (slot == 0) coeffs.erase(v);
  }
  constant += other.constant;
  return *this;
}

lin_term& lin_term::operator-=(const lin_term& other) {
  for (const auto& [v, c] : other.coeffs) {
    auto& slot = coeffs[v];
    slot -= c;
    if (slot == 0) coeffs.erase(v);
  }
  constant -= other.constant;
  return *this;
}

lin_term& lin_term::operator*=(integer factor) {
  if (factor == 0) {
    coeffs.clear();
    constant = 0;
    return *this;
  }
  for (auto& [v, c] : coeffs) c *= factor;
  constant *= factor;
  return *this;
}

std::string_view rel_symbol(rel r) {
  switch (r) {
    case rel::eq: return "=";
    case rel::ge: return ">=";
    case rel::gt: return ">";
    case rel::le: return "=<";
    case rel::lt: return "<";
  }
  return "?";
}

bool lin_constraint::holds(const std::map<std::string, integer>& values) const {
  const lin_term d = difference();
  integer sum = d.constant;
  for (const auto& [v, c] : d.coeffs) {
    auto it = values.find(v);
    if (it == values.end()) throw error("unassigned variable " + v);
    sum += c * it->second;
  }
  switch (op) {
    case rel::eq: return sum == 0;
    case rel::ge: return sum >= 0;
    case rel::gt: return sum > 0;
    case rel::le: return sum <= 0;
    case rel::lt: return sum < 0;
  }
  return false;
}

lin_constraint make_constraint(lin_term lhs, rel op, lin_term rhs) {
  return lin_constraint{std::move(lhs), op, std::move(rhs)};
}

std::set<std::string> clause::variables() const {
  std::set<std::string> vars(head.args.begin(), head.args.end());
  for (const auto& a : body) vars.insert(a.args.begin(), a.args.end());
  for (const auto& c : constraints) {
    for (const auto& [v, k] : c.lhs.coeffs) vars.insert(v);
    for (const auto& [v, k] : c.rhs.coeffs) vars.insert(v);
  }
  return vars;
}

bool program::has_integrity() const {
  return std::any_of(clauses.begin(), clauses.end(),
                     [](const clause& c) { return c.is_integrity(); });
}

bool program::has_ids() const {
  return std::all_of(clauses.begin(), clauses.end(),
                     [](const clause& c) { return !c.id.empty(); });
}

std::set<pred_key> program::predicates() const {
  std::set<pred_key> out;
  for (const auto& [k, n] : arities) out.insert(k);
  return out;
}

std::set<std::string> program::ids() const {
  std::set<std::string> out;
  for (const auto& c : clauses)
    if (!c.id.empty()) out.insert(c.id);
  return out;
}

namespace {

void note_arity(std::map<pred_key, std::size_t>& arities, const atom& a) {
  auto [it, inserted] = arities.emplace(a.pred, a.args.size());
  if (!inserted && it->second != a.args.size())
    throw error("arity mismatch for predicate " + render_pred(a.pred, style::bracket) + ": " +
                std::to_string(it->second) + " vs " + std::to_string(a.args.size()));
}

}  // namespace

void program::check() const {
  std::map<std::string, std::size_t> id_arity;
  for (const auto& c : clauses) {
    for (const atom* a : [&] {
           std::vector<const atom*> all{&c.head};
           for (const auto& b : c.body) all.push_back(&b);
           return all;
         }()) {
      auto it = arities.find(a->pred);
      if (it == arities.end())
        throw error("predicate without arity: " + render_pred(a->pred, style::bracket));
      if (it->second != a->args.size())
        throw error("arity mismatch for predicate " + render_pred(a->pred, style::bracket));
    }
    if (c.head.pred.is_false() && !c.head.args.empty())
      throw error("integrity head takes no arguments");
    if (!c.id.empty()) {
      auto [it, inserted] = id_arity.emplace(c.id, c.body.size());
      if (!inserted && it->second != c.body.size())
        throw error("clause id " + c.id + " used with different arities");
    }
  }
  for (const auto& f : accepting)
    if (!f.is_false() && !arities.contains(f))
      throw error("accepting predicate not in program: " + render_pred(f, style::bracket));
}

program make_program(std::vector<clause> clauses, std::optional<std::set<pred_key>> accepting) {
  program p;
  p.clauses = std::move(clauses);
  for (const auto& c : p.clauses) {
    note_arity(p.arities, c.head);
    for (const auto& b : c.body) note_arity(p.arities, b);
  }
  if (accepting) {
    p.accepting = std::move(*accepting);
    for (const auto& f : p.accepting)
      if (f.is_false()) p.arities.emplace(f, 0);
  } else if (p.has_integrity()) {
    p.accepting = {pred_key::falsum()};
  }
  p.check();
  return p;
}

program assign_clause_ids(program p, std::string_view prefix) {
  std::size_t i = 0;
  for (auto& c : p.clauses) c.id = std::string(prefix) + std::to_string(++i);
  return p;
}

program rename_predicates(const program& p, const std::map<pred_key, pred_key>& renaming) {
  auto ren = [&](const pred_key& k) {
    auto it = renaming.find(k);
    return it == renaming.end() ? k : it->second;
  };
  program out = p;
  for (auto& c : out.clauses) {
    c.head.pred = ren(c.head.pred);
    for (auto& b : c.body) b.pred = ren(b.pred);
  }
  out.arities.clear();
  for (const auto& [k, n] : p.arities) {
    auto [it, inserted] = out.arities.emplace(ren(k), n);
    if (!inserted && it->second != n) throw error("renaming merges predicates of different arity");
  }
  out.accepting.clear();
  for (const auto& f : p.accepting) out.accepting.insert(ren(f));
  return out;
}

std::pair<program, program> standardize_apart(program first, program second) {
  std::set<pred_key> used = first.predicates();
  for (const auto& k : second.predicates()) used.insert(k);
  std::map<pred_key, pred_key> renaming;
  for (const auto& k : second.predicates()) {
    if (k.is_false() || !first.arities.contains(k)) continue;
    pred_key r = k;
    do {
      r.base += "_sa";
    } while (used.contains(r));
    used.insert(r);
    renaming.emplace(k, r);
  }
  if (renaming.empty()) return {std::move(first), std::move(second)};
  return {std::move(first), rename_predicates(second, renaming)};
}

std::map<std::string, clause> id_inverse(const program& p) {
  std::map<std::string, clause> inv;
  for (const auto& c : p.clauses) {
    if (c.id.empty()) throw error("clause without identifier: " + render_clause(c));
    if (!inv.emplace(c.id, c).second) throw error("clause identifier " + c.id + " is not injective");
  }
  return inv;
}

std::string id_source::next() {
  for (;;) {
    std::string candidate = prefix_ + std::to_string(++counter_);
    if (taken_.insert(candidate).second) return candidate;
  }
}

bool is_renaming_clause(const clause& c) {
  if (c.body.size() != 1 || !c.constraints.empty()) return false;
  const atom& b = c.body.front();
  if (b.args != c.head.args) return false;
  std::set<std::string> distinct(b.args.begin(), b.args.end());
  return distinct.size() == b.args.size();
}

}  // namespace horndim
