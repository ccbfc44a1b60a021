#include <algorithm>
#include <functional>
#include <map>

#include "horndim/verify.hpp"

namespace horndim {

std::string_view to_string(verdict v) {
  switch (v) {
    case verdict::safe: return "safe";
    case verdict::unsafe: return "unsafe";
    case verdict::unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(branch b) { return b == branch::at_most ? "at-most" : "at-least"; }

std::set<pred_key> query_roots(const program& p) { return p.accepting; }

oracle_verdict trivial_safe(const program& p) {
  const auto roots = query_roots(p);
  std::set<pred_key> productive;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& c : p.clauses) {
      if (productive.contains(c.head.pred)) continue;
      if (std::all_of(c.body.begin(), c.body.end(), [&](const atom& b) { return productive.contains(b.pred); }))
        changed = productive.insert(c.head.pred).second || changed;
    }
  }
  for (const auto& r : roots)
    if (productive.contains(r)) return {};
  return {verdict::safe, std::nullopt, "no derivation of an accepting predicate exists"};
}

namespace {

// Every derivation of `pred`, or nullopt once more than `limit` exist.
bool all_derivations(const program& p, const pred_key& pred, const std::set<std::size_t>& useful,
                     std::map<pred_key, std::vector<derivation>>& memo, std::size_t limit) {
  if (memo.contains(pred)) return true;
  std::vector<derivation> out;
  for (std::size_t i : useful) {
    const clause& c = p.clauses[i];
    if (c.head.pred != pred) continue;
    std::vector<std::vector<derivation>> partial{{}};
    for (const auto& b : c.body) {
      if (!all_derivations(p, b.pred, useful, memo, limit)) return false;
      std::vector<std::vector<derivation>> next;
      for (const auto& pre : partial) {
        for (const auto& d : memo.at(b.pred)) {
          next.push_back(pre);
          next.back().push_back(d);
          if (next.size() > limit) return false;
        }
      }
      partial = std::move(next);
    }
    for (auto& ch : partial) out.push_back(derivation{i, std::move(ch)});
    if (out.size() > limit) return false;
  }
  memo[pred] = std::move(out);
  return true;
}

}  // namespace

oracle_verdict exhaustive_safe(const program& p, std::size_t max_derivations, const fm_options& fm) {
  std::set<pred_key> productive;
  std::set<std::size_t> useful;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < p.clauses.size(); ++i) {
      const clause& c = p.clauses[i];
      if (useful.contains(i)) continue;
      if (std::all_of(c.body.begin(), c.body.end(), [&](const atom& b) { return productive.contains(b.pred); })) {
        useful.insert(i);
        productive.insert(c.head.pred);
        changed = true;
      }
    }
  }

  // Depth-first search for a cycle among predicates reachable from the roots.
  std::map<pred_key, int> colour;
  std::function<bool(const pred_key&)> cyclic = [&](const pred_key& k) {
    auto& col = colour[k];
    if (col == 1) return true;
    if (col == 2) return false;
    col = 1;
    for (std::size_t i : useful)
      if (p.clauses[i].head.pred == k)
        for (const auto& b : p.clauses[i].body)
          if (cyclic(b.pred)) return true;
    colour[k] = 2;
    return false;
  };
  const auto roots = query_roots(p);
  for (const auto& r : roots)
    if (cyclic(r)) return {verdict::unknown, std::nullopt, "recursive program"};

  std::map<pred_key, std::vector<derivation>> memo;
  bool rational = false;
  for (const auto& r : roots) {
    if (!productive.contains(r)) continue;
    if (!all_derivations(p, r, useful, memo, max_derivations))
      return {verdict::unknown, std::nullopt, "too many derivations"};
    for (const auto& d : memo.at(r)) {
      auto f = fm_feasible(derivation_constraint(p, d).constraints, fm);
      if (f.status == feasibility_status::integer_witness)
        return {verdict::unsafe, skeleton(p, d), "feasible counterexample found"};
      rational |= f.status == feasibility_status::rational_feasible;
    }
  }
  if (rational) return {verdict::unknown, std::nullopt, "some derivations are only rationally feasible"};
  return {verdict::safe, std::nullopt, "every derivation of an accepting predicate is infeasible"};
}

namespace {

std::string slot(std::size_t i) { return "@" + std::to_string(i); }

lin_term rename_term(const lin_term& t, const std::function<std::string(const std::string&)>& f) {
  lin_term r = lin_term::num(t.constant);
  for (const auto& [v, k] : t.coeffs) r += lin_term::var(f(v), k);
  return r;
}

lin_constraint rename_constraint(const lin_constraint& c, const std::function<std::string(const std::string&)>& f) {
  return make_constraint(rename_term(c.lhs, f), c.op, rename_term(c.rhs, f));
}

struct entry {
  derivation deriv;
  std::vector<lin_constraint> proj;
};

using entry_table = std::map<pred_key, std::vector<entry>>;

// Derivations grouped by cost; a subtree is represented once per distinct
// projection of its constraint onto the head arguments.
class bounded_search {
public:
  bounded_search(const program& p, const fm_options& fm) : p_(p), fm_(fm), roots_(query_roots(p)) {}

  oracle_verdict run(std::size_t max_nodes) {
    by_cost_.assign(max_nodes + 1, {});
    for (std::size_t n = 1; n <= max_nodes; ++n) {
      for (std::size_t i = 0; i < p_.clauses.size(); ++i) {
        const clause& c = p_.clauses[i];
        if (is_renaming_clause(c) && !c.body.empty()) continue;
        if (c.body.empty()) {
          if (n == 1 && offer(n, i, {}, {})) return found_;
          continue;
        }
        if (n - 1 < c.body.size()) continue;
        std::vector<std::size_t> sizes;
        if (combine_sizes(n, i, n - 1, sizes)) return found_;
      }
      // Renaming clauses cost nothing: close the level under them.
      for (std::size_t done = 0;;) {
        std::vector<std::pair<pred_key, entry>> fresh;
        std::size_t total = 0;
        for (const auto& [k, es] : by_cost_[n]) total += es.size();
        if (total == done) break;
        done = total;
        for (std::size_t i = 0; i < p_.clauses.size(); ++i) {
          const clause& c = p_.clauses[i];
          if (!is_renaming_clause(c) || c.body.empty()) continue;
          auto it = by_cost_[n].find(c.body.front().pred);
          if (it == by_cost_[n].end()) continue;
          for (const auto& e : it->second) fresh.emplace_back(c.head.pred, entry{derivation{i, {e.deriv}}, e.proj});
        }
        for (auto& [k, e] : fresh)
          if (admit(n, k, std::move(e))) return found_;
        std::size_t after = 0;
        for (const auto& [k, es] : by_cost_[n]) after += es.size();
        if (after == done) break;
      }
      if (gave_up_) break;
    }
    oracle_verdict out;
    out.diagnostic = gave_up_ ? "search budget exhausted" : "no counterexample within the node budget";
    if (!skipped_.empty()) out.diagnostic += "; " + skipped_;
    return out;
  }

private:
  bool combine_sizes(std::size_t n, std::size_t ci, std::size_t remaining, std::vector<std::size_t>& sizes) {
    const clause& c = p_.clauses[ci];
    const std::size_t slots_left = c.body.size() - sizes.size();
    if (slots_left == 0) {
      if (remaining != 0) return false;
      std::vector<const entry*> pick;
      return combine_entries(n, ci, sizes, pick);
    }
    for (std::size_t s = 1; s + (slots_left - 1) <= remaining; ++s) {
      sizes.push_back(s);
      if (combine_sizes(n, ci, remaining - s, sizes)) return true;
      sizes.pop_back();
    }
    return false;
  }

  bool combine_entries(std::size_t n, std::size_t ci, const std::vector<std::size_t>& sizes,
                       std::vector<const entry*>& pick) {
    const clause& c = p_.clauses[ci];
    const std::size_t j = pick.size();
    if (j == c.body.size()) {
      std::vector<derivation> children;
      std::vector<const std::vector<lin_constraint>*> projs;
      for (const auto* e : pick) {
        children.push_back(e->deriv);
        projs.push_back(&e->proj);
      }
      return offer(n, ci, std::move(children), projs);
    }
    auto it = by_cost_[sizes[j]].find(c.body[j].pred);
    if (it == by_cost_[sizes[j]].end()) return false;
    for (const auto& e : it->second) {
      if (gave_up_) return false;
      pick.push_back(&e);
      if (combine_entries(n, ci, sizes, pick)) return true;
      pick.pop_back();
    }
    return false;
  }

  bool offer(std::size_t n, std::size_t ci, std::vector<derivation> children,
             const std::vector<const std::vector<lin_constraint>*>& projs) {
    if (++work_ > work_limit) {
      gave_up_ = true;
      return false;
    }
    const clause& c = p_.clauses[ci];
    auto local = [](const std::string& v) { return "#" + v; };
    std::vector<lin_constraint> cs;
    for (const auto& k : c.constraints) cs.push_back(rename_constraint(k, local));
    for (std::size_t j = 0; j < projs.size(); ++j) {
      const auto& args = c.body[j].args;
      auto bind = [&](const std::string& v) {
        // Child projections only mention head slots.
        return local(args.at(std::stoul(v.substr(1))));
      };
      for (const auto& k : *projs[j]) cs.push_back(rename_constraint(k, bind));
    }
    std::set<std::string> keep;
    for (std::size_t a = 0; a < c.head.args.size(); ++a) {
      cs.push_back(make_constraint(lin_term::var(slot(a)), rel::eq, lin_term::var(local(c.head.args[a]))));
      keep.insert(slot(a));
    }
    auto pr = fm_project(cs, keep, fm_);
    if (pr.status == projection_status::infeasible) return false;
    if (pr.status == projection_status::gave_up) {
      skipped_ = "some subtrees were skipped after projection overflow";
      return false;
    }
    return admit(n, c.head.pred, entry{derivation{ci, std::move(children)}, std::move(pr.constraints)});
  }

  bool admit(std::size_t n, const pred_key& head, entry e) {
    if (roots_.contains(head) && seen_roots_.insert(skeleton(p_, e.deriv)).second) {
      auto tc = derivation_constraint(p_, e.deriv);
      auto f = fm_feasible(tc.constraints, fm_);
      if (f.status == feasibility_status::integer_witness) {
        found_ = {verdict::unsafe, skeleton(p_, e.deriv), "feasible counterexample found"};
        return true;
      }
      if (f.budget_exhausted) skipped_ = "integer witness search budget exhausted on some trees";
    }
    if (!seen_.emplace(head, e.proj).second) return false;
    by_cost_[n][head].push_back(std::move(e));
    return false;
  }

  static constexpr std::size_t work_limit = 2'000'000;

  const program& p_;
  const fm_options& fm_;
  std::set<pred_key> roots_;
  std::vector<entry_table> by_cost_;
  std::set<std::pair<pred_key, std::vector<lin_constraint>>> seen_;
  std::set<trace_tree> seen_roots_;
  std::size_t work_ = 0;
  bool gave_up_ = false;
  std::string skipped_;
  oracle_verdict found_;
};

}  // namespace

oracle_verdict bounded_unsafe(const program& p, std::size_t max_nodes, const fm_options& fm) {
  if (query_roots(p).empty()) return {};
  return bounded_search(p, fm).run(max_nodes);
}

bool is_feasible_counterexample(const program& p, const trace_tree& t, const fm_options& fm) {
  for (const auto& r : query_roots(p)) {
    auto d = resolve_tree(p, r, t);
    if (!d) continue;
    auto f = fm_feasible(derivation_constraint(p, *d).constraints, fm);
    if (f.status == feasibility_status::integer_witness) return true;
  }
  return false;
}

oracle compose(std::vector<oracle> oracles) {
  return [oracles = std::move(oracles)](const program& p) {
    oracle_verdict last;
    for (const auto& o : oracles) {
      auto v = o(p);
      if (v.result != verdict::unknown) return v;
      if (!v.diagnostic.empty()) last.diagnostic = v.diagnostic;
    }
    return last;
  };
}

}  // namespace horndim
