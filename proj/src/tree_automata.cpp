#include "horndim/tree_automata.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

#include "horndim/decompose.hpp"

namespace horndim {

void fta::add_rule(fta_rule r) {
  auto [it, inserted] = symbols.emplace(r.symbol, r.args.size());
  if (!inserted && it->second != r.args.size())
    throw error("symbol " + r.symbol + " used with different arities");
  for (const auto& q : r.args) states.insert(q);
  states.insert(r.target);
  rules.insert(std::move(r));
}

void fta::check() const {
  for (const auto& f : final)
    if (!states.contains(f)) throw error("final state " + f + " is not a state");
  for (const auto& r : rules) {
    auto it = symbols.find(r.symbol);
    if (it == symbols.end() || it->second != r.args.size())
      throw error("rule symbol arity mismatch for " + r.symbol);
    if (!states.contains(r.target)) throw error("rule target is not a state");
    for (const auto& q : r.args)
      if (!states.contains(q)) throw error("rule argument is not a state");
  }
}

void dfta::check_deterministic() const {
  for (std::size_t i = 0; i < rules.size(); ++i) {
    for (std::size_t j = i + 1; j < rules.size(); ++j) {
      const auto& a = rules[i];
      const auto& b = rules[j];
      if (a.symbol != b.symbol || a.args.size() != b.args.size()) continue;
      bool overlap = true;
      for (std::size_t s = 0; s < a.args.size() && overlap; ++s) {
        overlap = std::any_of(a.args[s].begin(), a.args[s].end(),
                              [&](const subset_state& q) { return b.args[s].contains(q); });
      }
      if (overlap) throw error("non-deterministic product rules for symbol " + a.symbol);
    }
  }
}

std::size_t dfta::expanded_size() const {
  std::size_t n = 0;
  for (const auto& r : rules) {
    std::size_t m = 1;
    for (const auto& s : r.args) m *= s.size();
    n += m;
  }
  return n;
}

std::string state_name(const pred_key& key) { return render_pred(key, style::bracket); }

fta trace_fta(const program& p, std::optional<std::set<pred_key>> final) {
  fta a;
  for (const auto& [k, n] : p.arities) a.states.insert(state_name(k));
  for (const auto& c : p.clauses) {
    if (c.id.empty()) throw error("trace automaton needs clause ids");
    fta_rule r{c.id, {}, state_name(c.head.pred)};
    for (const auto& b : c.body) r.args.push_back(state_name(b.pred));
    a.add_rule(std::move(r));
  }
  for (const auto& f : final.value_or(p.accepting)) {
    a.states.insert(state_name(f));
    a.final.insert(state_name(f));
  }
  a.check();
  return a;
}

fta_run run(const fta& a, const trace_tree& t) {
  auto sym = a.symbols.find(t.label);
  if (sym == a.symbols.end()) throw error("unknown symbol " + t.label);
  std::vector<fta_run> kids;
  for (const auto& c : t.children) kids.push_back(run(a, c));
  fta_run out;
  if (sym->second == t.children.size()) {
    for (const auto& r : a.rules) {
      if (r.symbol != t.label) continue;
      bool ok = true;
      for (std::size_t i = 0; i < r.args.size() && ok; ++i) ok = kids[i].states.contains(r.args[i]);
      if (ok) out.states.insert(r.target);
    }
  }
  for (const auto& q : out.states) out.accepted = out.accepted || a.final.contains(q);
  return out;
}

dfta_run run(const dfta& a, const trace_tree& t) {
  auto sym = a.symbols.find(t.label);
  if (sym == a.symbols.end()) throw error("unknown symbol " + t.label);
  std::vector<dfta_run> kids;
  for (const auto& c : t.children) {
    kids.push_back(run(a, c));
    if (!kids.back().state) return {};
  }
  if (sym->second != t.children.size()) return {};
  for (const auto& r : a.rules) {
    if (r.symbol != t.label) continue;
    bool ok = true;
    for (std::size_t i = 0; i < r.args.size() && ok; ++i) ok = r.args[i].contains(*kids[i].state);
    if (ok) return {a.final.contains(r.target), r.target};
  }
  return {};
}

fta fta_union(const fta& a, const fta& b) {
  fta u = a;
  for (const auto& q : b.states) u.states.insert(q);
  for (const auto& q : b.final) u.final.insert(q);
  for (const auto& r : b.rules) u.add_rule(r);
  for (const auto& [s, n] : b.symbols) {
    auto [it, inserted] = u.symbols.emplace(s, n);
    if (!inserted && it->second != n) throw error("symbol " + s + " has different arities");
  }
  return u;
}

namespace {

using tuple = std::vector<int>;
using product = std::vector<std::set<int>>;

// Splits a set of equal-length tuples into disjoint products covering it exactly.
std::vector<product> factor(const std::set<tuple>& tuples, std::size_t n) {
  if (tuples.empty()) return {};
  if (n == 0) return {product{}};
  if (n == 1) {
    std::set<int> firsts;
    for (const auto& t : tuples) firsts.insert(t[0]);
    return {product{firsts}};
  }
  std::map<tuple, std::set<int>> by_suffix;
  for (const auto& t : tuples) by_suffix[tuple(t.begin() + 1, t.end())].insert(t[0]);
  std::map<std::set<int>, std::set<tuple>> by_first;
  for (const auto& [suffix, firsts] : by_suffix) by_first[firsts].insert(suffix);
  std::vector<product> out;
  for (const auto& [firsts, suffixes] : by_first) {
    for (auto& rest : factor(suffixes, n - 1)) {
      product p{firsts};
      p.insert(p.end(), rest.begin(), rest.end());
      out.push_back(std::move(p));
    }
  }
  return out;
}

dfta subset_construction(const fta& a, const std::function<bool(const subset_state&)>& is_final) {
  std::vector<std::string> names(a.states.begin(), a.states.end());
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = static_cast<int>(i);

  struct irule {
    std::vector<int> args;
    int target;
  };
  std::map<std::string, std::vector<irule>> by_symbol;
  for (const auto& r : a.rules) {
    irule ir{{}, index.at(r.target)};
    for (const auto& q : r.args) ir.args.push_back(index.at(q));
    by_symbol[r.symbol].push_back(std::move(ir));
  }

  std::vector<std::vector<int>> subsets;
  std::vector<std::vector<bool>> member;
  std::map<std::vector<int>, int> subset_index;
  auto intern = [&](std::vector<int> s) {
    auto [it, inserted] = subset_index.emplace(s, static_cast<int>(subsets.size()));
    if (inserted) {
      std::vector<bool> m(names.size(), false);
      for (int q : s) m[q] = true;
      subsets.push_back(std::move(s));
      member.push_back(std::move(m));
    }
    return it->second;
  };

  // (symbol, argument tuple) -> target subset; only non-empty targets are kept.
  std::map<std::pair<std::string, tuple>, int> delta;
  std::set<std::pair<std::string, tuple>> visited;
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& [sym, arity] : a.symbols) {
      const auto& rs = by_symbol[sym];
      const std::size_t known = subsets.size();
      if (arity > 0 && known == 0) continue;
      tuple odo(arity, 0);
      for (;;) {
        if (visited.insert({sym, odo}).second) {
          std::vector<bool> hit(names.size(), false);
          for (const auto& r : rs) {
            bool ok = true;
            for (std::size_t i = 0; i < arity && ok; ++i) ok = member[odo[i]][r.args[i]];
            if (ok) hit[r.target] = true;
          }
          std::vector<int> target;
          for (std::size_t q = 0; q < hit.size(); ++q)
            if (hit[q]) target.push_back(static_cast<int>(q));
          if (!target.empty()) {
            const std::size_t before = subsets.size();
            delta[{sym, odo}] = intern(std::move(target));
            grew = grew || subsets.size() > before;
          }
        }
        std::size_t i = 0;
        while (i < arity && ++odo[i] == static_cast<int>(known)) odo[i++] = 0;
        if (i == arity) break;
      }
    }
  }

  auto as_names = [&](int s) {
    subset_state out;
    for (int q : subsets[s]) out.push_back(names[q]);
    std::sort(out.begin(), out.end());
    return out;
  };

  dfta d;
  d.symbols = a.symbols;
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    auto st = as_names(static_cast<int>(s));
    if (is_final(st)) d.final.insert(st);
    d.states.insert(std::move(st));
  }
  std::map<std::pair<std::string, int>, std::set<tuple>> grouped;
  for (const auto& [key, target] : delta) grouped[{key.first, target}].insert(key.second);
  for (const auto& [key, tuples] : grouped) {
    for (const auto& prod : factor(tuples, a.symbols.at(key.first))) {
      product_rule r{key.first, {}, as_names(key.second)};
      for (const auto& slot : prod) {
        std::set<subset_state> ss;
        for (int s : slot) ss.insert(as_names(s));
        r.args.push_back(std::move(ss));
      }
      d.rules.push_back(std::move(r));
    }
  }
  std::sort(d.rules.begin(), d.rules.end());
  return d;
}

std::string strip_primes(std::string s) {
  while (!s.empty() && s.back() == '\'') s.pop_back();
  return s;
}

std::string base_of_state(const std::string& name) {
  if (auto k = parse_pred_name(strip_primes(name))) return k->base;
  std::string out;
  for (char ch : name) {
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_') out += ch;
    else break;
  }
  if (out.empty() || !std::islower(static_cast<unsigned char>(out[0]))) out = "q" + out;
  return out;
}

}  // namespace

dfta determinize(const fta& a) {
  a.check();
  return subset_construction(a, [&](const subset_state& s) {
    return std::any_of(s.begin(), s.end(), [&](const std::string& q) { return a.final.contains(q); });
  });
}

dfta difference(const fta& a, const fta& b) {
  a.check();
  b.check();
  // Standardise apart: prime every state of b that also names a state of a.
  std::map<std::string, std::string> ren;
  std::set<std::string> used = a.states;
  for (const auto& q : b.states) used.insert(q);
  for (const auto& q : b.states) {
    if (!a.states.contains(q)) continue;
    std::string r = q;
    do {
      r += "'";
    } while (used.contains(r));
    used.insert(r);
    ren[q] = r;
  }
  auto rn = [&](const std::string& q) {
    auto it = ren.find(q);
    return it == ren.end() ? q : it->second;
  };
  fta b2;
  b2.symbols = b.symbols;
  for (const auto& q : b.states) b2.states.insert(rn(q));
  for (const auto& q : b.final) b2.final.insert(rn(q));
  for (const auto& r : b.rules) {
    fta_rule r2{r.symbol, {}, rn(r.target)};
    for (const auto& q : r.args) r2.args.push_back(rn(q));
    b2.add_rule(std::move(r2));
  }
  fta u = fta_union(a, b2);
  dfta d = subset_construction(u, [&](const subset_state& s) {
    bool in_a = false;
    for (const auto& q : s) {
      if (b2.final.contains(q)) return false;
      in_a = in_a || a.final.contains(q);
    }
    return in_a;
  });
  return trim(d);
}

dfta trim(const dfta& a) {
  std::set<subset_state> reachable;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& r : a.rules) {
      if (reachable.contains(r.target)) continue;
      bool fires = true;
      for (const auto& slot : r.args)
        fires = fires && std::any_of(slot.begin(), slot.end(),
                                     [&](const subset_state& q) { return reachable.contains(q); });
      if (fires) {
        reachable.insert(r.target);
        changed = true;
      }
    }
  }
  std::set<subset_state> useful;
  for (const auto& f : a.final)
    if (reachable.contains(f)) useful.insert(f);
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& r : a.rules) {
      if (!useful.contains(r.target)) continue;
      bool fires = true;
      for (const auto& slot : r.args)
        fires = fires && std::any_of(slot.begin(), slot.end(),
                                     [&](const subset_state& q) { return reachable.contains(q); });
      if (!fires) continue;
      for (const auto& slot : r.args)
        for (const auto& q : slot)
          if (reachable.contains(q)) changed = useful.insert(q).second || changed;
    }
  }
  dfta out;
  out.symbols = a.symbols;
  out.states = useful;
  for (const auto& f : a.final)
    if (useful.contains(f)) out.final.insert(f);
  for (const auto& r : a.rules) {
    if (!useful.contains(r.target)) continue;
    product_rule r2{r.symbol, {}, r.target};
    bool ok = true;
    for (const auto& slot : r.args) {
      std::set<subset_state> kept;
      for (const auto& q : slot)
        if (useful.contains(q)) kept.insert(q);
      ok = ok && !kept.empty();
      r2.args.push_back(std::move(kept));
    }
    if (ok) out.rules.push_back(std::move(r2));
  }
  return out;
}

namespace {

clause instantiate(const clause& origin, atom head_pred_only, std::vector<pred_key> body_preds,
                   const std::string& symbol) {
  if (origin.body.size() != body_preds.size())
    throw error("clause arity does not match symbol " + symbol);
  clause c = origin;
  c.head.pred = head_pred_only.pred;
  for (std::size_t j = 0; j < body_preds.size(); ++j) c.body[j].pred = body_preds[j];
  c.id = symbol;
  c.origin.reset();
  return c;
}

const clause& lookup(const std::map<std::string, clause>& id_inv, const std::string& symbol) {
  auto it = id_inv.find(symbol);
  if (it == id_inv.end()) throw error("symbol " + symbol + " has no clause");
  return it->second;
}

}  // namespace

program chc_of_fta(const fta& a, const std::map<std::string, clause>& id_inv) {
  std::map<std::string, pred_key> pred;
  std::set<pred_key> used;
  std::map<std::string, unsigned> counter;
  for (const auto& q : a.states) {
    auto key = parse_pred_name(q);
    if (!key || used.contains(*key)) {
      const std::string base = base_of_state(q);
      do {
        key = pred_key::fresh(base, counter[base]++);
      } while (used.contains(*key));
    }
    used.insert(*key);
    pred.emplace(q, *key);
  }
  std::vector<clause> out;
  for (const auto& r : a.rules) {
    std::vector<pred_key> body;
    for (const auto& q : r.args) body.push_back(pred.at(q));
    out.push_back(instantiate(lookup(id_inv, r.symbol), atom{pred.at(r.target), {}}, body, r.symbol));
  }
  std::set<pred_key> accepting;
  for (const auto& f : a.final) accepting.insert(pred.at(f));
  return make_program(std::move(out), accepting);
}

program chc_of_fta(const dfta& input, const std::map<std::string, clause>& id_inv) {
  const dfta a = trim(input);
  std::map<std::string, unsigned> counter;
  std::set<pred_key> used;
  auto fresh_key = [&](const std::string& base) {
    pred_key k;
    do {
      k = pred_key::fresh(base, counter[base]++);
    } while (used.contains(k));
    used.insert(k);
    return k;
  };
  auto least_base = [](const auto& members) {
    std::string best;
    for (const auto& q : members) {
      const std::string b = base_of_state(q);
      if (best.empty() || b < best) best = b;
    }
    return best;
  };

  std::map<subset_state, pred_key> pred;
  // Singletons of plain names and final integrity states keep their names.
  for (const auto& s : a.states) {
    const bool final = a.final.contains(s);
    const bool all_false = std::all_of(s.begin(), s.end(),
                                       [](const std::string& q) { return base_of_state(q) == "false"; });
    if (final && all_false) {
      pred.emplace(s, pred_key::falsum());
      used.insert(pred_key::falsum());
    } else if (s.size() == 1 && s[0].back() != '\'') {
      auto k = parse_pred_name(s[0]);
      if (k && k->is_plain() && !k->is_false() && !used.contains(*k)) {
        pred.emplace(s, *k);
        used.insert(*k);
      }
    }
  }
  for (const auto& s : a.states)
    if (!pred.contains(s)) pred.emplace(s, fresh_key(least_base(s)));

  std::map<std::set<subset_state>, pred_key> unions;
  std::vector<std::set<subset_state>> union_order;
  std::map<pred_key, std::size_t> union_arity;
  std::vector<clause> out;
  for (const auto& r : a.rules) {
    const clause& origin = lookup(id_inv, r.symbol);
    if (origin.body.size() != r.args.size()) throw error("clause arity does not match symbol " + r.symbol);
    std::vector<pred_key> body;
    for (std::size_t j = 0; j < r.args.size(); ++j) {
      const auto& slot = r.args[j];
      if (slot.size() == 1) {
        body.push_back(pred.at(*slot.begin()));
        continue;
      }
      auto it = unions.find(slot);
      if (it == unions.end()) {
        std::set<std::string> members;
        for (const auto& s : slot) members.insert(s.begin(), s.end());
        it = unions.emplace(slot, fresh_key(least_base(members))).first;
        union_order.push_back(slot);
        union_arity[it->second] = origin.body[j].args.size();
      }
      body.push_back(it->second);
    }
    out.push_back(instantiate(origin, atom{pred.at(r.target), {}}, body, r.symbol));
  }

  std::set<std::string> taken;
  for (const auto& [s, c] : id_inv) taken.insert(s);
  for (const auto& [s, n] : a.symbols) taken.insert(s);
  id_source fresh_id("e", taken);
  for (const auto& slot : union_order) {
    const pred_key& u = unions.at(slot);
    const auto vars = standard_vars(union_arity.at(u));
    for (const auto& s : slot) {
      clause c;
      c.head = {u, vars};
      c.body = {{pred.at(s), vars}};
      c.id = fresh_id.next();
      out.push_back(std::move(c));
    }
  }
  std::set<pred_key> accepting;
  for (const auto& f : a.final) accepting.insert(pred.at(f));
  return make_program(std::move(out), accepting);
}

program at_least_via_fta(const program& p, unsigned k) {
  if (!p.has_integrity()) throw error("at_least_via_fta: program has no integrity constraints");
  const auto inv = id_inverse(p);
  const program pk = at_most_k_unfolded(p, k);
  const fta a = trace_fta(p, std::set<pred_key>{pred_key::falsum()});
  const fta b = trace_fta(pk, std::set<pred_key>{pred_key::falsum().with_tag(annot::at_most, k)});
  return chc_of_fta(difference(a, b), inv);
}

std::string render_subset(const subset_state& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? ", " : "") + s[i];
  return out + "]";
}

std::string render_fta(const fta& a) {
  std::ostringstream os;
  for (const auto& r : a.rules) {
    os << r.symbol;
    if (!r.args.empty()) {
      os << "(";
      for (std::size_t i = 0; i < r.args.size(); ++i) os << (i ? "," : "") << r.args[i];
      os << ")";
    }
    os << " -> " << r.target << ".\n";
  }
  os << "final:";
  for (const auto& f : a.final) os << " " << f;
  os << ".\n";
  return os.str();
}

std::string render_dfta(const dfta& a) {
  std::ostringstream os;
  for (const auto& r : a.rules) {
    os << r.symbol;
    if (!r.args.empty()) {
      os << "(";
      for (std::size_t i = 0; i < r.args.size(); ++i) {
        os << (i ? ", " : "") << "[";
        bool first = true;
        for (const auto& s : r.args[i]) {
          os << (first ? "" : ", ") << render_subset(s);
          first = false;
        }
        os << "]";
      }
      os << ")";
    }
    os << " -> " << render_subset(r.target) << ".\n";
  }
  os << "final:";
  for (const auto& f : a.final) os << " " << render_subset(f);
  os << ".\n";
  return os.str();
}

}  // namespace horndim
