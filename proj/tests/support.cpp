#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include "horndim/feasibility.hpp"
#include "horndim/instrument.hpp"

namespace testing {

std::string fixture_path(const std::string& name) { return std::string(HORNDIM_FIXTURES) + "/" + name; }

std::string read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name));
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

program load_fixture(const std::string& name) {
  program p = parse_program(read_fixture(name));
  if (!p.clauses.empty() && p.clauses.front().id.empty()) p = assign_clause_ids(std::move(p), "c");
  return p;
}

namespace {

using pred_names = std::function<std::string(const pred_key&)>;

std::string canonical_clause(const clause& c, const pred_names& name) {
  std::map<std::string, std::string> ren;
  auto see = [&](const std::string& v) {
    if (!ren.contains(v)) ren.emplace(v, "v" + std::to_string(ren.size()));
  };
  for (const auto& v : c.head.args) see(v);
  for (const auto& b : c.body)
    for (const auto& v : b.args) see(v);
  for (const auto& v : c.variables()) see(v);

  auto atom_text = [&](const atom& a) {
    std::string s = name(a.pred) + "(";
    for (std::size_t i = 0; i < a.args.size(); ++i) s += (i ? "," : "") + ren.at(a.args[i]);
    return s + ")";
  };
  std::vector<std::string> cs;
  for (const auto& k : c.constraints) {
    lin_term d;
    const lin_term diff = k.difference();
    d.constant = diff.constant;
    for (const auto& [v, x] : diff.coeffs) d += lin_term::var(ren.at(v), x);
    rel r = k.op;
    if (r == rel::le || r == rel::lt) {
      d *= -1;
      r = r == rel::le ? rel::ge : rel::gt;
    }
    if (r == rel::gt) {
      d.constant -= 1;
      r = rel::ge;
    }
    if (r == rel::eq && !d.coeffs.empty() && d.coeffs.begin()->second < 0) d *= -1;
    cs.push_back(render_constraint(make_constraint(d, r, lin_term::num(0))));
  }
  std::sort(cs.begin(), cs.end());
  std::string out = atom_text(c.head) + " :-";
  for (const auto& b : c.body) out += " " + atom_text(b);
  out += " |";
  for (const auto& s : cs) out += " " + s;
  return out;
}

std::vector<std::string> canonical_program(const program& p, const pred_names& name) {
  std::vector<std::string> out;
  for (const auto& c : p.clauses) out.push_back(canonical_clause(c, name));
  std::sort(out.begin(), out.end());
  return out;
}

std::string bracket_name(const pred_key& k) { return render_pred(k, style::bracket); }

}  // namespace

bool isomorphic(const program& a, const program& b, bool rename_predicates) {
  if (a.clauses.size() != b.clauses.size()) return false;
  const auto target = canonical_program(b, bracket_name);
  if (!rename_predicates) return canonical_program(a, bracket_name) == target;

  auto used = [](const program& p) {
    std::map<std::size_t, std::vector<pred_key>> by_arity;
    std::set<pred_key> seen;
    for (const auto& c : p.clauses) {
      std::vector<const atom*> atoms{&c.head};
      for (const auto& x : c.body) atoms.push_back(&x);
      for (const auto* x : atoms)
        if (!x->pred.is_false() && seen.insert(x->pred).second) by_arity[x->args.size()].push_back(x->pred);
    }
    for (auto& [n, ks] : by_arity) std::sort(ks.begin(), ks.end());
    return by_arity;
  };
  auto ga = used(a), gb = used(b);
  if (ga.size() != gb.size()) return false;
  std::vector<std::pair<std::vector<pred_key>, std::vector<pred_key>>> groups;
  for (auto& [n, ks] : ga) {
    auto it = gb.find(n);
    if (it == gb.end() || it->second.size() != ks.size()) return false;
    groups.emplace_back(ks, it->second);
  }
  std::map<pred_key, std::string> mapping;
  std::function<bool(std::size_t)> search = [&](std::size_t g) {
    if (g == groups.size()) {
      return canonical_program(a, [&](const pred_key& k) {
               return k.is_false() ? std::string("false") : mapping.at(k);
             }) == target;
    }
    auto perm = groups[g].second;
    std::sort(perm.begin(), perm.end());
    do {
      for (std::size_t i = 0; i < perm.size(); ++i) mapping[groups[g].first[i]] = bracket_name(perm[i]);
      if (search(g + 1)) return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
  };
  return search(0);
}

std::string describe_mismatch(const program& a, const program& b) {
  std::string out = "left:\n";
  for (const auto& s : canonical_program(a, bracket_name)) out += "  " + s + "\n";
  out += "right:\n";
  for (const auto& s : canonical_program(b, bracket_name)) out += "  " + s + "\n";
  return out;
}

std::vector<trace_tree> all_trees(const std::map<std::string, std::size_t>& symbols, std::size_t max_nodes) {
  std::vector<std::vector<trace_tree>> exact(max_nodes + 1);
  for (std::size_t n = 1; n <= max_nodes; ++n) {
    for (const auto& [sym, arity] : symbols) {
      if (arity == 0) {
        if (n == 1) exact[n].push_back(trace_tree::leaf(sym));
        continue;
      }
      std::function<void(std::size_t, std::vector<trace_tree>&)> fill = [&](std::size_t left,
                                                                           std::vector<trace_tree>& kids) {
        if (kids.size() == arity) {
          if (left == 0) exact[n].push_back({sym, kids});
          return;
        }
        for (std::size_t s = 1; s <= left; ++s)
          for (const auto& t : exact[s]) {
            kids.push_back(t);
            fill(left - s, kids);
            kids.pop_back();
          }
      };
      std::vector<trace_tree> kids;
      fill(n - 1, kids);
    }
  }
  std::vector<trace_tree> out;
  for (auto& level : exact)
    for (auto& t : level) out.push_back(std::move(t));
  return out;
}

std::set<std::string> reachable_states(const fta& a, const trace_tree& t) {
  std::vector<std::set<std::string>> kids;
  for (const auto& c : t.children) kids.push_back(reachable_states(a, c));
  std::set<std::string> out;
  for (const auto& r : a.rules) {
    if (r.symbol != t.label || r.args.size() != kids.size()) continue;
    bool ok = true;
    for (std::size_t i = 0; i < kids.size() && ok; ++i) ok = kids[i].contains(r.args[i]);
    if (ok) out.insert(r.target);
  }
  return out;
}

bool oracle_accepts(const fta& a, const trace_tree& t) {
  for (const auto& q : reachable_states(a, t))
    if (a.final.contains(q)) return true;
  return false;
}

fta random_fta(std::mt19937_64& rng, std::size_t max_states, std::size_t max_rules) {
  const std::vector<std::pair<std::string, std::size_t>> alphabet{{"f", 0}, {"g", 1}, {"h", 2}};
  std::uniform_int_distribution<std::size_t> nstates(1, max_states), nrules(1, max_rules);
  const std::size_t n = nstates(rng);
  std::uniform_int_distribution<std::size_t> pick_state(0, n - 1), pick_sym(0, alphabet.size() - 1);
  std::bernoulli_distribution coin(0.4);
  fta a;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string q = "q" + std::to_string(i);
    a.states.insert(q);
    if (coin(rng)) a.final.insert(q);
  }
  for (const auto& [s, k] : alphabet) a.symbols.emplace(s, k);
  const std::size_t m = nrules(rng);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& [s, k] = alphabet[i == 0 ? 0 : pick_sym(rng)];
    fta_rule r{s, {}, "q" + std::to_string(pick_state(rng))};
    for (std::size_t j = 0; j < k; ++j) r.args.push_back("q" + std::to_string(pick_state(rng)));
    a.add_rule(std::move(r));
  }
  return a;
}

std::vector<lin_constraint> random_conjunction(std::mt19937_64& rng, std::size_t max_vars, std::size_t max_constraints,
                                               integer max_coeff) {
  std::uniform_int_distribution<std::size_t> nv(1, max_vars), nc(1, max_constraints);
  std::uniform_int_distribution<integer> coeff(-max_coeff, max_coeff), constant(-20, 20);
  std::uniform_int_distribution<int> op(0, 4);
  std::bernoulli_distribution sparse(0.35);
  const std::size_t vars = nv(rng), count = nc(rng);
  std::vector<lin_constraint> out;
  for (std::size_t i = 0; i < count; ++i) {
    lin_term lhs;
    for (std::size_t v = 0; v < vars; ++v) {
      if (sparse(rng)) continue;
      lhs += lin_term::var(std::string(1, static_cast<char>('A' + v)), coeff(rng));
    }
    out.push_back(make_constraint(lhs, static_cast<rel>(op(rng)), lin_term::num(constant(rng))));
  }
  return out;
}

std::optional<std::map<std::string, integer>> grid_solution(const std::vector<lin_constraint>& cs, integer range) {
  std::vector<std::string> vars;
  {
    std::set<std::string> s;
    for (const auto& k : cs)
      for (const auto& [v, c] : k.difference().coeffs) s.insert(v);
    vars.assign(s.begin(), s.end());
  }
  std::vector<lin_term> diffs;
  std::vector<rel> ops;
  std::vector<std::size_t> last_var;
  for (const auto& k : cs) {
    diffs.push_back(k.difference());
    ops.push_back(k.op);
    std::size_t last = 0;
    for (std::size_t i = 0; i < vars.size(); ++i)
      if (diffs.back().coeffs.contains(vars[i])) last = i + 1;
    last_var.push_back(last);
  }
  std::map<std::string, integer> value;
  auto eval_rest = [&](const lin_term& d, const std::string& skip) {
    integer s = d.constant;
    for (const auto& [v, c] : d.coeffs)
      if (v != skip) s += c * value.at(v);
    return s;
  };
  auto holds = [](integer x, rel r) {
    switch (r) {
      case rel::eq: return x == 0;
      case rel::ge: return x >= 0;
      case rel::gt: return x > 0;
      case rel::le: return x <= 0;
      case rel::lt: return x < 0;
    }
    return false;
  };
  for (std::size_t i = 0; i < cs.size(); ++i)
    if (last_var[i] == 0 && !holds(diffs[i].constant, ops[i])) return std::nullopt;
  if (vars.empty()) return value;

  std::function<bool(std::size_t)> assign = [&](std::size_t level) -> bool {
    const std::string& v = vars[level];
    if (level + 1 < vars.size()) {
      for (integer x = -range; x <= range; ++x) {
        value[v] = x;
        bool ok = true;
        for (std::size_t i = 0; i < cs.size() && ok; ++i)
          if (last_var[i] == level + 1) ok = holds(eval_rest(diffs[i], ""), ops[i]);
        if (ok && assign(level + 1)) return true;
      }
      return false;
    }
    // The last variable is solved for directly from its bounds.
    integer lo = -range, hi = range;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      if (last_var[i] != level + 1) continue;
      const integer a = diffs[i].coeffs.at(v);
      const integer r = eval_rest(diffs[i], v);
      // a*x + r REL 0
      auto floor_div = [](integer p, integer q) {
        integer d = p / q;
        if ((p % q != 0) && ((p < 0) != (q < 0))) --d;
        return d;
      };
      auto ceil_div = [&](integer p, integer q) { return -floor_div(-p, q); };
      rel op = ops[i];
      integer ra = a, rr = r;
      if (op == rel::le || op == rel::lt) {
        ra = -a;
        rr = -r;
        op = op == rel::le ? rel::ge : rel::gt;
      }
      if (op == rel::gt) {
        rr -= 1;
        op = rel::ge;
      }
      if (op == rel::eq) {
        if (r % a != 0) return false;
        lo = std::max(lo, -r / a);
        hi = std::min(hi, -r / a);
      } else if (ra > 0) {
        lo = std::max(lo, ceil_div(-rr, ra));
      } else {
        hi = std::min(hi, floor_div(rr, -ra));
      }
    }
    if (lo > hi) return false;
    value[v] = lo;
    return true;
  };
  if (!assign(0)) return std::nullopt;
  for (const auto& k : cs)
    if (!k.holds(value)) throw std::logic_error("grid oracle produced a non-solution");
  return value;
}

program random_program(std::mt19937_64& rng, std::size_t max_clauses) {
  std::uniform_int_distribution<std::size_t> nclauses(2, std::max<std::size_t>(2, max_clauses));
  std::uniform_int_distribution<int> small(-3, 3), width(0, 3), guard(-2, 8), scale(-1, 2);
  std::discrete_distribution<int> arity_w{0, 30, 50, 20};
  std::bernoulli_distribution coin(0.5);
  const std::vector<pred_key> preds{pred_key::plain("p"), pred_key::plain("q")};
  auto any_pred = [&] { return preds[coin(rng) ? 1 : 0]; };

  std::vector<clause> cs;
  const std::size_t m = nclauses(rng);
  {
    const integer a = small(rng);
    clause f{{preds[0], {"X"}},
             {make_constraint(lin_term::var("X"), rel::ge, lin_term::num(a)),
              make_constraint(lin_term::var("X"), rel::le, lin_term::num(a + width(rng)))},
             {},
             "",
             std::nullopt};
    cs.push_back(std::move(f));
  }
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const std::size_t r = static_cast<std::size_t>(arity_w(rng));
    clause c{{any_pred(), {"X"}}, {}, {}, "", std::nullopt};
    lin_term rhs = lin_term::num(small(rng));
    for (std::size_t j = 1; j <= r; ++j) {
      const std::string y = "Y" + std::to_string(j);
      c.body.push_back({any_pred(), {y}});
      if (const int s = scale(rng); s != 0) rhs += lin_term::var(y, s);
    }
    c.constraints.push_back(make_constraint(lin_term::var("X"), rel::eq, rhs));
    if (coin(rng)) c.constraints.push_back(make_constraint(lin_term::var("Y1"), rel::ge, lin_term::num(small(rng))));
    cs.push_back(std::move(c));
  }
  {
    clause c{{pred_key::falsum(), {}}, {}, {}, "", std::nullopt};
    const std::size_t r = coin(rng) ? 1 : 2;
    lin_term sum;
    for (std::size_t j = 1; j <= r; ++j) {
      const std::string y = "Y" + std::to_string(j);
      c.body.push_back({j == 1 ? preds[0] : any_pred(), {y}});
      sum += lin_term::var(y);
    }
    c.constraints.push_back(make_constraint(sum, coin(rng) ? rel::gt : rel::lt, lin_term::num(guard(rng))));
    cs.push_back(std::move(c));
  }
  return assign_clause_ids(make_program(std::move(cs)), "c");
}

std::optional<trace_tree> brute_force_counterexample(const program& p, std::size_t max_nodes) {
  for (const auto& rt : enumerate_trace_trees(p, p.accepting, max_nodes)) {
    auto tc = tree_constraint(p, rt.root, rt.tree);
    if (fm_feasible(tc.constraints).status == feasibility_status::integer_witness) return rt.tree;
  }
  return std::nullopt;
}

std::set<trace_tree> trees_only(const std::vector<rooted_tree>& rs) {
  std::set<trace_tree> out;
  for (const auto& r : rs) out.insert(r.tree);
  return out;
}

fidelity_report instrumentation_fidelity(const program& plain, std::size_t max_nodes) {
  const auto inst = instrument_dim(plain);
  const auto kept = plain.ids();
  std::set<pred_key> roots;
  for (const auto& [k, n] : plain.arities)
    if (!k.is_false()) roots.insert(k);

  fidelity_report rep;
  std::set<trace_tree> feasible_skeletons;
  for (const auto& rt : enumerate_trace_trees(inst, roots, max_nodes)) {
    const auto s = strip_dim_leaves(rt.tree, kept);
    const auto tc = tree_constraint(inst, rt.root, rt.tree);
    if (fm_feasible(tc.constraints).status == feasibility_status::infeasible) continue;
    ++rep.feasible;
    feasible_skeletons.insert(s);
    const auto k = lin_term::var(tc.head_args.back());
    const auto d = static_cast<integer>(tree_dim(s));
    for (auto off : {make_constraint(k, rel::le, lin_term::num(d - 1)), make_constraint(k, rel::ge, lin_term::num(d + 1))}) {
      auto cs = tc.constraints;
      cs.push_back(off);
      if (fm_feasible(cs).status != feasibility_status::infeasible) {
        rep.mismatches.push_back(to_string(rt.tree));
        break;
      }
    }
  }
  // Each plain node gains exactly one dim leaf.
  for (const auto& rt : enumerate_trace_trees(plain, roots, max_nodes / 2)) {
    const auto tc = tree_constraint(plain, rt.root, rt.tree);
    if (fm_feasible(tc.constraints).status == feasibility_status::infeasible) continue;
    if (!feasible_skeletons.contains(rt.tree)) rep.missing.push_back(to_string(rt.tree));
  }
  return rep;
}

trace_tree strip_dim_leaves(const trace_tree& t, const std::set<std::string>& kept) {
  trace_tree out{t.label, {}};
  for (const auto& c : t.children)
    if (kept.contains(c.label)) out.children.push_back(strip_dim_leaves(c, kept));
  return out;
}

}  // namespace testing
