#include <future>

#include "horndim/decompose.hpp"
#include "horndim/tree_automata.hpp"
#include "horndim/verify.hpp"

namespace horndim {

namespace {

// Maps ids of the current program to ids of the input; an empty target marks
// a unary helper clause that is spliced out of witnesses.
using id_map = std::map<std::string, std::string>;

std::optional<trace_tree> to_input_tree(const trace_tree& t, const id_map& ids) {
  auto it = ids.find(t.label);
  if (it == ids.end() || it->second.empty()) {
    if (t.children.size() != 1) return std::nullopt;
    return to_input_tree(t.children.front(), ids);
  }
  trace_tree out{it->second, {}};
  for (const auto& c : t.children) {
    auto m = to_input_tree(c, ids);
    if (!m) return std::nullopt;
    out.children.push_back(std::move(*m));
  }
  return out;
}

// The next iteration's program: the at-least program with plain predicate
// names, its accepting predicates turned into false, and fresh injective ids.
std::pair<program, id_map> flatten(const program& q, const id_map& ids, unsigned k) {
  for (const auto& f : q.accepting)
    if (auto it = q.arities.find(f); it != q.arities.end() && it->second != 0)
      throw error("cannot shrink: accepting predicate with arguments");
  std::map<pred_key, pred_key> renaming;
  std::set<pred_key> used;
  for (const auto& [key, n] : q.arities) {
    if (q.accepting.contains(key) || key.is_false()) continue;
    pred_key r = key.is_plain() ? key : pred_key::plain(render_pred(key, style::ascii));
    while (used.contains(r) || r.is_false()) r.base += "_";
    used.insert(r);
    renaming.emplace(key, r);
  }
  for (const auto& f : q.accepting) renaming.emplace(f, pred_key::falsum());

  std::vector<clause> clauses;
  id_map next_ids;
  std::size_t i = 0;
  for (const auto& c : q.clauses) {
    // Integrity clauses that are not queries of q play no part.
    if (c.is_integrity() && !q.accepting.contains(c.head.pred)) continue;
    clause r = c;
    r.head.pred = renaming.at(c.head.pred);
    for (auto& b : r.body) b.pred = renaming.at(b.pred);
    r.origin.reset();
    r.id = "s" + std::to_string(k) + "_" + std::to_string(++i);
    auto it = ids.find(c.id);
    next_ids[r.id] = it == ids.end() ? std::string() : it->second;
    clauses.push_back(std::move(r));
  }
  return {make_program(std::move(clauses)), std::move(next_ids)};
}

struct branch_answer {
  oracle_verdict v;
  std::optional<trace_tree> witness;
  std::string failure;
};

}  // namespace

verify_outcome verify_loop(const program& p, const oracle& safe, const verify_options& opts) {
  if (!p.has_ids()) throw error("verify_loop needs clause identifiers");
  verify_outcome out;
  if (!p.has_integrity()) {
    out.result = verdict::safe;
    out.resolved_k = 0;
    out.side = branch::at_most;
    out.diagnostic = "no integrity constraints";
    return out;
  }

  program cur = p;
  id_map ids;
  for (const auto& id : p.ids()) ids[id] = id;

  auto finish = [&](const oracle_verdict& v, unsigned k, branch b) {
    out.result = v.result;
    out.resolved_k = k;
    out.side = b;
    out.diagnostic = v.diagnostic;
    if (v.result == verdict::unsafe && v.witness) {
      auto t = to_input_tree(*v.witness, ids);
      if (!t || !is_feasible_counterexample(p, *t)) {
        out.result = verdict::unknown;
        out.resolved_k.reset();
        out.side.reset();
        out.diagnostic = "oracle witness " + to_string(*v.witness) + " does not re-validate";
        return out;
      }
      out.witness = std::move(t);
    }
    return out;
  };

  for (unsigned k = 0; k <= opts.k_max; ++k) {
    if (!cur.has_integrity()) {
      out.result = verdict::safe;
      out.resolved_k = k;
      out.side = branch::at_most;
      out.diagnostic = "no integrity constraints left";
      return out;
    }
    auto build_at_least = [&] {
      return opts.mode == at_least_mode::direct ? at_least_k_direct(cur, k) : at_least_via_fta(cur, k);
    };
    program at_most = at_most_k_unfolded(cur, k);
    std::optional<program> at_least;
    oracle_verdict low, high;
    if (opts.parallel) {
      at_least = build_at_least();
      auto lo = std::async(std::launch::async, [&] { return safe(at_most); });
      auto hi = std::async(std::launch::async, [&] { return safe(*at_least); });
      low = lo.get();
      high = hi.get();
    } else {
      low = safe(at_most);
    }
    if (low.result != verdict::safe) return finish(low, k, branch::at_most);
    if (!opts.parallel) {
      at_least = build_at_least();
      high = safe(*at_least);
    }
    if (high.result != verdict::unknown) return finish(high, k, branch::at_least);
    if (opts.shrink) {
      auto [next, next_ids] = flatten(*at_least, ids, k);
      cur = std::move(next);
      ids = std::move(next_ids);
    }
  }
  out.result = verdict::unknown;
  out.diagnostic = "undecided up to k=" + std::to_string(opts.k_max);
  return out;
}

}  // namespace horndim
