#include "horndim/decompose.hpp"

#include <algorithm>

namespace horndim {

std::vector<std::string> standard_vars(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i < 26) out.emplace_back(1, static_cast<char>('A' + i));
    else out.push_back("X" + std::to_string(i));
  }
  return out;
}

namespace {

void require_plain(const program& p, const char* op) {
  for (const auto& [k, n] : p.arities)
    if (!k.is_plain())
      throw error(std::string(op) + ": input already annotated (" + render_pred(k, style::bracket) + ")");
}

atom retag(const atom& a, annot t, unsigned d) { return {a.pred.with_tag(t, d), a.args}; }

program at_most_k_impl(const program& p, unsigned k, bool every_epsilon) {
  std::vector<clause> out;
  auto derived = [&](std::size_t i, atom head, std::vector<atom> body) {
    clause c;
    c.head = std::move(head);
    c.constraints = p.clauses[i].constraints;
    c.body = std::move(body);
    c.origin = i;
    out.push_back(std::move(c));
  };

  for (unsigned d = 0; d <= k; ++d) {
    for (std::size_t i = 0; i < p.clauses.size(); ++i) {
      const clause& c = p.clauses[i];
      if (c.body.empty() && d == 0) derived(i, retag(c.head, annot::exactly, 0), {});
      if (c.body.size() == 1)
        derived(i, retag(c.head, annot::exactly, d), {retag(c.body[0], annot::exactly, d)});
    }
  }
  // One body atom at dimension d, the others strictly below.
  for (unsigned d = 1; d <= k; ++d) {
    for (std::size_t i = 0; i < p.clauses.size(); ++i) {
      const clause& c = p.clauses[i];
      if (c.body.size() < 2) continue;
      for (std::size_t j = 0; j < c.body.size(); ++j) {
        std::vector<atom> body;
        for (std::size_t b = 0; b < c.body.size(); ++b)
          body.push_back(b == j ? retag(c.body[b], annot::exactly, d)
                                : retag(c.body[b], annot::at_most, d - 1));
        derived(i, retag(c.head, annot::exactly, d), std::move(body));
      }
    }
  }
  // A set J of at least two body atoms at dimension d-1, the others at most d-2.
  for (unsigned d = 1; d <= k; ++d) {
    for (std::size_t i = 0; i < p.clauses.size(); ++i) {
      const clause& c = p.clauses[i];
      const std::size_t r = c.body.size();
      if (r < 2) continue;
      for (std::size_t size = 2; size <= r; ++size) {
        if (d < 2 && size < r) continue;
        std::vector<bool> in(r, false);
        std::fill(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(size), true);
        do {
          std::vector<atom> body;
          for (std::size_t b = 0; b < r; ++b)
            body.push_back(in[b] ? retag(c.body[b], annot::exactly, d - 1) : retag(c.body[b], annot::at_most, d - 2));
          derived(i, retag(c.head, annot::exactly, d), std::move(body));
        } while (std::prev_permutation(in.begin(), in.end()));
      }
    }
  }

  std::set<pred_key> defined;
  for (const auto& c : out) defined.insert(c.head.pred);
  for (unsigned d = 0; d <= k; ++d) {
    for (unsigned e = 0; e <= d; ++e) {
      for (const auto& [h, arity] : p.arities) {
        const pred_key body_key = h.with_tag(annot::exactly, e);
        if (!every_epsilon && !defined.contains(body_key)) continue;
        const auto vars = standard_vars(arity);
        clause c;
        c.head = {h.with_tag(annot::at_most, d), vars};
        c.body = {{body_key, vars}};
        out.push_back(std::move(c));
      }
    }
  }

  std::set<pred_key> accepting;
  if (p.has_integrity()) accepting.insert(pred_key::falsum().with_tag(annot::at_most, k));
  program result = make_program(std::move(out), std::set<pred_key>{});
  for (const auto& f : accepting) result.arities.emplace(f, 0);
  result.accepting = std::move(accepting);
  return result;
}

}  // namespace

program at_most_k(const program& p, unsigned k) {
  require_plain(p, "at_most_k");
  return at_most_k_impl(p, k, false);
}

bool is_epsilon_clause(const clause& c) {
  if (!is_renaming_clause(c)) return false;
  const pred_key& h = c.head.pred;
  const pred_key& b = c.body.front().pred;
  return h.tag == annot::at_most && b.tag == annot::exactly && h.base == b.base && b.index <= h.index;
}

program unfold_epsilon(const program& pk) {
  std::vector<clause> out;
  for (const auto& c : pk.clauses) {
    if (!is_epsilon_clause(c)) {
      out.push_back(c);
      continue;
    }
    for (const auto& def : pk.clauses) {
      if (is_epsilon_clause(def) || def.head.pred != c.body.front().pred) continue;
      clause u = def;
      u.head.pred = c.head.pred;
      out.push_back(std::move(u));
    }
  }
  program result = pk;
  result.clauses = std::move(out);
  result.check();
  return result;
}

program inherit_ids(const program& pk, const program& origin) {
  program out = pk;
  for (auto& c : out.clauses) {
    if (!c.origin) throw error("clause without provenance: " + render_clause(c, {style::bracket}));
    if (*c.origin >= origin.clauses.size()) throw error("provenance out of range");
    const std::string& id = origin.clauses[*c.origin].id;
    if (id.empty()) throw error("origin clause has no identifier");
    c.id = id;
  }
  out.check();
  return out;
}

program at_most_k_unfolded(const program& p, unsigned k) {
  return inherit_ids(unfold_epsilon(at_most_k(p, k)), p);
}

program at_least_k_direct(const program& p, unsigned k) {
  require_plain(p, "at_least_k_direct");
  // The renamed H<e> also gets the link clause, so every epsilon-clause matters here.
  const program pk = at_most_k_impl(p, k, true);
  id_source fresh("e", p.ids());
  const bool ids = p.has_ids() && !p.clauses.empty();
  auto rename = [](pred_key key) {
    if (key.tag == annot::at_most) key.tag = annot::exceeds;
    else if (key.tag == annot::exactly) key.tag = annot::any_dim;
    return key;
  };

  std::vector<clause> out;
  for (const auto& c : pk.clauses) {
    clause r = c;
    r.head.pred = rename(r.head.pred);
    for (auto& b : r.body) b.pred = rename(b.pred);
    if (ids) r.id = c.origin ? p.clauses[*c.origin].id : fresh.next();
    out.push_back(std::move(r));
  }
  std::set<pred_key> heads;
  for (const auto& c : p.clauses) heads.insert(c.head.pred);
  for (const auto& h : heads) {
    const auto vars = standard_vars(p.arities.at(h));
    clause link;
    link.head = {h.with_tag(annot::any_dim, 0), vars};
    link.body = {{h, vars}};
    if (ids) link.id = fresh.next();
    out.push_back(std::move(link));
  }
  for (std::size_t i = 0; i < p.clauses.size(); ++i) {
    clause c = p.clauses[i];
    c.origin = i;
    out.push_back(std::move(c));
  }

  std::set<pred_key> accepting;
  if (p.has_integrity()) accepting.insert(pred_key::falsum().with_tag(annot::exceeds, k));
  program result = make_program(std::move(out), std::set<pred_key>{});
  for (const auto& f : accepting) result.arities.emplace(f, 0);
  result.accepting = std::move(accepting);
  return result;
}

program prune(const program& p) {
  std::set<pred_key> productive;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& c : p.clauses) {
      if (productive.contains(c.head.pred)) continue;
      bool ok = true;
      for (const auto& b : c.body) ok = ok && productive.contains(b.pred);
      if (ok) changed = productive.insert(c.head.pred).second || changed;
    }
  }
  std::vector<const clause*> live;
  for (const auto& c : p.clauses) {
    bool ok = true;
    for (const auto& b : c.body) ok = ok && productive.contains(b.pred);
    if (ok) live.push_back(&c);
  }
  std::set<pred_key> reachable = p.accepting;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto* c : live)
      if (reachable.contains(c->head.pred))
        for (const auto& b : c->body) changed = reachable.insert(b.pred).second || changed;
  }
  program out;
  for (const auto* c : live)
    if (reachable.contains(c->head.pred)) out.clauses.push_back(*c);
  for (const auto& c : out.clauses) {
    out.arities.emplace(c.head.pred, c.head.args.size());
    for (const auto& b : c.body) out.arities.emplace(b.pred, b.args.size());
  }
  out.accepting = p.accepting;
  for (const auto& f : out.accepting)
    if (auto it = p.arities.find(f); it != p.arities.end()) out.arities.emplace(f, it->second);
  return out;
}

}  // namespace horndim
