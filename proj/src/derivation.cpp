#include "horndim/derivation.hpp"

#include <algorithm>
#include <cctype>

namespace horndim {

std::size_t trace_tree::size() const {
  std::size_t n = 1;
  for (const auto& c : children) n += c.size();
  return n;
}

std::size_t trace_tree::height() const {
  std::size_t h = 0;
  for (const auto& c : children) h = std::max(h, c.height() + 1);
  return h;
}

std::strong_ordering trace_tree::operator<=>(const trace_tree& other) const {
  if (auto c = size() <=> other.size(); c != 0) return c;
  if (auto c = label <=> other.label; c != 0) return c;
  return std::lexicographical_compare_three_way(children.begin(), children.end(),
                                                other.children.begin(), other.children.end());
}

std::size_t tree_dim(const trace_tree& t) {
  if (t.children.empty()) return 0;
  std::size_t best = 0, count = 0;
  for (const auto& c : t.children) {
    const std::size_t d = tree_dim(c);
    if (d > best || count == 0) {
      best = d;
      count = 1;
    } else if (d == best) {
      ++count;
    }
  }
  return count == 1 ? best : best + 1;
}

std::string to_string(const trace_tree& t) {
  std::string out = t.label;
  if (t.children.empty()) return out;
  out += "(";
  for (std::size_t i = 0; i < t.children.size(); ++i) {
    if (i) out += ",";
    out += to_string(t.children[i]);
  }
  return out + ")";
}

namespace {

struct tree_reader {
  std::string_view s;
  std::size_t i = 0;

  void skip() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  [[noreturn]] void fail(const char* what) const { throw parse_error(what, 1, i + 1); }

  trace_tree read() {
    skip();
    const std::size_t start = i;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
    if (i == start) fail("expected tree label");
    trace_tree t{std::string(s.substr(start, i - start)), {}};
    skip();
    if (i < s.size() && s[i] == '(') {
      ++i;
      for (;;) {
        t.children.push_back(read());
        skip();
        if (i < s.size() && s[i] == ',') {
          ++i;
          continue;
        }
        if (i < s.size() && s[i] == ')') {
          ++i;
          break;
        }
        fail("expected ',' or ')'");
      }
    }
    return t;
  }
};

using tree_set = std::set<trace_tree>;

// Splits `total` into `parts` positive sizes, calling `f` with each composition.
void compositions(std::size_t total, std::size_t parts, std::vector<std::size_t>& acc,
                  const std::function<void(const std::vector<std::size_t>&)>& f) {
  if (parts == 0) {
    if (total == 0) f(acc);
    return;
  }
  for (std::size_t k = 1; k + (parts - 1) <= total; ++k) {
    acc.push_back(k);
    compositions(total - k, parts - 1, acc, f);
    acc.pop_back();
  }
}

}  // namespace

trace_tree parse_tree(std::string_view text) {
  tree_reader r{text};
  trace_tree t = r.read();
  r.skip();
  if (r.i != text.size()) r.fail("trailing input after tree");
  return t;
}

std::vector<rooted_tree> enumerate_projected_trees(const program& p, const std::set<pred_key>& roots,
                                                   std::size_t max_nodes,
                                                   const std::set<std::string>& kept) {
  if (max_nodes == 0) return {};
  for (const auto& c : p.clauses) {
    if (c.id.empty()) throw error("trace-tree enumeration needs clause ids");
    if (!kept.contains(c.id) && c.body.size() != 1)
      throw error("spliced clause " + c.id + " must have exactly one body atom");
  }
  // table[pred][n]: projected trees with exactly n kept nodes.
  std::map<pred_key, std::vector<tree_set>> table;
  for (const auto& [k, ar] : p.arities) table[k].resize(max_nodes + 1);
  const tree_set empty;
  auto at = [&](const pred_key& k, std::size_t n) -> const tree_set& {
    auto it = table.find(k);
    return it == table.end() ? empty : it->second[n];
  };

  for (std::size_t n = 1; n <= max_nodes; ++n) {
    for (const auto& c : p.clauses) {
      if (!kept.contains(c.id)) continue;
      auto& out = table[c.head.pred][n];
      if (c.body.empty()) {
        if (n == 1) out.insert(trace_tree::leaf(c.id));
        continue;
      }
      std::vector<std::size_t> acc;
      compositions(n - 1, c.body.size(), acc, [&](const std::vector<std::size_t>& sizes) {
        for (std::size_t j = 0; j < sizes.size(); ++j)
          if (at(c.body[j].pred, sizes[j]).empty()) return;
        std::vector<const trace_tree*> pick(sizes.size());
        std::function<void(std::size_t)> rec = [&](std::size_t j) {
          if (j == sizes.size()) {
            trace_tree t{c.id, {}};
            t.children.reserve(pick.size());
            for (const auto* ch : pick) t.children.push_back(*ch);
            out.insert(std::move(t));
            return;
          }
          for (const auto& ch : at(c.body[j].pred, sizes[j])) {
            pick[j] = &ch;
            rec(j + 1);
          }
        };
        rec(0);
      });
    }
    for (bool changed = true; changed;) {
      changed = false;
      for (const auto& c : p.clauses) {
        if (kept.contains(c.id)) continue;
        const tree_set src = at(c.body.front().pred, n);
        auto& dst = table[c.head.pred][n];
        for (const auto& t : src) changed |= dst.insert(t).second;
      }
    }
  }

  std::vector<rooted_tree> out;
  for (const auto& r : roots)
    for (std::size_t n = 1; n <= max_nodes; ++n)
      for (const auto& t : at(r, n)) out.push_back({r, t});
  std::sort(out.begin(), out.end(), [](const rooted_tree& a, const rooted_tree& b) {
    if (auto c = a.tree <=> b.tree; c != 0) return c < 0;
    return a.root < b.root;
  });
  return out;
}

std::vector<rooted_tree> enumerate_trace_trees(const program& p, const std::set<pred_key>& roots,
                                               std::size_t max_nodes) {
  return enumerate_projected_trees(p, roots, max_nodes, p.ids());
}

trace_tree project_tree(const trace_tree& t, const std::set<std::string>& kept) {
  if (!kept.contains(t.label)) {
    if (t.children.size() != 1) throw error("cannot splice non-unary node " + t.label);
    return project_tree(t.children.front(), kept);
  }
  trace_tree out{t.label, {}};
  for (const auto& c : t.children) out.children.push_back(project_tree(c, kept));
  return out;
}

std::optional<derivation> resolve_tree(const program& p, const pred_key& root, const trace_tree& t) {
  for (std::size_t i = 0; i < p.clauses.size(); ++i) {
    const clause& c = p.clauses[i];
    if (c.id != t.label || c.head.pred != root || c.body.size() != t.children.size()) continue;
    derivation d{i, {}};
    bool ok = true;
    for (std::size_t j = 0; j < c.body.size() && ok; ++j) {
      auto child = resolve_tree(p, c.body[j].pred, t.children[j]);
      if (!child) ok = false;
      else d.children.push_back(std::move(*child));
    }
    if (ok) return d;
  }
  return std::nullopt;
}

trace_tree skeleton(const program& p, const derivation& d) {
  trace_tree t{p.clauses.at(d.clause_index).id, {}};
  for (const auto& c : d.children) t.children.push_back(skeleton(p, c));
  return t;
}

namespace {

struct instantiator {
  const program& p;
  std::vector<lin_constraint>& out;
  std::size_t next = 0;

  std::vector<std::string> run(const derivation& d) {
    const clause& c = p.clauses.at(d.clause_index);
    if (d.children.size() != c.body.size()) throw error("derivation does not match clause arity");
    const std::string suffix = "#" + std::to_string(next++);
    auto ren = [&](const std::string& v) { return v + suffix; };
    auto ren_term = [&](const lin_term& t) {
      lin_term r = lin_term::num(t.constant);
      for (const auto& [v, k] : t.coeffs) r += lin_term::var(ren(v), k);
      return r;
    };
    for (const auto& k : c.constraints)
      out.push_back(make_constraint(ren_term(k.lhs), k.op, ren_term(k.rhs)));
    for (std::size_t j = 0; j < c.body.size(); ++j) {
      const clause& child = p.clauses.at(d.children[j].clause_index);
      if (child.head.pred != c.body[j].pred) throw error("derivation links mismatched predicates");
      const auto child_args = run(d.children[j]);
      for (std::size_t a = 0; a < child_args.size(); ++a)
        out.push_back(make_constraint(lin_term::var(ren(c.body[j].args[a])), rel::eq,
                                      lin_term::var(child_args[a])));
    }
    std::vector<std::string> head;
    for (const auto& v : c.head.args) head.push_back(ren(v));
    return head;
  }
};

}  // namespace

tree_conjunction derivation_constraint(const program& p, const derivation& d) {
  tree_conjunction tc;
  instantiator inst{p, tc.constraints};
  tc.head_args = inst.run(d);
  return tc;
}

tree_conjunction tree_constraint(const program& p, const pred_key& root, const trace_tree& t) {
  auto d = resolve_tree(p, root, t);
  if (!d) throw error("tree " + to_string(t) + " is not a trace tree of the program");
  return derivation_constraint(p, *d);
}

}  // namespace horndim
