#include "horndim/feasibility.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace horndim {

namespace {

using wide = __int128;

struct overflow {};

integer narrow(wide v) {
  if (v > std::numeric_limits<integer>::max() || v < std::numeric_limits<integer>::min()) throw overflow{};
  return static_cast<integer>(v);
}

integer floor_div(integer a, integer b) {
  integer q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

integer ceil_div(integer a, integer b) { return -floor_div(-a, b); }

integer abs_i(integer v) { return v < 0 ? -v : v; }

// a . x + c == 0 when eq, a . x + c >= 0 otherwise.
struct row {
  std::vector<integer> a;
  integer c = 0;
  bool eq = false;
};

enum class verdict { keep, drop, contradiction };

verdict normalize(row& r) {
  integer g = 0;
  for (integer v : r.a) g = std::gcd(g, abs_i(v));
  if (g == 0) {
    if (r.eq) return r.c == 0 ? verdict::drop : verdict::contradiction;
    return r.c >= 0 ? verdict::drop : verdict::contradiction;
  }
  if (r.eq) {
    if (r.c % g != 0) return verdict::contradiction;
    for (auto& v : r.a) v /= g;
    r.c /= g;
    auto lead = std::find_if(r.a.begin(), r.a.end(), [](integer v) { return v != 0; });
    if (*lead < 0) {
      for (auto& v : r.a) v = -v;
      r.c = -r.c;
    }
  } else {
    for (auto& v : r.a) v /= g;
    r.c = floor_div(r.c, g);
  }
  return verdict::keep;
}

// Normalises, removes duplicates, keeps the tightest bound per direction and
// merges opposite bounds that pin a value into an equality.
bool simplify(std::vector<row>& rows) {
  std::map<std::vector<integer>, integer> eqs;
  std::map<std::vector<integer>, integer> ineqs;
  for (auto& r : rows) {
    switch (normalize(r)) {
      case verdict::contradiction: return false;
      case verdict::drop: continue;
      case verdict::keep: break;
    }
    if (r.eq) {
      auto [it, inserted] = eqs.emplace(r.a, r.c);
      if (!inserted && it->second != r.c) return false;
    } else {
      auto [it, inserted] = ineqs.emplace(r.a, r.c);
      if (!inserted) it->second = std::min(it->second, r.c);
    }
  }
  std::vector<row> out;
  for (auto it = ineqs.begin(); it != ineqs.end();) {
    std::vector<integer> neg = it->first;
    for (auto& v : neg) v = -v;
    auto opp = ineqs.find(neg);
    if (opp != ineqs.end()) {
      const integer sum = it->second + opp->second;
      if (sum < 0) return false;
      if (sum == 0) {
        row e{it->first, it->second, true};
        normalize(e);
        auto [eit, inserted] = eqs.emplace(e.a, e.c);
        if (!inserted && eit->second != e.c) return false;
        ineqs.erase(opp);
        it = ineqs.erase(it);
        continue;
      }
    }
    ++it;
  }
  for (const auto& [a, c] : eqs) out.push_back({a, c, true});
  for (const auto& [a, c] : ineqs) {
    // Skip inequalities implied by an equality on the same direction.
    std::vector<integer> neg = a;
    for (auto& v : neg) v = -v;
    if (auto e = eqs.find(a); e != eqs.end() && c >= e->second) continue;
    if (auto e = eqs.find(neg); e != eqs.end() && c >= -e->second) continue;
    out.push_back({a, c, false});
  }
  rows = std::move(out);
  return true;
}

struct step {
  std::size_t var;
  std::vector<row> rows;
  bool by_equality;
};

struct search {
  const std::vector<step>& steps;
  std::vector<integer>& value;
  std::size_t budget;
  std::size_t nodes = 0;
  bool exhausted = false;

  static constexpr std::size_t per_level = 100;

  wide rest(const row& r, std::size_t var) const {
    wide s = r.c;
    for (std::size_t j = 0; j < r.a.size(); ++j)
      if (j != var && r.a[j] != 0) s += static_cast<wide>(r.a[j]) * value[j];
    return s;
  }

  bool assign(std::size_t level) {
    if (level == steps.size()) return true;
    if (++nodes > budget) {
      exhausted = true;
      return false;
    }
    const step& s = steps[steps.size() - 1 - level];
    const std::size_t v = s.var;
    if (s.by_equality) {
      const row& e = s.rows.front();
      const wide r = rest(e, v);
      if (r % e.a[v] != 0) return false;
      value[v] = narrow(-r / e.a[v]);
      return assign(level + 1);
    }
    std::optional<integer> lo, hi;
    for (const auto& r : s.rows) {
      const integer a = r.a[v];
      const integer rs = narrow(rest(r, v));
      if (a > 0) {
        const integer b = ceil_div(-rs, a);
        lo = lo ? std::max(*lo, b) : b;
      } else if (a < 0) {
        const integer b = floor_div(rs, -a);
        hi = hi ? std::min(*hi, b) : b;
      }
    }
    if (lo && hi && *lo > *hi) return false;
    const integer centre = std::clamp<integer>(0, lo.value_or(std::numeric_limits<integer>::min() / 4),
                                               hi.value_or(std::numeric_limits<integer>::max() / 4));
    std::size_t tried = 0;
    for (integer off = 0; tried < per_level; ++off) {
      const integer cands[2] = {centre + off, centre - off};
      bool in_range = false;
      for (int ci = 0; ci < (off == 0 ? 1 : 2); ++ci) {
        const integer cand = cands[ci];
        if ((lo && cand < *lo) || (hi && cand > *hi)) continue;
        in_range = true;
        ++tried;
        value[v] = cand;
        if (assign(level + 1)) return true;
        if (exhausted) return false;
      }
      if (!in_range) break;
    }
    return false;
  }
};

struct row_limit_hit {};

// Eliminates every variable j with eliminate[j] set. Returns false when the
// system is found to have no integer solution.
bool eliminate(std::vector<row>& rows, const std::vector<bool>& eliminate_var, std::vector<step>& steps,
               std::size_t row_limit) {
  const std::size_t n = eliminate_var.size();
  if (!simplify(rows)) return false;
  for (;;) {
    // Prefer eliminating through an equality, on its smallest coefficient.
    std::optional<std::pair<std::size_t, std::size_t>> pick;  // (row, var)
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i].eq) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (rows[i].a[j] == 0 || !eliminate_var[j]) continue;
        if (!pick || abs_i(rows[i].a[j]) < abs_i(rows[pick->first].a[pick->second])) pick = {{i, j}};
      }
    }
    if (pick) {
      const row e = rows[pick->first];
      const std::size_t v = pick->second;
      const integer a = e.a[v];
      std::vector<row> next;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i == pick->first) continue;
        row r = rows[i];
        const integer b = r.a[v];
        if (b != 0) {
          const integer sa = a < 0 ? -1 : 1;
          for (std::size_t j = 0; j < n; ++j)
            r.a[j] = narrow(static_cast<wide>(abs_i(a)) * r.a[j] - static_cast<wide>(sa) * b * e.a[j]);
          r.c = narrow(static_cast<wide>(abs_i(a)) * r.c - static_cast<wide>(sa) * b * e.c);
        }
        next.push_back(std::move(r));
      }
      steps.push_back({v, {e}, true});
      rows = std::move(next);
    } else {
      std::size_t best = n;
      std::size_t best_cost = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (!eliminate_var[j]) continue;
        std::size_t pos = 0, neg = 0;
        for (const auto& r : rows) {
          if (r.a[j] > 0) ++pos;
          else if (r.a[j] < 0) ++neg;
        }
        if (pos + neg == 0) continue;
        const std::size_t cost = pos * neg;
        if (best == n || cost < best_cost) {
          best = j;
          best_cost = cost;
        }
      }
      if (best == n) return true;
      std::vector<row> lower, upper, next;
      for (auto& r : rows) {
        if (r.a[best] > 0) lower.push_back(r);
        else if (r.a[best] < 0) upper.push_back(r);
        else next.push_back(std::move(r));
      }
      for (const auto& l : lower) {
        for (const auto& u : upper) {
          const integer la = l.a[best], ua = -u.a[best];
          row r;
          r.a.resize(n);
          for (std::size_t j = 0; j < n; ++j)
            r.a[j] = narrow(static_cast<wide>(ua) * l.a[j] + static_cast<wide>(la) * u.a[j]);
          r.c = narrow(static_cast<wide>(ua) * l.c + static_cast<wide>(la) * u.c);
          next.push_back(std::move(r));
        }
      }
      std::vector<row> bounds = lower;
      bounds.insert(bounds.end(), upper.begin(), upper.end());
      steps.push_back({best, std::move(bounds), false});
      rows = std::move(next);
    }
    if (!simplify(rows)) return false;
    if (rows.size() > row_limit) throw row_limit_hit{};
  }
}

struct indexed_system {
  std::vector<std::string> names;
  std::vector<row> rows;
};

indexed_system index_system(const std::vector<lin_constraint>& constraints, const std::set<std::string>& extra = {}) {
  std::map<std::string, std::size_t> index;
  for (const auto& v : extra) index.emplace(v, 0);
  for (const auto& k : constraints)
    for (const auto* t : {&k.lhs, &k.rhs})
      for (const auto& [v, c] : t->coeffs) index.emplace(v, 0);
  indexed_system out;
  for (auto& [v, i] : index) {
    i = out.names.size();
    out.names.push_back(v);
  }
  const std::size_t n = out.names.size();
  for (const auto& k : constraints) {
    lin_term d = k.difference();
    row r;
    r.a.assign(n, 0);
    for (const auto& [v, c] : d.coeffs) r.a[index.at(v)] = c;
    r.c = d.constant;
    switch (k.op) {
      case rel::eq: r.eq = true; break;
      case rel::ge: break;
      case rel::gt: r.c -= 1; break;
      case rel::le:
        for (auto& v : r.a) v = -v;
        r.c = -r.c;
        break;
      case rel::lt:
        for (auto& v : r.a) v = -v;
        r.c = -r.c - 1;
        break;
    }
    out.rows.push_back(std::move(r));
  }
  return out;
}

}  // namespace

feasibility fm_feasible(const std::vector<lin_constraint>& constraints, const fm_options& opts) {
  auto sys = index_system(constraints);
  const std::size_t n = sys.names.size();

  feasibility out;
  std::vector<step> steps;
  try {
    if (!eliminate(sys.rows, std::vector<bool>(n, true), steps, opts.row_limit))
      return {feasibility_status::infeasible, std::nullopt, false};
  } catch (const overflow&) {
    out.budget_exhausted = true;
    return out;
  } catch (const row_limit_hit&) {
    out.budget_exhausted = true;
    return out;
  }

  std::vector<integer> value(n, 0);
  search s{steps, value, opts.witness_budget};
  bool found = false;
  try {
    found = s.assign(0);
  } catch (const overflow&) {
    found = false;
  }
  if (!found) {
    out.budget_exhausted = s.exhausted;
    return out;
  }
  std::map<std::string, integer> w;
  for (std::size_t j = 0; j < n; ++j) w[sys.names[j]] = value[j];
  for (const auto& k : constraints)
    if (!k.holds(w)) return out;
  out.status = feasibility_status::integer_witness;
  out.witness = std::move(w);
  return out;
}

projection fm_project(const std::vector<lin_constraint>& constraints, const std::set<std::string>& keep,
                      const fm_options& opts) {
  auto sys = index_system(constraints, keep);
  const std::size_t n = sys.names.size();
  std::vector<bool> elim(n);
  for (std::size_t j = 0; j < n; ++j) elim[j] = !keep.count(sys.names[j]);
  std::vector<step> steps;
  projection out;
  try {
    if (!eliminate(sys.rows, elim, steps, opts.row_limit)) {
      out.status = projection_status::infeasible;
      return out;
    }
  } catch (const overflow&) {
    out.status = projection_status::gave_up;
    return out;
  } catch (const row_limit_hit&) {
    out.status = projection_status::gave_up;
    return out;
  }
  out.status = projection_status::projected;
  for (const auto& r : sys.rows) {
    lin_term t = lin_term::num(r.c);
    for (std::size_t j = 0; j < n; ++j)
      if (r.a[j] != 0) t += lin_term::var(sys.names[j], r.a[j]);
    out.constraints.push_back(make_constraint(std::move(t), r.eq ? rel::eq : rel::ge, lin_term::num(0)));
  }
  return out;
}

}  // namespace horndim
