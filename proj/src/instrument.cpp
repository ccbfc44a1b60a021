#include "horndim/instrument.hpp"

#include <regex>

namespace horndim {

pred_key dim_pred(std::size_t n) { return pred_key::plain("dim" + std::to_string(n)); }

namespace {

lin_term v(const std::string& name) { return lin_term::var(name); }

std::string kvar(std::size_t i) { return "K" + std::to_string(i); }

clause dim_clause(std::size_t n, std::vector<lin_constraint> cs, std::vector<atom> body = {}) {
  atom head{dim_pred(n), {}};
  for (std::size_t i = 1; i <= n; ++i) head.args.push_back(kvar(i));
  head.args.push_back("K");
  return clause{std::move(head), std::move(cs), std::move(body), "", std::nullopt};
}

// dim_m needed by the fold definition of dim_n, besides dim_n itself.
std::set<std::size_t> fold_dependencies(std::size_t n) {
  std::set<std::size_t> out;
  for (std::size_t m = n; m > 2; --m) out.insert(m - 1);
  out.insert(2);
  out.erase(n);
  return out;
}

}  // namespace

std::vector<clause> dim_definition(std::size_t n, dim_encoding encoding) {
  std::vector<clause> out;
  if (n == 0) {
    out.push_back({{dim_pred(0), {"K"}}, {make_constraint(v("K"), rel::eq, lin_term::num(0))}, {}, "", std::nullopt});
    return out;
  }
  if (n == 1) {
    out.push_back(dim_clause(1, {make_constraint(v("K"), rel::eq, v(kvar(1)))}));
    return out;
  }
  if (n > 2 && encoding == dim_encoding::fold) {
    atom prefix{dim_pred(n - 1), {}};
    for (std::size_t i = 1; i < n; ++i) prefix.args.push_back(kvar(i));
    prefix.args.push_back("T");
    out.push_back(dim_clause(n, {}, {prefix, atom{dim_pred(2), {"T", kvar(n), "K"}}}));
    return out;
  }
  for (std::size_t i = 1; i <= n; ++i) {
    std::vector<lin_constraint> cs;
    for (std::size_t j = 1; j <= n; ++j)
      if (j != i) cs.push_back(make_constraint(v(kvar(i)), rel::ge, v(kvar(j)) + lin_term::num(1)));
    cs.push_back(make_constraint(v("K"), rel::eq, v(kvar(i))));
    out.push_back(dim_clause(n, std::move(cs)));
  }
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = i + 1; j <= n; ++j) {
      std::vector<lin_constraint> cs{make_constraint(v(kvar(i)), rel::eq, v(kvar(j)))};
      for (std::size_t l = 1; l <= n; ++l)
        if (l != i && l != j) cs.push_back(make_constraint(v(kvar(i)), rel::ge, v(kvar(l))));
      cs.push_back(make_constraint(v("K"), rel::eq, v(kvar(i)) + lin_term::num(1)));
      out.push_back(dim_clause(n, std::move(cs)));
    }
  }
  return out;
}

program instrument_dim(const program& p, const instrument_options& opts) {
  static const std::regex dim_name("dim[0-9]+");
  for (const auto& [k, n] : p.arities) {
    if (!k.is_plain() && !k.is_false()) throw error("instrument_dim expects plain predicates");
    if (std::regex_match(k.base, dim_name)) throw error("predicate name clashes with dimension predicate: " + k.base);
  }

  std::set<std::size_t> needed;
  std::vector<clause> out;
  for (const auto& c : p.clauses) {
    const auto vars = c.variables();
    const std::size_t n = c.body.size();
    std::string base = "K";
    auto clashes = [&](const std::string& b) {
      if (vars.contains(b)) return true;
      for (std::size_t i = 1; i <= n; ++i)
        if (vars.contains(b + std::to_string(i))) return true;
      return false;
    };
    while (clashes(base)) base += "_";

    clause r = c;
    std::vector<std::string> ks;
    for (std::size_t i = 0; i < n; ++i) {
      ks.push_back(base + std::to_string(i + 1));
      r.body[i].args.push_back(ks.back());
    }
    if (!c.is_integrity()) {
      r.head.args.push_back(base);
      ks.push_back(base);
      r.body.push_back(atom{dim_pred(n), ks});
      needed.insert(n);
      if (opts.encoding == dim_encoding::fold && n > 2)
        for (auto m : fold_dependencies(n)) needed.insert(m);
    }
    r.origin.reset();
    out.push_back(std::move(r));
  }

  std::set<std::string> taken = p.ids();
  id_source ids("d", taken);
  for (auto n : needed) {
    for (auto& c : dim_definition(n, opts.encoding)) {
      if (p.has_ids()) c.id = ids.next();
      out.push_back(std::move(c));
    }
  }
  return make_program(std::move(out), p.accepting);
}

program add_integrity(program p, clause c) {
  if (!c.is_integrity()) throw error("integrity constraint must have head false");
  if (p.has_ids() && c.id.empty()) c.id = id_source("c", p.ids()).next();
  p.clauses.push_back(std::move(c));
  auto accepting = std::set<pred_key>{pred_key::falsum()};
  return make_program(std::move(p.clauses), accepting);
}

}  // namespace horndim
