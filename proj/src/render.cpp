#include "horndim/chc.hpp"

#include <sstream>

namespace horndim {

std::string render_pred(const pred_key& key, style s) {
  const std::string d = std::to_string(key.index);
  if (s == style::bracket) {
    switch (key.tag) {
      case annot::plain: return key.base;
      case annot::exactly: return key.base + "(" + d + ")";
      case annot::at_most: return key.base + "[" + d + "]";
      case annot::exceeds: return key.base + "{" + d + "}";
      case annot::any_dim: return key.base + "<" + d + ">";
      case annot::fresh: return key.base + "_" + d;
    }
  }
  switch (key.tag) {
    case annot::plain: return key.base;
    case annot::exactly: return key.base + "_ex_" + d;
    case annot::at_most: return key.base + "_am_" + d;
    case annot::exceeds: return key.base + "_gt_" + d;
    case annot::any_dim: return key.base + "_ad_" + d;
    case annot::fresh: return key.base + "_fr_" + d;
  }
  return key.base;
}

std::string render_term(const lin_term& t) {
  std::string out;
  for (const auto& [v, c] : t.coeffs) {
    if (c < 0) out += "-";
    else if (!out.empty()) out += "+";
    const integer mag = c < 0 ? -c : c;
    if (mag != 1) out += std::to_string(mag) + "*";
    out += v;
  }
  if (out.empty()) return std::to_string(t.constant);
  if (t.constant > 0) out += "+" + std::to_string(t.constant);
  else if (t.constant < 0) out += std::to_string(t.constant);
  return out;
}

std::string render_constraint(const lin_constraint& c) {
  return render_term(c.lhs) + std::string(rel_symbol(c.op)) + render_term(c.rhs);
}

std::string render_atom(const atom& a, style s) {
  std::string out = render_pred(a.pred, s);
  if (a.args.empty()) return out;
  out += "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) out += ",";
    out += a.args[i];
  }
  return out + ")";
}

std::string render_clause(const clause& c, const render_options& opts) {
  std::string out;
  if (opts.ids && !c.id.empty()) out += c.id + ". ";
  out += render_atom(c.head, opts.name_style);
  std::vector<std::string> items;
  for (const auto& k : c.constraints) items.push_back(render_constraint(k));
  for (const auto& b : c.body) items.push_back(render_atom(b, opts.name_style));
  if (!items.empty()) {
    out += " :- ";
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out += ", ";
      out += items[i];
    }
  }
  return out + ".";
}

std::string render_program(const program& p, const render_options& opts) {
  std::ostringstream os;
  const std::set<pred_key> implied =
      p.has_integrity() ? std::set<pred_key>{pred_key::falsum()} : std::set<pred_key>{};
  if (p.accepting != implied) {
    os << ":- accepting(";
    bool first = true;
    for (const auto& f : p.accepting) {
      os << (first ? "" : ", ") << render_pred(f, opts.name_style);
      first = false;
    }
    os << ").\n";
  }
  for (const auto& c : p.clauses) os << render_clause(c, opts) << "\n";
  return os.str();
}

}  // namespace horndim
