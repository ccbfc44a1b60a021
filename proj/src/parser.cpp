#include "horndim/chc.hpp"

#include <cctype>
#include <charconv>
#include <regex>

namespace horndim {

namespace {

enum class tok {
  ident,   // lowercase-initial name
  var,     // uppercase- or underscore-initial name
  number,
  lparen, rparen, lbrack, rbrack, lbrace, rbrace,
  comma, dot, neck, plus, minus, star,
  eq, ge, gt, le, lt,
  end
};

struct token {
  tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

std::vector<token> lex(std::string_view src) {
  std::vector<token> out;
  std::size_t line = 1, col = 1, i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto is_name = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '%') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    const std::size_t l = line, cl = col;
    auto push = [&](tok k, std::size_t n) {
      out.push_back({k, std::string(src.substr(i, n)), l, cl});
      advance(n);
    };
    auto starts = [&](std::string_view s) { return src.substr(i, s.size()) == s; };
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t n = 0;
      while (i + n < src.size() && std::isdigit(static_cast<unsigned char>(src[i + n]))) ++n;
      push(tok::number, n);
    } else if (is_name(c)) {
      std::size_t n = 0;
      while (i + n < src.size() && is_name(src[i + n])) ++n;
      const bool lower = std::islower(static_cast<unsigned char>(c));
      push(lower ? tok::ident : tok::var, n);
    } else if (starts(":-")) {
      push(tok::neck, 2);
    } else if (starts(">=")) {
      push(tok::ge, 2);
    } else if (starts("=<") || starts("<=")) {
      push(tok::le, 2);
    } else {
      switch (c) {
        case '(': push(tok::lparen, 1); break;
        case ')': push(tok::rparen, 1); break;
        case '[': push(tok::lbrack, 1); break;
        case ']': push(tok::rbrack, 1); break;
        case '{': push(tok::lbrace, 1); break;
        case '}': push(tok::rbrace, 1); break;
        case ',': push(tok::comma, 1); break;
        case '.': push(tok::dot, 1); break;
        case '+': push(tok::plus, 1); break;
        case '-': push(tok::minus, 1); break;
        case '*': push(tok::star, 1); break;
        case '=': push(tok::eq, 1); break;
        case '>': push(tok::gt, 1); break;
        case '<': push(tok::lt, 1); break;
        default:
          throw parse_error(std::string("unexpected character '") + c + "'", l, cl);
      }
    }
  }
  out.push_back({tok::end, "", line, col});
  return out;
}

const std::regex& mangled_suffix() {
  static const std::regex re("^(.+)_(am|ex|gt|ad|fr)_([0-9]+)$");
  return re;
}

pred_key from_ident(const std::string& name) {
  std::smatch m;
  if (std::regex_match(name, m, mangled_suffix())) {
    const unsigned d = static_cast<unsigned>(std::stoul(m[3].str()));
    const std::string base = m[1].str();
    const std::string code = m[2].str();
    if (code == "am") return pred_key::at_most(base, d);
    if (code == "ex") return pred_key::exactly(base, d);
    if (code == "gt") return pred_key::exceeds(base, d);
    if (code == "ad") return pred_key::any_dim(base, d);
    return pred_key::fresh(base, d);
  }
  return pred_key::plain(name);
}

constexpr std::string_view placeholder_prefix = "\x01";

class parser {
public:
  explicit parser(std::string_view src) : toks_(lex(src)) {}

  program run() {
    std::vector<clause> clauses;
    std::optional<std::set<pred_key>> accepting;
    while (peek().kind != tok::end) {
      if (peek().kind == tok::neck) {
        auto acc = directive();
        if (!accepting) accepting.emplace();
        accepting->insert(acc.begin(), acc.end());
        continue;
      }
      clauses.push_back(labelled_clause());
    }
    try {
      return make_program(std::move(clauses), std::move(accepting));
    } catch (const parse_error&) {
      throw;
    } catch (const error& e) {
      throw parse_error(e.what(), toks_.back().line, toks_.back().column);
    }
  }

  clause single() {
    clause c = labelled_clause();
    if (peek().kind != tok::end) fail("trailing input after clause");
    return c;
  }

  std::optional<pred_key> single_pred() {
    if (peek().kind != tok::ident) return std::nullopt;
    pred_key k = pred_ref(true);
    if (peek().kind != tok::end) return std::nullopt;
    return k;
  }

private:
  std::vector<token> toks_;
  std::size_t pos_ = 0;
  std::vector<std::string> placeholders_;

  const token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const token& take() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  [[noreturn]] void fail(const std::string& msg) const {
    const token& t = peek();
    throw parse_error(msg + (t.kind == tok::end ? " at end of input" : " near '" + t.text + "'"),
                      t.line, t.column);
  }
  const token& expect(tok k, const char* what) {
    if (peek().kind != k) fail(std::string("expected ") + what);
    return take();
  }
  bool accept(tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }

  unsigned small_number() {
    const token& t = expect(tok::number, "annotation index");
    unsigned v = 0;
    auto r = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (r.ec != std::errc()) throw parse_error("annotation index out of range", t.line, t.column);
    return v;
  }

  std::set<pred_key> directive() {
    expect(tok::neck, "':-'");
    const token& name = expect(tok::ident, "directive name");
    if (name.text != "accepting") throw parse_error("unknown directive " + name.text, name.line, name.column);
    std::set<pred_key> out;
    expect(tok::lparen, "'('");
    if (!accept(tok::rparen)) {
      do {
        out.insert(pred_ref(true));
      } while (accept(tok::comma));
      expect(tok::rparen, "')'");
    }
    expect(tok::dot, "'.'");
    return out;
  }

  clause labelled_clause() {
    placeholders_.clear();
    std::string label;
    if (peek().kind == tok::ident && peek(1).kind == tok::dot && peek(2).kind != tok::end &&
        peek(2).line == peek(1).line) {
      label = take().text;
      take();
    }
    clause c;
    c.head = atom_or_false();
    if (accept(tok::neck)) {
      do {
        body_item(c);
      } while (accept(tok::comma));
    }
    expect(tok::dot, "'.' at end of clause");
    c.id = std::move(label);
    name_placeholders(c);
    return c;
  }

  // Reads `name`, `name[k]`, `name{k}`, `name<k>`, `name(k)` where the last form is
  // only an annotation when followed by an argument list, when the name is
  // `false`, or when `standalone` says no argument list can follow.
  pred_key pred_ref(bool standalone) {
    const std::string name = expect(tok::ident, "predicate name").text;
    pred_key key = from_ident(name);
    auto annotated = [&](annot a, tok close, const char* what) {
      take();
      const unsigned d = small_number();
      expect(close, what);
      if (!key.is_plain()) fail("doubly annotated predicate");
      key = key.with_tag(a, d);
    };
    switch (peek().kind) {
      case tok::lbrack: annotated(annot::at_most, tok::rbrack, "']'"); break;
      case tok::lbrace: annotated(annot::exceeds, tok::rbrace, "'}'"); break;
      case tok::lt:
        if (peek(1).kind == tok::number && peek(2).kind == tok::gt)
          annotated(annot::any_dim, tok::gt, "'>'");
        break;
      case tok::lparen:
        if (peek(1).kind == tok::number && peek(2).kind == tok::rparen &&
            (standalone || name == "false" || peek(3).kind == tok::lparen))
          annotated(annot::exactly, tok::rparen, "')'");
        break;
      default: break;
    }
    return key;
  }

  atom atom_or_false() {
    if (peek().kind != tok::ident) fail("expected clause head or atom");
    atom a;
    a.pred = pred_ref(false);
    if (accept(tok::lparen)) {
      if (a.pred.is_false()) fail("'false' takes no arguments");
      if (!accept(tok::rparen)) {
        do {
          a.args.push_back(argument());
        } while (accept(tok::comma));
        expect(tok::rparen, "')'");
      }
    }
    return a;
  }

  std::vector<lin_constraint> pending_;

  std::string fresh_placeholder() {
    placeholders_.push_back(std::string(placeholder_prefix) + std::to_string(placeholders_.size()));
    return placeholders_.back();
  }

  std::string argument() {
    if (peek().kind == tok::var && peek().text == "_" &&
        (peek(1).kind == tok::comma || peek(1).kind == tok::rparen)) {
      take();
      return fresh_placeholder();
    }
    lin_term t = expr();
    if (auto v = t.as_variable()) return *v;
    std::string ph = fresh_placeholder();
    pending_.push_back(make_constraint(lin_term::var(ph), rel::eq, std::move(t)));
    return ph;
  }

  void body_item(clause& c) {
    if (peek().kind == tok::ident) {
      if (peek().text == "true" && peek(1).kind != tok::lparen) {
        take();
        return;
      }
      c.body.push_back(atom_or_false());
      return;
    }
    lin_term lhs = expr();
    rel op;
    switch (take().kind) {
      case tok::eq: op = rel::eq; break;
      case tok::ge: op = rel::ge; break;
      case tok::gt: op = rel::gt; break;
      case tok::le: op = rel::le; break;
      case tok::lt: op = rel::lt; break;
      default:
        --pos_;
        fail("expected relation");
    }
    lin_term rhs = expr();
    c.constraints.push_back(make_constraint(std::move(lhs), op, std::move(rhs)));
  }

  lin_term expr() {
    lin_term t;
    bool neg = false;
    if (accept(tok::minus)) neg = true;
    else accept(tok::plus);
    lin_term first = term();
    t = neg ? first * -1 : first;
    for (;;) {
      if (accept(tok::plus)) t += term();
      else if (accept(tok::minus)) t -= term();
      else break;
    }
    return t;
  }

  lin_term term() {
    lin_term t = factor();
    while (accept(tok::star)) {
      lin_term f = factor();
      if (t.is_constant()) t = f * t.constant;
      else if (f.is_constant()) t *= f.constant;
      else fail("non-linear product");
    }
    return t;
  }

  lin_term factor() {
    const token& t = peek();
    switch (t.kind) {
      case tok::number: {
        take();
        integer v = 0;
        auto r = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (r.ec != std::errc()) throw parse_error("integer literal out of range", t.line, t.column);
        return lin_term::num(v);
      }
      case tok::var:
        take();
        if (t.text == "_") return lin_term::var(fresh_placeholder());
        return lin_term::var(t.text);
      case tok::lparen: {
        take();
        lin_term inner = expr();
        expect(tok::rparen, "')'");
        return inner;
      }
      case tok::minus:
        take();
        return factor() * -1;
      default:
        fail("expected term");
    }
  }

  void name_placeholders(clause& c) {
    for (auto& k : pending_) c.constraints.push_back(std::move(k));
    pending_.clear();
    if (placeholders_.empty()) return;
    std::set<std::string> used;
    for (const auto& v : c.variables())
      if (!v.starts_with(placeholder_prefix)) used.insert(v);
    std::map<std::string, std::string> names;
    std::size_t n = 0;
    for (const auto& ph : placeholders_) {
      std::string candidate;
      do {
        candidate = "V" + std::to_string(n++);
      } while (used.contains(candidate));
      used.insert(candidate);
      names.emplace(ph, candidate);
    }
    auto ren = [&](std::string& v) {
      if (auto it = names.find(v); it != names.end()) v = it->second;
    };
    auto ren_term = [&](lin_term& t) {
      lin_term out = lin_term::num(t.constant);
      for (const auto& [v, k] : t.coeffs) {
        std::string name = v;
        ren(name);
        out += lin_term::var(name, k);
      }
      t = std::move(out);
    };
    for (auto& v : c.head.args) ren(v);
    for (auto& b : c.body)
      for (auto& v : b.args) ren(v);
    for (auto& k : c.constraints) {
      ren_term(k.lhs);
      ren_term(k.rhs);
    }
  }
};

}  // namespace

program parse_program(std::string_view text) { return parser(text).run(); }

clause parse_clause(std::string_view text) { return parser(text).single(); }

std::optional<pred_key> parse_pred_name(std::string_view text) {
  try {
    return parser(text).single_pred();
  } catch (const parse_error&) {
    return std::nullopt;
  }
}

}  // namespace horndim
