#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "resmgm/constraint.hpp"

namespace resmgm {

ParseError::ParseError(const std::string& what, int line, int column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

namespace {

struct Token {
  enum class Kind { kOpen, kClose, kAtom, kEnd } kind;
  std::string text;
  int line;
  int column;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_space();
    if (pos_ >= text_.size()) return {Token::Kind::kEnd, "", line_, column_};
    const int line = line_;
    const int column = column_;
    const char c = text_[pos_];
    if (c == '(' || c == ')') {
      advance();
      return {c == '(' ? Token::Kind::kOpen : Token::Kind::kClose, std::string(1, c), line,
              column};
    }
    std::string atom;
    while (pos_ < text_.size()) {
      const char d = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';')
        break;
      atom += d;
      advance();
    }
    return {Token::Kind::kAtom, atom, line, column};
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ';') {  // comment to end of line
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { shift(); }

  ConstraintExpr parse_document() {
    ConstraintExpr expr = parse_expr();
    if (tok_.kind != Token::Kind::kEnd) fail("trailing input after expression");
    return expr;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what, tok_.line, tok_.column);
  }

  void shift() { tok_ = lexer_.next(); }

  void expect(Token::Kind kind, const char* what) {
    if (tok_.kind != kind) fail(std::string("expected ") + what);
    shift();
  }

  int parse_int() {
    if (tok_.kind != Token::Kind::kAtom) fail("expected integer");
    int value = 0;
    const auto& s = tok_.text;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail("invalid integer '" + s + "'");
    shift();
    return value;
  }

  double parse_real() {
    if (tok_.kind != Token::Kind::kAtom) fail("expected number");
    const std::string s = tok_.text;
    char* end = nullptr;
    const double value = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) fail("invalid number '" + s + "'");
    shift();
    return value;
  }

  ConstraintExpr parse_expr() {
    if (tok_.kind != Token::Kind::kOpen) fail("expected '('");
    shift();
    if (tok_.kind != Token::Kind::kAtom) fail("expected constraint keyword");
    const Token head = tok_;
    const std::string keyword = lower(head.text);
    shift();

    ConstraintExpr out;
    if (keyword == "pequantity") {
      const int lo = parse_int();
      const int hi = parse_int();
      out = pe_quantity(lo, hi);
    } else if (keyword == "petype") {
      if (tok_.kind != Token::Kind::kAtom) fail("expected resource type");
      try {
        out = pe_type(parse_resource_type(tok_.text));
      } catch (const std::invalid_argument& e) {
        fail(e.what());
      }
      shift();
    } else if (keyword == "tilesharing") {
      out = tile_sharing();
    } else if (keyword == "downey") {
      const double sigma = parse_real();
      const int a = parse_int();
      out = downey(sigma, a);
    } else if (keyword == "and" || keyword == "or" || keyword == "union") {
      const Combinator op = keyword == "and"  ? Combinator::kAnd
                            : keyword == "or" ? Combinator::kOr
                                              : Combinator::kUnion;
      std::vector<ConstraintExpr> children;
      while (tok_.kind == Token::Kind::kOpen) children.push_back(parse_expr());
      if (children.size() < 2)
        throw ParseError("'" + keyword + "' needs at least two operands", head.line,
                         head.column);
      out = fold(op, children);
    } else {
      throw ParseError("unknown constraint '" + head.text + "'", head.line, head.column);
    }
    expect(Token::Kind::kClose, "')'");
    return out;
  }

  Lexer lexer_;
  Token tok_{};
};

const char* keyword(Combinator op) {
  switch (op) {
    case Combinator::kAnd:
      return "and";
    case Combinator::kOr:
      return "or";
    case Combinator::kUnion:
      return "union";
  }
  return "?";
}

void write(const ConstraintExpr& expr, std::string& out);

// Flattens the left spine of same-operator nodes so that the n-ary form
// parses back to the identical left-folded tree.
void collect_operands(const ConstraintExpr& expr, Combinator op,
                      std::vector<const ConstraintExpr*>& operands) {
  const auto* c = expr.as<Composite>();
  if (c && c->op == op) {
    collect_operands(c->left, op, operands);
    operands.push_back(&c->right);
  } else {
    operands.push_back(&expr);
  }
}

void write(const ConstraintExpr& expr, std::string& out) {
  if (const auto* q = expr.as<PEQuantity>()) {
    out += "(pequantity " + std::to_string(q->min_pes) + " " + std::to_string(q->max_pes) + ")";
  } else if (const auto* t = expr.as<PEType>()) {
    out += "(petype ";
    out += to_string(t->type);
    out += ")";
  } else if (expr.as<TileSharing>()) {
    out += "(tilesharing)";
  } else if (const auto* d = expr.as<Downey>()) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", d->sigma);
    out += "(downey ";
    out += buf;
    out += " " + std::to_string(d->avg_parallelism) + ")";
  } else if (const auto* c = expr.as<Composite>()) {
    std::vector<const ConstraintExpr*> operands;
    collect_operands(c->left, c->op, operands);
    operands.push_back(&c->right);
    out += "(";
    out += keyword(c->op);
    for (const auto* child : operands) {
      out += ' ';
      write(*child, out);
    }
    out += ")";
  }
}

}  // namespace

ConstraintExpr parse_constraint(std::string_view text) { return Parser(text).parse_document(); }

std::string serialize_constraint(const ConstraintExpr& expr) {
  std::string out;
  write(expr, out);
  return out;
}

}  // namespace resmgm
