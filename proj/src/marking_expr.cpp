#include "flare/marking_expr.hpp"

#include <algorithm>
#include <cctype>

#include "flare/error.hpp"

namespace flare {

class MarkingExpr::Parser {
 public:
  Parser(MarkingExpr& out, std::string_view src) : out_(out), src_(src) {}

  int parse() {
    int root = parse_or();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("marking expression '" + std::string(src_) + "': " + what +
                     " at offset " + std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(std::string_view tok) {
    skip_ws();
    if (src_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  int node(Op op, int lhs = -1, int rhs = -1, std::int64_t value = 0) {
    out_.nodes_.push_back({op, value, lhs, rhs});
    return static_cast<int>(out_.nodes_.size()) - 1;
  }

  int parse_or() {
    int lhs = parse_and();
    while (accept("||")) lhs = node(Op::kOr, lhs, parse_and());
    return lhs;
  }

  int parse_and() {
    int lhs = parse_not();
    while (accept("&&")) lhs = node(Op::kAnd, lhs, parse_not());
    return lhs;
  }

  int parse_not() {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '!' &&
        (pos_ + 1 >= src_.size() || src_[pos_ + 1] != '=')) {
      ++pos_;
      return node(Op::kNot, parse_not());
    }
    return parse_cmp();
  }

  int parse_cmp() {
    int lhs = parse_sum();
    // Two-character operators first so "<=" is not read as "<".
    static constexpr std::pair<std::string_view, Op> kOps[] = {
        {"==", Op::kEq}, {"!=", Op::kNe}, {"<=", Op::kLe},
        {">=", Op::kGe}, {"<", Op::kLt},  {">", Op::kGt}};
    for (const auto& [tok, op] : kOps) {
      if (accept(tok)) return node(op, lhs, parse_sum());
    }
    return lhs;
  }

  int parse_sum() {
    int lhs = parse_atom();
    for (;;) {
      if (accept("+")) {
        lhs = node(Op::kAdd, lhs, parse_atom());
      } else if (accept("-")) {
        lhs = node(Op::kSub, lhs, parse_atom());
      } else {
        return lhs;
      }
    }
  }

  int parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      int inner = parse_or();
      if (!accept(")")) fail("expected ')'");
      return inner;
    }
    if (c == '-') {
      ++pos_;
      return node(Op::kNeg, parse_atom());
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::int64_t v = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        v = v * 10 + (src_[pos_++] - '0');
      }
      return node(Op::kConst, -1, -1, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' ||
              src_[pos_] == '.')) {
        ++pos_;
      }
      std::string name(src_.substr(start, pos_ - start));
      auto& ids = out_.identifiers_;
      auto it = std::find(ids.begin(), ids.end(), name);
      std::int64_t slot = it - ids.begin();
      if (it == ids.end()) ids.push_back(std::move(name));
      return node(Op::kVar, -1, -1, slot);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  MarkingExpr& out_;
  std::string_view src_;
  std::size_t pos_ = 0;
};

MarkingExpr::MarkingExpr(std::string_view text) : text_(text) {
  root_ = Parser(*this, text_).parse();
}

std::int64_t MarkingExpr::evaluate(
    const std::function<std::int64_t(std::size_t)>& tokens) const {
  return eval(root_, tokens);
}

std::int64_t MarkingExpr::eval(
    int idx, const std::function<std::int64_t(std::size_t)>& tokens) const {
  const Node& n = nodes_[idx];
  switch (n.op) {
    case Op::kConst: return n.value;
    case Op::kVar: return tokens(static_cast<std::size_t>(n.value));
    case Op::kNot: return eval(n.lhs, tokens) == 0;
    case Op::kNeg: return -eval(n.lhs, tokens);
    case Op::kAdd: return eval(n.lhs, tokens) + eval(n.rhs, tokens);
    case Op::kSub: return eval(n.lhs, tokens) - eval(n.rhs, tokens);
    case Op::kEq: return eval(n.lhs, tokens) == eval(n.rhs, tokens);
    case Op::kNe: return eval(n.lhs, tokens) != eval(n.rhs, tokens);
    case Op::kLt: return eval(n.lhs, tokens) < eval(n.rhs, tokens);
    case Op::kLe: return eval(n.lhs, tokens) <= eval(n.rhs, tokens);
    case Op::kGt: return eval(n.lhs, tokens) > eval(n.rhs, tokens);
    case Op::kGe: return eval(n.lhs, tokens) >= eval(n.rhs, tokens);
    case Op::kAnd: return eval(n.lhs, tokens) != 0 && eval(n.rhs, tokens) != 0;
    case Op::kOr: return eval(n.lhs, tokens) != 0 || eval(n.rhs, tokens) != 0;
  }
  return 0;
}

}  // namespace flare
