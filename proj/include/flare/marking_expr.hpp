#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace flare {

/// Boolean/integer expression over place token counts, e.g.
/// `doneA >= 1 && doneB == 0` or `!(P1 + P2 > 0)`.
///
/// Grammar (lowest to highest precedence): `||`, `&&`, unary `!`, one
/// comparison (`== != < <= > >=`), `+`/`-`, then integers, place names and
/// parentheses. Comparisons and logical operators yield 0 or 1; the
/// expression holds when its value is non-zero.
class MarkingExpr {
 public:
  explicit MarkingExpr(std::string_view text);

  const std::string& text() const { return text_; }

  // Place names referenced by the expression, in first-use order.
  const std::vector<std::string>& identifiers() const { return identifiers_; }

  // `tokens(i)` must return the count for identifiers()[i].
  std::int64_t evaluate(const std::function<std::int64_t(std::size_t)>& tokens) const;

 private:
  enum class Op { kConst, kVar, kNot, kNeg, kAdd, kSub, kEq, kNe, kLt, kLe, kGt, kGe, kAnd, kOr };
  struct Node {
    Op op;
    std::int64_t value = 0;  // constant or identifier slot
    int lhs = -1;
    int rhs = -1;
  };
  class Parser;

  std::int64_t eval(int node, const std::function<std::int64_t(std::size_t)>& tokens) const;

  std::string text_;
  std::vector<std::string> identifiers_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace flare
