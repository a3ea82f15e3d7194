#pragma once

// Seeded random AST generator for property tests. Generates only trees the
// parser itself can produce: nonnegative constants (signs appear as unary
// negation), comparisons only inside if(...), correct call arities.

#include <random>
#include <string>
#include <vector>

#include "permet/expr.hpp"

namespace permet::testing {

class AstGenerator {
 public:
  AstGenerator(std::uint64_t seed, std::vector<std::string> variables)
      : engine_(seed), variables_(std::move(variables)) {}

  ExprPtr generate(int max_depth) {
    if (max_depth <= 0 || pick(5) == 0) return leaf();
    switch (pick(8)) {
      case 0: return make_expr(Negate{generate(max_depth - 1)});
      case 1: return make_expr(Binary{BinaryOp::Add, generate(max_depth - 1), generate(max_depth - 1)});
      case 2: return make_expr(Binary{BinaryOp::Sub, generate(max_depth - 1), generate(max_depth - 1)});
      case 3: return make_expr(Binary{BinaryOp::Mul, generate(max_depth - 1), generate(max_depth - 1)});
      case 4: return make_expr(Binary{BinaryOp::Div, generate(max_depth - 1), generate(max_depth - 1)});
      case 5: return make_expr(Binary{BinaryOp::Pow, generate(max_depth - 1), small_exponent()});
      case 6: return call(max_depth);
      default: return conditional(max_depth);
    }
  }

  double uniform(double lo, double hi) {
    return lo + (static_cast<double>(engine_() >> 11) * 0x1.0p-53) * (hi - lo);
  }

 private:
  std::mt19937_64 engine_;
  std::vector<std::string> variables_;

  std::size_t pick(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

  ExprPtr leaf() {
    if (!variables_.empty() && pick(2) == 0) return make_variable(variables_[pick(variables_.size())]);
    // nonnegative constants round-trip through the printer unchanged
    return make_constant(uniform(0.0, 10.0));
  }

  ExprPtr small_exponent() {
    // keep powers tame so evaluation mostly stays finite
    return make_constant(static_cast<double>(pick(4)));
  }

  ExprPtr call(int max_depth) {
    switch (pick(6)) {
      case 0: return make_expr(Call{"abs", {generate(max_depth - 1)}});
      case 1: return make_expr(Call{"sqrt", {generate(max_depth - 1)}});
      case 2: return make_expr(Call{"exp", {generate(max_depth - 1)}});
      case 3: return make_expr(Call{"log", {generate(max_depth - 1)}});
      case 4: return make_expr(Call{"min", {generate(max_depth - 1), generate(max_depth - 1)}});
      default: return make_expr(Call{"max", {generate(max_depth - 1), generate(max_depth - 1)}});
    }
  }

  ExprPtr conditional(int max_depth) {
    static constexpr CmpOp ops[] = {CmpOp::Lt, CmpOp::Le, CmpOp::Gt,
                                    CmpOp::Ge, CmpOp::Eq, CmpOp::Ne};
    return make_expr(Conditional{ops[pick(6)], generate(max_depth - 1), generate(max_depth - 1),
                                 generate(max_depth - 1), generate(max_depth - 1)});
  }
};

}  // namespace permet::testing
