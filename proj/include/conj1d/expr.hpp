#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace conj1d {

// Grammar (EBNF):
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := ('-')? power
//   power  := atom ('^' integer)?
//   atom   := number | 'x' | 'mu' | '(' expr ')'
// Unary minus binds looser than '^', so "-x^2" parses as -(x^2).
// Exponents are integer literals only; anything else is rejected.

enum class BinaryOp : std::uint8_t { Add, Sub, Mul, Div };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    enum class Kind : std::uint8_t { Number, VarX, VarMu, Neg, Binary, Pow };

    Kind kind;
    double number = 0.0;   // Number
    BinaryOp bop{};        // Binary
    int exponent = 0;      // Pow
    ExprPtr lhs, rhs;      // Neg/Pow use lhs only
};

/// Flat postfix form of an expression, evaluated by the kernels without recursion.
struct ExprProgram {
    enum class Op : std::uint8_t { PushConst, PushX, PushMu, Add, Sub, Mul, Div, Neg, PowInt };
    struct Instr {
        Op op;
        std::int32_t iarg = 0;  // PowInt exponent
        double darg = 0.0;      // PushConst value
    };
    std::vector<Instr> code;
    int max_stack = 0;
};

class MapExpr {
  public:
    explicit MapExpr(ExprPtr root);

    /// Parses expression text; throws parse_error with the offending offset.
    static MapExpr parse(std::string_view text);

    double eval(double x, double mu = 0.0) const;
    bool uses_mu() const { return uses_mu_; }

    /// Canonical text form; parse(str()) reproduces the same tree.
    std::string str() const;

    const ExprPtr& root() const { return root_; }
    const ExprProgram& program() const { return prog_; }

    friend bool operator==(const MapExpr& a, const MapExpr& b);

  private:
    ExprPtr root_;
    bool uses_mu_ = false;
    ExprProgram prog_;
};

bool expr_equal(const ExprPtr& a, const ExprPtr& b);

/// Expression for c - e(c - x): e conjugated by the reflection r(x) = c - x.
MapExpr reflect_expr(const MapExpr& e, double c);

}  // namespace conj1d
