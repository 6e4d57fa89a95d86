#include "conj1d/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "conj1d/error.hpp"
#include "conj1d/kernels.hpp"

namespace conj1d {

namespace {

ExprPtr make_number(double v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Number;
    n->number = v;
    return n;
}

ExprPtr make_var(ExprNode::Kind k) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    return n;
}

ExprPtr make_neg(ExprPtr child) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Neg;
    n->lhs = std::move(child);
    return n;
}

ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Binary;
    n->bop = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

ExprPtr make_pow(ExprPtr base, int exponent) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Pow;
    n->exponent = exponent;
    n->lhs = std::move(base);
    return n;
}

class Parser {
  public:
    explicit Parser(std::string_view text) : text_(text) {}

    ExprPtr run() {
        ExprPtr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size())
            throw parse_error("unexpected trailing input", pos_);
        return e;
    }

  private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    ExprPtr parse_expr() {
        ExprPtr lhs = parse_term();
        for (;;) {
            if (eat('+'))
                lhs = make_binary(BinaryOp::Add, lhs, parse_term());
            else if (eat('-'))
                lhs = make_binary(BinaryOp::Sub, lhs, parse_term());
            else
                return lhs;
        }
    }

    ExprPtr parse_term() {
        ExprPtr lhs = parse_factor();
        for (;;) {
            if (eat('*'))
                lhs = make_binary(BinaryOp::Mul, lhs, parse_factor());
            else if (eat('/'))
                lhs = make_binary(BinaryOp::Div, lhs, parse_factor());
            else
                return lhs;
        }
    }

    ExprPtr parse_factor() {
        if (eat('-')) return make_neg(parse_power());
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_atom();
        if (eat('^')) return make_pow(base, parse_int_exponent());
        return base;
    }

    int parse_int_exponent() {
        skip_ws();
        std::size_t start = pos_;
        bool neg = false;
        if (pos_ < text_.size() && text_[pos_] == '-') {
            neg = true;
            ++pos_;
        }
        std::size_t digits_start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ == digits_start)
            throw parse_error("expected integer exponent", start);
        // "x^2.5" is a non-integer exponent, not a parse of "2" followed by ".5"
        if (pos_ < text_.size() && text_[pos_] == '.')
            throw parse_error("non-integer exponent", start);
        long v = std::strtol(text_.data() + digits_start, nullptr, 10);
        if (v > 64) throw parse_error("exponent too large", start);
        return neg ? -static_cast<int>(v) : static_cast<int>(v);
    }

    ExprPtr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) throw parse_error("unexpected end of input", pos_);
        char c = text_[pos_];

        if (c == '(') {
            ++pos_;
            ExprPtr e = parse_expr();
            skip_ws();
            if (!eat(')')) throw parse_error("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        throw parse_error(std::string("unexpected character '") + c + "'", pos_);
    }

    ExprPtr parse_number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            } else {
                pos_ = mark;  // "2e" with no digits: the 'e' is not part of the number
            }
        }
        std::string tok(text_.substr(start, pos_ - start));
        char* end = nullptr;
        double v = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size())
            throw parse_error("malformed number '" + tok + "'", start);
        return make_number(v);
    }

    ExprPtr parse_identifier() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                       text_[pos_] == '_'))
            ++pos_;
        std::string name(text_.substr(start, pos_ - start));
        if (name == "x") return make_var(ExprNode::Kind::VarX);
        if (name == "mu") return make_var(ExprNode::Kind::VarMu);
        throw parse_error("unknown identifier '" + name + "'", start);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

bool tree_uses_mu(const ExprPtr& n) {
    if (!n) return false;
    if (n->kind == ExprNode::Kind::VarMu) return true;
    return tree_uses_mu(n->lhs) || tree_uses_mu(n->rhs);
}

void compile_node(const ExprPtr& n, ExprProgram& prog, int& depth, int& max_depth) {
    using Op = ExprProgram::Op;
    auto push = [&](int delta) {
        depth += delta;
        if (depth > max_depth) max_depth = depth;
    };
    switch (n->kind) {
        case ExprNode::Kind::Number:
            prog.code.push_back({Op::PushConst, 0, n->number});
            push(+1);
            break;
        case ExprNode::Kind::VarX:
            prog.code.push_back({Op::PushX, 0, 0.0});
            push(+1);
            break;
        case ExprNode::Kind::VarMu:
            prog.code.push_back({Op::PushMu, 0, 0.0});
            push(+1);
            break;
        case ExprNode::Kind::Neg:
            compile_node(n->lhs, prog, depth, max_depth);
            prog.code.push_back({Op::Neg, 0, 0.0});
            break;
        case ExprNode::Kind::Pow:
            compile_node(n->lhs, prog, depth, max_depth);
            prog.code.push_back({Op::PowInt, n->exponent, 0.0});
            break;
        case ExprNode::Kind::Binary: {
            compile_node(n->lhs, prog, depth, max_depth);
            compile_node(n->rhs, prog, depth, max_depth);
            Op op = Op::Add;
            switch (n->bop) {
                case BinaryOp::Add: op = Op::Add; break;
                case BinaryOp::Sub: op = Op::Sub; break;
                case BinaryOp::Mul: op = Op::Mul; break;
                case BinaryOp::Div: op = Op::Div; break;
            }
            prog.code.push_back({op, 0, 0.0});
            push(-1);
            break;
        }
    }
}

ExprProgram compile_tree(const ExprPtr& root) {
    ExprProgram prog;
    int depth = 0, max_depth = 0;
    compile_node(root, prog, depth, max_depth);
    prog.max_stack = max_depth;
    return prog;
}

// Precedence levels for printing: additive 1, multiplicative 2, unary minus 3,
// power 4, atom 5. A child is parenthesized when its level is below what the
// surrounding position requires.
int node_prec(const ExprPtr& n) {
    switch (n->kind) {
        case ExprNode::Kind::Binary:
            return (n->bop == BinaryOp::Add || n->bop == BinaryOp::Sub) ? 1 : 2;
        case ExprNode::Kind::Neg: return 3;
        case ExprNode::Kind::Pow: return 4;
        case ExprNode::Kind::Number:
            // a negative literal prints with a leading '-', which reparses at
            // unary-minus level, so it must be guarded the same way
            return std::signbit(n->number) ? 3 : 5;
        default: return 5;
    }
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void print_node(const ExprPtr& n, int min_prec, std::string& out) {
    bool parens = node_prec(n) < min_prec;
    if (parens) out += '(';
    switch (n->kind) {
        case ExprNode::Kind::Number: out += format_number(n->number); break;
        case ExprNode::Kind::VarX: out += 'x'; break;
        case ExprNode::Kind::VarMu: out += "mu"; break;
        case ExprNode::Kind::Neg:
            out += '-';
            print_node(n->lhs, 4, out);
            break;
        case ExprNode::Kind::Pow:
            print_node(n->lhs, 5, out);
            out += '^';
            out += std::to_string(n->exponent);
            break;
        case ExprNode::Kind::Binary: {
            // left-associative operators: the right child needs strictly
            // higher precedence or parentheses, or reparsing regroups it
            const char* sym = "+";
            int lp = 1, rp = 2;
            switch (n->bop) {
                case BinaryOp::Add: sym = "+"; lp = 1; rp = 2; break;
                case BinaryOp::Sub: sym = "-"; lp = 1; rp = 2; break;
                case BinaryOp::Mul: sym = "*"; lp = 2; rp = 3; break;
                case BinaryOp::Div: sym = "/"; lp = 2; rp = 3; break;
            }
            print_node(n->lhs, lp, out);
            out += sym;
            print_node(n->rhs, rp, out);
            break;
        }
    }
    if (parens) out += ')';
}

// x^k by squaring; scalar twin of the kernel implementations, same op order.
double pow_int(double v, int e) {
    bool neg = e < 0;
    unsigned k = neg ? static_cast<unsigned>(-(long)e) : static_cast<unsigned>(e);
    double result = 1.0, base = v;
    while (k) {
        if (k & 1u) result *= base;
        base *= base;
        k >>= 1u;
    }
    return neg ? 1.0 / result : result;
}

double eval_node(const ExprPtr& n, double x, double mu) {
    switch (n->kind) {
        case ExprNode::Kind::Number: return n->number;
        case ExprNode::Kind::VarX: return x;
        case ExprNode::Kind::VarMu: return mu;
        case ExprNode::Kind::Neg: return -eval_node(n->lhs, x, mu);
        case ExprNode::Kind::Pow: return pow_int(eval_node(n->lhs, x, mu), n->exponent);
        case ExprNode::Kind::Binary: {
            double a = eval_node(n->lhs, x, mu);
            double b = eval_node(n->rhs, x, mu);
            switch (n->bop) {
                case BinaryOp::Add: return a + b;
                case BinaryOp::Sub: return a - b;
                case BinaryOp::Mul: return a * b;
                case BinaryOp::Div:
                    if (b == 0.0) throw error(errc::domain, "division by zero");
                    return a / b;
            }
        }
    }
    throw error(errc::internal, "corrupt expression node");
}

ExprPtr substitute_x(const ExprPtr& n, const ExprPtr& repl) {
    switch (n->kind) {
        case ExprNode::Kind::VarX: return repl;
        case ExprNode::Kind::Number:
        case ExprNode::Kind::VarMu: return n;
        case ExprNode::Kind::Neg: return make_neg(substitute_x(n->lhs, repl));
        case ExprNode::Kind::Pow: return make_pow(substitute_x(n->lhs, repl), n->exponent);
        case ExprNode::Kind::Binary:
            return make_binary(n->bop, substitute_x(n->lhs, repl), substitute_x(n->rhs, repl));
    }
    throw error(errc::internal, "corrupt expression node");
}

}  // namespace

MapExpr::MapExpr(ExprPtr root) : root_(std::move(root)) {
    uses_mu_ = tree_uses_mu(root_);
    prog_ = compile_tree(root_);
}

MapExpr MapExpr::parse(std::string_view text) { return MapExpr(Parser(text).run()); }

double MapExpr::eval(double x, double mu) const { return eval_node(root_, x, mu); }

std::string MapExpr::str() const {
    std::string out;
    print_node(root_, 0, out);
    return out;
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return a == b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case ExprNode::Kind::Number: return a->number == b->number;
        case ExprNode::Kind::VarX:
        case ExprNode::Kind::VarMu: return true;
        case ExprNode::Kind::Neg: return expr_equal(a->lhs, b->lhs);
        case ExprNode::Kind::Pow:
            return a->exponent == b->exponent && expr_equal(a->lhs, b->lhs);
        case ExprNode::Kind::Binary:
            return a->bop == b->bop && expr_equal(a->lhs, b->lhs) && expr_equal(a->rhs, b->rhs);
    }
    return false;
}

bool operator==(const MapExpr& a, const MapExpr& b) { return expr_equal(a.root_, b.root_); }

MapExpr reflect_expr(const MapExpr& e, double c) {
    ExprPtr cx = make_binary(BinaryOp::Sub, make_number(c), make_var(ExprNode::Kind::VarX));
    ExprPtr inner = substitute_x(e.root(), cx);
    return MapExpr(make_binary(BinaryOp::Sub, make_number(c), inner));
}

}  // namespace conj1d
