#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace logifit {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Arithmetic expression over named quantities. Immutable; shared subtrees are
/// fine.
struct Expr {
    enum class Kind { Constant, Var, Add, Sub, Mul, Div, Pow, Neg, Exp, Log };

    Kind kind;
    double value = 0.0;   // Constant
    std::string name;     // Var
    ExprPtr lhs, rhs;     // children (rhs empty for unary)

    static ExprPtr constant(double v) {
        return std::make_shared<Expr>(Expr{Kind::Constant, v, {}, nullptr, nullptr});
    }
    static ExprPtr var(std::string n) {
        return std::make_shared<Expr>(Expr{Kind::Var, 0.0, std::move(n), nullptr, nullptr});
    }
    static ExprPtr binary(Kind k, ExprPtr a, ExprPtr b) {
        return std::make_shared<Expr>(Expr{k, 0.0, {}, std::move(a), std::move(b)});
    }
    static ExprPtr unary(Kind k, ExprPtr a) {
        return std::make_shared<Expr>(Expr{k, 0.0, {}, std::move(a), nullptr});
    }
};

namespace detail {

inline int precedence(Expr::Kind k) {
    switch (k) {
        case Expr::Kind::Add:
        case Expr::Kind::Sub: return 1;
        case Expr::Kind::Mul:
        case Expr::Kind::Div: return 2;
        case Expr::Kind::Neg: return 3;
        case Expr::Kind::Pow: return 4;
        default: return 5;
    }
}

inline void print_expr(const Expr& e, std::string& out, int parent_prec, bool right_child) {
    const int prec = precedence(e.kind);
    // A right operand of equal precedence needs parentheses for - and /;
    // pow is right-associative so the mirrored rule applies.
    bool parens = prec < parent_prec ||
                  (prec == parent_prec && right_child && (parent_prec == 1 || parent_prec == 2)) ||
                  (prec == parent_prec && !right_child && parent_prec == 4);
    switch (e.kind) {
        case Expr::Kind::Constant: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", e.value);
            out += buf;
            return;
        }
        case Expr::Kind::Var:
            out += e.name;
            return;
        case Expr::Kind::Exp:
        case Expr::Kind::Log:
            out += (e.kind == Expr::Kind::Exp) ? "exp(" : "log(";
            print_expr(*e.lhs, out, 0, false);
            out += ')';
            return;
        case Expr::Kind::Neg:
            if (parens) out += '(';
            out += '-';
            print_expr(*e.lhs, out, prec, false);
            if (parens) out += ')';
            return;
        default: break;
    }
    const char* op = nullptr;
    switch (e.kind) {
        case Expr::Kind::Add: op = " + "; break;
        case Expr::Kind::Sub: op = " - "; break;
        case Expr::Kind::Mul: op = "*"; break;
        case Expr::Kind::Div: op = "/"; break;
        case Expr::Kind::Pow: op = "^"; break;
        default: op = "?"; break;
    }
    if (parens) out += '(';
    print_expr(*e.lhs, out, prec, false);
    out += op;
    print_expr(*e.rhs, out, prec, true);
    if (parens) out += ')';
}

} // namespace detail

inline std::string to_string(const Expr& e) {
    std::string out;
    detail::print_expr(e, out, 0, false);
    return out;
}

inline std::string to_string(const ExprPtr& e) { return to_string(*e); }

inline void collect_vars(const Expr& e, std::set<std::string>& out) {
    if (e.kind == Expr::Kind::Var) out.insert(e.name);
    if (e.lhs) collect_vars(*e.lhs, out);
    if (e.rhs) collect_vars(*e.rhs, out);
}

/// Evaluates over a name -> value environment. Throws EvalError naming the
/// offending subexpression.
inline double eval_expression(const Expr& e, const std::map<std::string, double>& env) {
    switch (e.kind) {
        case Expr::Kind::Constant: return e.value;
        case Expr::Kind::Var: {
            auto it = env.find(e.name);
            if (it == env.end()) throw EvalError("unbound name '" + e.name + "'");
            return it->second;
        }
        case Expr::Kind::Add: return eval_expression(*e.lhs, env) + eval_expression(*e.rhs, env);
        case Expr::Kind::Sub: return eval_expression(*e.lhs, env) - eval_expression(*e.rhs, env);
        case Expr::Kind::Mul: return eval_expression(*e.lhs, env) * eval_expression(*e.rhs, env);
        case Expr::Kind::Div: {
            double num = eval_expression(*e.lhs, env);
            double den = eval_expression(*e.rhs, env);
            if (den == 0.0) throw EvalError("division by zero in '" + to_string(e) + "'");
            return num / den;
        }
        case Expr::Kind::Pow: {
            double r = std::pow(eval_expression(*e.lhs, env), eval_expression(*e.rhs, env));
            if (!std::isfinite(r)) throw EvalError("non-finite power in '" + to_string(e) + "'");
            return r;
        }
        case Expr::Kind::Neg: return -eval_expression(*e.lhs, env);
        case Expr::Kind::Exp: {
            double r = std::exp(eval_expression(*e.lhs, env));
            if (!std::isfinite(r)) throw EvalError("exp overflow in '" + to_string(e) + "'");
            return r;
        }
        case Expr::Kind::Log: {
            double a = eval_expression(*e.lhs, env);
            if (a <= 0.0) throw EvalError("log of non-positive argument in '" + to_string(e) + "'");
            return std::log(a);
        }
    }
    throw EvalError("corrupt expression node");
}

/// Expression flattened against a fixed symbol table; evaluates over a flat
/// slot vector. This is the hot path inside the simulators.
class CompiledExpr {
public:
    CompiledExpr() = default;

    /// `slots` maps each name usable by the expression to its index in the
    /// evaluation vector.
    CompiledExpr(const ExprPtr& e, const std::map<std::string, std::size_t>& slots) {
        root_ = e;
        compile(*e, slots);
    }

    double eval(std::span<const double> env) const {
        double stack[64];
        int sp = 0;
        for (const Op& op : ops_) {
            switch (op.code) {
                case Code::Push: stack[sp++] = op.value; break;
                case Code::Load: stack[sp++] = env[op.slot]; break;
                case Code::Add: --sp; stack[sp - 1] += stack[sp]; break;
                case Code::Sub: --sp; stack[sp - 1] -= stack[sp]; break;
                case Code::Mul: --sp; stack[sp - 1] *= stack[sp]; break;
                case Code::Div:
                    --sp;
                    if (stack[sp] == 0.0)
                        throw EvalError("division by zero in '" + to_string(root_) + "'");
                    stack[sp - 1] /= stack[sp];
                    break;
                case Code::Pow:
                    --sp;
                    stack[sp - 1] = std::pow(stack[sp - 1], stack[sp]);
                    break;
                case Code::Neg: stack[sp - 1] = -stack[sp - 1]; break;
                case Code::Exp: stack[sp - 1] = std::exp(stack[sp - 1]); break;
                case Code::Log:
                    if (stack[sp - 1] <= 0.0)
                        throw EvalError("log of non-positive argument in '" + to_string(root_) + "'");
                    stack[sp - 1] = std::log(stack[sp - 1]);
                    break;
            }
        }
        return stack[0];
    }

private:
    enum class Code { Push, Load, Add, Sub, Mul, Div, Pow, Neg, Exp, Log };
    struct Op {
        Code code;
        double value = 0.0;
        std::size_t slot = 0;
    };

    void compile(const Expr& e, const std::map<std::string, std::size_t>& slots) {
        switch (e.kind) {
            case Expr::Kind::Constant:
                ops_.push_back({Code::Push, e.value, 0});
                return;
            case Expr::Kind::Var: {
                auto it = slots.find(e.name);
                if (it == slots.end()) throw EvalError("unbound name '" + e.name + "'");
                ops_.push_back({Code::Load, 0.0, it->second});
                return;
            }
            case Expr::Kind::Neg:
            case Expr::Kind::Exp:
            case Expr::Kind::Log:
                compile(*e.lhs, slots);
                ops_.push_back({unary_code(e.kind), 0.0, 0});
                return;
            default:
                compile(*e.lhs, slots);
                compile(*e.rhs, slots);
                ops_.push_back({binary_code(e.kind), 0.0, 0});
                return;
        }
    }

    static Code unary_code(Expr::Kind k) {
        switch (k) {
            case Expr::Kind::Neg: return Code::Neg;
            case Expr::Kind::Exp: return Code::Exp;
            default: return Code::Log;
        }
    }
    static Code binary_code(Expr::Kind k) {
        switch (k) {
            case Expr::Kind::Add: return Code::Add;
            case Expr::Kind::Sub: return Code::Sub;
            case Expr::Kind::Mul: return Code::Mul;
            case Expr::Kind::Div: return Code::Div;
            default: return Code::Pow;
        }
    }

    std::vector<Op> ops_;
    ExprPtr root_;
};

inline bool equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Expr::Kind::Constant: return a.value == b.value;
        case Expr::Kind::Var: return a.name == b.name;
        default: break;
    }
    if (static_cast<bool>(a.lhs) != static_cast<bool>(b.lhs)) return false;
    if (static_cast<bool>(a.rhs) != static_cast<bool>(b.rhs)) return false;
    if (a.lhs && !equal(*a.lhs, *b.lhs)) return false;
    if (a.rhs && !equal(*a.rhs, *b.rhs)) return false;
    return true;
}

} // namespace logifit
