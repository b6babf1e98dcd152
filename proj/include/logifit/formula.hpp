#pragma once

#include <algorithm>
#include <cstdio>
#include <memory>
#include <string>

#include "expr.hpp"

namespace logifit {

enum class Cmp { Lt, Le, Gt, Ge, Eq };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Metric temporal formula over piecewise-constant trajectories.
struct Formula {
    enum class Kind { True, Atomic, Not, And, Or, Until, Eventually, Always };

    Kind kind;
    Cmp cmp = Cmp::Lt;        // Atomic
    ExprPtr lhs_expr, rhs_expr;
    double t_lo = 0.0, t_hi = 0.0; // temporal window
    FormulaPtr lhs, rhs;      // children (rhs empty for unary)

    static FormulaPtr tt() {
        return std::make_shared<Formula>(Formula{Kind::True, Cmp::Lt, nullptr, nullptr, 0, 0, nullptr, nullptr});
    }
    static FormulaPtr atomic(ExprPtr l, Cmp c, ExprPtr r) {
        return std::make_shared<Formula>(Formula{Kind::Atomic, c, std::move(l), std::move(r), 0, 0, nullptr, nullptr});
    }
    static FormulaPtr negate(FormulaPtr f) {
        return std::make_shared<Formula>(Formula{Kind::Not, Cmp::Lt, nullptr, nullptr, 0, 0, std::move(f), nullptr});
    }
    static FormulaPtr conj(FormulaPtr a, FormulaPtr b) {
        return std::make_shared<Formula>(Formula{Kind::And, Cmp::Lt, nullptr, nullptr, 0, 0, std::move(a), std::move(b)});
    }
    static FormulaPtr disj(FormulaPtr a, FormulaPtr b) {
        return std::make_shared<Formula>(Formula{Kind::Or, Cmp::Lt, nullptr, nullptr, 0, 0, std::move(a), std::move(b)});
    }
    static FormulaPtr until(double a, double b, FormulaPtr l, FormulaPtr r) {
        return std::make_shared<Formula>(Formula{Kind::Until, Cmp::Lt, nullptr, nullptr, a, b, std::move(l), std::move(r)});
    }
    static FormulaPtr eventually(double a, double b, FormulaPtr f) {
        return std::make_shared<Formula>(Formula{Kind::Eventually, Cmp::Lt, nullptr, nullptr, a, b, std::move(f), nullptr});
    }
    static FormulaPtr always(double a, double b, FormulaPtr f) {
        return std::make_shared<Formula>(Formula{Kind::Always, Cmp::Lt, nullptr, nullptr, a, b, std::move(f), nullptr});
    }
};

/// Worst-case look-ahead: the trajectory horizon needed to decide truth at 0.
inline double temporal_depth(const Formula& f) {
    switch (f.kind) {
        case Formula::Kind::True:
        case Formula::Kind::Atomic:
            return 0.0;
        case Formula::Kind::Not:
            return temporal_depth(*f.lhs);
        case Formula::Kind::And:
        case Formula::Kind::Or:
            return std::max(temporal_depth(*f.lhs), temporal_depth(*f.rhs));
        case Formula::Kind::Until:
            return f.t_hi + std::max(temporal_depth(*f.lhs), temporal_depth(*f.rhs));
        case Formula::Kind::Eventually:
        case Formula::Kind::Always:
            return f.t_hi + temporal_depth(*f.lhs);
    }
    return 0.0;
}

namespace detail {

inline const char* cmp_str(Cmp c) {
    switch (c) {
        case Cmp::Lt: return " < ";
        case Cmp::Le: return " <= ";
        case Cmp::Gt: return " > ";
        case Cmp::Ge: return " >= ";
        case Cmp::Eq: return " = ";
    }
    return "?";
}

inline std::string window_str(double a, double b) {
    char buf[80];
    std::snprintf(buf, sizeof buf, "[%.17g,%.17g]", a, b);
    return buf;
}

// Precedence: ! > & > | > U. Temporal unaries bind like !.
inline int formula_prec(Formula::Kind k) {
    switch (k) {
        case Formula::Kind::Until: return 1;
        case Formula::Kind::Or: return 2;
        case Formula::Kind::And: return 3;
        default: return 4;
    }
}

inline void print_formula(const Formula& f, std::string& out, int parent_prec) {
    const int prec = formula_prec(f.kind);
    bool parens = prec <= parent_prec && f.kind != Formula::Kind::True &&
                  f.kind != Formula::Kind::Atomic && f.kind != Formula::Kind::Not &&
                  f.kind != Formula::Kind::Eventually && f.kind != Formula::Kind::Always;
    switch (f.kind) {
        case Formula::Kind::True:
            out += "tt";
            return;
        case Formula::Kind::Atomic:
            out += '(';
            out += to_string(*f.lhs_expr);
            out += cmp_str(f.cmp);
            out += to_string(*f.rhs_expr);
            out += ')';
            return;
        case Formula::Kind::Not:
            out += '!';
            print_formula(*f.lhs, out, 4);
            return;
        case Formula::Kind::Eventually:
        case Formula::Kind::Always:
            out += (f.kind == Formula::Kind::Eventually) ? 'F' : 'G';
            out += window_str(f.t_lo, f.t_hi);
            out += ' ';
            print_formula(*f.lhs, out, 4);
            return;
        case Formula::Kind::And:
            if (parens) out += '(';
            print_formula(*f.lhs, out, prec - 1);
            out += " & ";
            print_formula(*f.rhs, out, prec);
            if (parens) out += ')';
            return;
        case Formula::Kind::Or:
            if (parens) out += '(';
            print_formula(*f.lhs, out, prec - 1);
            out += " | ";
            print_formula(*f.rhs, out, prec);
            if (parens) out += ')';
            return;
        case Formula::Kind::Until:
            if (parens) out += '(';
            print_formula(*f.lhs, out, prec);
            out += " U";
            out += window_str(f.t_lo, f.t_hi);
            out += ' ';
            print_formula(*f.rhs, out, prec);
            if (parens) out += ')';
            return;
    }
}

} // namespace detail

inline std::string to_string(const Formula& f) {
    std::string out;
    detail::print_formula(f, out, 0);
    return out;
}

inline std::string to_string(const FormulaPtr& f) { return to_string(*f); }

inline bool equal(const Formula& a, const Formula& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == Formula::Kind::Atomic) {
        return a.cmp == b.cmp && equal(*a.lhs_expr, *b.lhs_expr) && equal(*a.rhs_expr, *b.rhs_expr);
    }
    if (a.kind == Formula::Kind::Until || a.kind == Formula::Kind::Eventually ||
        a.kind == Formula::Kind::Always) {
        if (a.t_lo != b.t_lo || a.t_hi != b.t_hi) return false;
    }
    if (static_cast<bool>(a.lhs) != static_cast<bool>(b.lhs)) return false;
    if (static_cast<bool>(a.rhs) != static_cast<bool>(b.rhs)) return false;
    if (a.lhs && !equal(*a.lhs, *b.lhs)) return false;
    if (a.rhs && !equal(*a.rhs, *b.rhs)) return false;
    return true;
}

} // namespace logifit
