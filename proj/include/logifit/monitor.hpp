#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "errors.hpp"
#include "expr.hpp"
#include "formula.hpp"
#include "signal.hpp"
#include "trajectory.hpp"

namespace logifit {

namespace detail {

inline bool compare(double l, Cmp c, double r) {
    switch (c) {
        case Cmp::Lt: return l < r;
        case Cmp::Le: return l <= r;
        case Cmp::Gt: return l > r;
        case Cmp::Ge: return l >= r;
        case Cmp::Eq: return std::abs(l - r) <= 1e-9;
    }
    return false;
}

/// Environment bound to one trajectory row via slot indices.
struct TraceEnv {
    std::map<std::string, std::size_t> slots;
    std::vector<double> row;

    TraceEnv(const Trajectory& traj, const std::map<std::string, double>& constants) {
        std::size_t idx = 0;
        for (const auto& n : traj.names) slots[n] = idx++;
        row.resize(traj.names.size() + constants.size());
        for (const auto& [n, v] : constants) {
            slots[n] = idx;
            row[idx++] = v;
        }
    }

    void load(const Trajectory& traj, std::size_t r) {
        for (std::size_t c = 0; c < traj.names.size(); ++c) row[c] = traj.value(r, c);
    }
};

inline BooleanSignal atomic_signal(const Formula& f, const Trajectory& traj, TraceEnv& env) {
    CompiledExpr lhs(f.lhs_expr, env.slots), rhs(f.rhs_expr, env.slots);
    BooleanSignal out;
    out.horizon = traj.horizon;
    double open = -1.0;
    bool in_run = false;
    for (std::size_t r = 0; r < traj.rows(); ++r) {
        env.load(traj, r);
        bool truth = compare(lhs.eval(env.row), f.cmp, rhs.eval(env.row));
        if (truth && !in_run) {
            open = traj.times[r];
            in_run = true;
        } else if (!truth && in_run) {
            if (open < traj.times[r]) out.intervals.push_back({open, traj.times[r]});
            in_run = false;
        }
    }
    if (in_run && open < traj.horizon) out.intervals.push_back({open, traj.horizon});
    return out;
}

inline BooleanSignal eval_signal(const Formula& f, const Trajectory& traj, TraceEnv& env) {
    switch (f.kind) {
        case Formula::Kind::True:
            return sig_true(traj.horizon);
        case Formula::Kind::Atomic:
            return atomic_signal(f, traj, env);
        case Formula::Kind::Not:
            return sig_not(eval_signal(*f.lhs, traj, env));
        case Formula::Kind::And:
            return sig_and(eval_signal(*f.lhs, traj, env), eval_signal(*f.rhs, traj, env));
        case Formula::Kind::Or:
            return sig_or(eval_signal(*f.lhs, traj, env), eval_signal(*f.rhs, traj, env));
        case Formula::Kind::Until:
            return sig_until(eval_signal(*f.lhs, traj, env), eval_signal(*f.rhs, traj, env),
                             f.t_lo, f.t_hi);
        case Formula::Kind::Eventually:
            return sig_until(sig_true(traj.horizon), eval_signal(*f.lhs, traj, env), f.t_lo,
                             f.t_hi);
        case Formula::Kind::Always:
            return sig_not(sig_until(sig_true(traj.horizon),
                                     sig_not(eval_signal(*f.lhs, traj, env)), f.t_lo, f.t_hi));
    }
    throw ValidationError("corrupt formula node");
}

} // namespace detail

/// Satisfaction signal of a formula over a piecewise-constant trajectory.
inline BooleanSignal formula_signal(const Formula& f, const Trajectory& traj,
                                    const std::map<std::string, double>& constants = {}) {
    detail::TraceEnv env(traj, constants);
    return detail::eval_signal(f, traj, env);
}

/// Truth of the formula at time 0. The trajectory must extend far enough for
/// the nested temporal windows to be decidable.
inline bool monitor(const Formula& f, const Trajectory& traj,
                    const std::map<std::string, double>& constants = {}) {
    double depth = temporal_depth(f);
    if (traj.horizon < depth)
        throw ValidationError("trajectory horizon " + std::to_string(traj.horizon) +
                              " is shorter than the formula look-ahead " + std::to_string(depth));
    return formula_signal(f, traj, constants).contains(0.0);
}

} // namespace logifit
