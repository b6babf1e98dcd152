#pragma once

#include <algorithm>
#include <vector>

#include "errors.hpp"

namespace logifit {

/// Set of times where a formula holds, kept as sorted, disjoint, non-adjacent
/// half-open intervals [lo, hi) inside [0, horizon).
struct BooleanSignal {
    struct Interval {
        double lo, hi;
    };

    std::vector<Interval> intervals;
    double horizon = 0.0;

    bool contains(double t) const {
        for (const Interval& iv : intervals) {
            if (t < iv.lo) return false;
            if (t < iv.hi) return true;
        }
        return false;
    }

    bool empty() const { return intervals.empty(); }
};

namespace detail {

/// Sorts closed [lo, hi] contributions, merges touching ones, drops degenerate
/// points, and emits the canonical half-open form.
inline BooleanSignal normalize_closed(std::vector<BooleanSignal::Interval> parts, double horizon) {
    BooleanSignal out;
    out.horizon = horizon;
    std::sort(parts.begin(), parts.end(),
              [](const auto& a, const auto& b) { return a.lo < b.lo; });
    for (const auto& p : parts) {
        if (p.hi < p.lo) continue;
        if (!out.intervals.empty() && p.lo <= out.intervals.back().hi)
            out.intervals.back().hi = std::max(out.intervals.back().hi, p.hi);
        else
            out.intervals.push_back(p);
    }
    std::erase_if(out.intervals, [](const auto& iv) { return !(iv.lo < iv.hi); });
    return out;
}

} // namespace detail

inline BooleanSignal sig_not(const BooleanSignal& s) {
    BooleanSignal out;
    out.horizon = s.horizon;
    double cursor = 0.0;
    for (const auto& iv : s.intervals) {
        if (cursor < iv.lo) out.intervals.push_back({cursor, iv.lo});
        cursor = iv.hi;
    }
    if (cursor < s.horizon) out.intervals.push_back({cursor, s.horizon});
    return out;
}

namespace detail {

inline void check_horizons(const BooleanSignal& a, const BooleanSignal& b) {
    if (a.horizon != b.horizon)
        throw ValidationError("signals cover different horizons: " + std::to_string(a.horizon) +
                              " vs " + std::to_string(b.horizon));
}

} // namespace detail

inline BooleanSignal sig_and(const BooleanSignal& a, const BooleanSignal& b) {
    detail::check_horizons(a, b);
    BooleanSignal out;
    out.horizon = a.horizon;
    std::size_t i = 0, j = 0;
    while (i < a.intervals.size() && j < b.intervals.size()) {
        double lo = std::max(a.intervals[i].lo, b.intervals[j].lo);
        double hi = std::min(a.intervals[i].hi, b.intervals[j].hi);
        if (lo < hi) out.intervals.push_back({lo, hi});
        if (a.intervals[i].hi < b.intervals[j].hi) ++i; else ++j;
    }
    return out;
}

inline BooleanSignal sig_or(const BooleanSignal& a, const BooleanSignal& b) {
    detail::check_horizons(a, b);
    std::vector<BooleanSignal::Interval> parts = a.intervals;
    parts.insert(parts.end(), b.intervals.begin(), b.intervals.end());
    return detail::normalize_closed(std::move(parts), a.horizon);
}

/// Timed until over [t_lo, t_hi]. For each maximal interval I of s1, witnesses
/// live in closure(I) intersected with s2; each witness block K shifts back to
/// [inf K - t_hi, sup K - t_lo], clipped to I.
inline BooleanSignal sig_until(const BooleanSignal& s1, const BooleanSignal& s2, double t_lo,
                               double t_hi) {
    detail::check_horizons(s1, s2);
    std::vector<BooleanSignal::Interval> parts;
    std::size_t j0 = 0;
    for (const auto& I : s1.intervals) {
        // Maximal blocks of [I.lo, I.hi] (closed) intersected with s2; an s2
        // interval ending exactly at I.lo contributes nothing ([a,b) has no b).
        while (j0 < s2.intervals.size() && s2.intervals[j0].hi <= I.lo) ++j0;
        for (std::size_t j = j0; j < s2.intervals.size() && s2.intervals[j].lo <= I.hi; ++j) {
            double k_lo = std::max(I.lo, s2.intervals[j].lo);
            double k_hi = std::min(I.hi, s2.intervals[j].hi);
            if (k_hi < k_lo) continue; // degenerate touch like [a,b) meeting b
            double lo = std::max(k_lo - t_hi, I.lo);
            double hi = std::min(k_hi - t_lo, I.hi);
            if (lo <= hi) parts.push_back({lo, hi});
        }
    }
    return detail::normalize_closed(std::move(parts), s1.horizon);
}

inline BooleanSignal sig_true(double horizon) {
    BooleanSignal out;
    out.horizon = horizon;
    if (horizon > 0.0) out.intervals.push_back({0.0, horizon});
    return out;
}

inline BooleanSignal sig_false(double horizon) {
    BooleanSignal out;
    out.horizon = horizon;
    return out;
}

} // namespace logifit
