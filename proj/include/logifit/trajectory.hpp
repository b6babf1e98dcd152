#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"

namespace logifit {

/// Piecewise-constant sample path: value row i holds on [times[i], times[i+1]),
/// the last row holds up to the horizon.
struct Trajectory {
    std::vector<std::string> names;
    std::vector<double> times;
    std::vector<double> values; // row-major, width = names.size()
    double horizon = 0.0;

    std::size_t width() const { return names.size(); }
    std::size_t rows() const { return times.size(); }

    double value(std::size_t row, std::size_t col) const {
        return values[row * names.size() + col];
    }

    /// Index of the segment active at time t (last segment for t >= last time).
    std::size_t segment_at(double t) const {
        std::size_t lo = 0, hi = times.size();
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (times[mid] <= t) lo = mid; else hi = mid;
        }
        return lo;
    }

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return i;
        throw ValidationError("trajectory has no variable '" + name + "'");
    }
};

} // namespace logifit
