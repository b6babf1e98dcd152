#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "errors.hpp"

namespace logifit {

enum class Scale { Log, Linear };

/// One free parameter axis with its exploration bounds.
struct Axis {
    std::string name;
    double lower = 0.0;
    double upper = 0.0;
    Scale scale = Scale::Log;
};

/// Gamma prior with the (shape, mean) parameterization; rate = shape / mean.
struct GammaPrior {
    double shape = 1.0;
    double mean = 1.0;
};

/// Search box: free axes mapped to [-1,1]^d plus parameters pinned to fixed
/// values.
struct ParameterSpace {
    std::vector<Axis> axes;
    std::map<std::string, double> fixed;

    std::size_t dim() const { return axes.size(); }

    void validate() const {
        for (const Axis& a : axes) {
            if (!(a.lower < a.upper))
                throw ValidationError("parameter '" + a.name + "': bounds [" +
                                      std::to_string(a.lower) + ", " + std::to_string(a.upper) +
                                      "] are not increasing");
            if (a.scale == Scale::Log && a.lower <= 0.0)
                throw ValidationError("parameter '" + a.name +
                                      "': log scale requires strictly positive bounds");
            if (fixed.count(a.name))
                throw ValidationError("parameter '" + a.name + "' is both free and fixed");
        }
    }

    /// Maps a raw point (one value per axis, inside the bounds) to [-1,1]^d.
    std::vector<double> normalize(const std::vector<double>& theta) const {
        if (theta.size() != axes.size())
            throw ValidationError("normalize: expected " + std::to_string(axes.size()) +
                                  " values, got " + std::to_string(theta.size()));
        std::vector<double> u(theta.size());
        for (std::size_t i = 0; i < axes.size(); ++i) {
            const Axis& a = axes[i];
            if (theta[i] < a.lower || theta[i] > a.upper)
                throw ValidationError("parameter '" + a.name + "': value " +
                                      std::to_string(theta[i]) + " outside [" +
                                      std::to_string(a.lower) + ", " + std::to_string(a.upper) + "]");
            if (a.scale == Scale::Log)
                u[i] = 2.0 * (std::log(theta[i]) - std::log(a.lower)) /
                           (std::log(a.upper) - std::log(a.lower)) - 1.0;
            else
                u[i] = 2.0 * (theta[i] - a.lower) / (a.upper - a.lower) - 1.0;
        }
        return u;
    }

    /// Inverse of normalize; clamps roundoff so results stay inside the box.
    std::vector<double> denormalize(const std::vector<double>& u) const {
        if (u.size() != axes.size())
            throw ValidationError("denormalize: expected " + std::to_string(axes.size()) +
                                  " values, got " + std::to_string(u.size()));
        std::vector<double> theta(u.size());
        for (std::size_t i = 0; i < axes.size(); ++i) {
            const Axis& a = axes[i];
            double t = (u[i] + 1.0) / 2.0;
            double v;
            if (a.scale == Scale::Log)
                v = std::exp(std::log(a.lower) + t * (std::log(a.upper) - std::log(a.lower)));
            else
                v = a.lower + t * (a.upper - a.lower);
            theta[i] = std::min(std::max(v, a.lower), a.upper);
        }
        return theta;
    }

    /// Scale factor d theta / d u of denormalize at the raw point theta.
    double jacobian(std::size_t axis, double theta_axis) const {
        const Axis& a = axes[axis];
        if (a.scale == Scale::Log)
            return theta_axis * (std::log(a.upper) - std::log(a.lower)) / 2.0;
        return (a.upper - a.lower) / 2.0;
    }

    /// Full parameter binding (free + fixed) for the simulator.
    std::map<std::string, double> bind(const std::vector<double>& theta) const {
        std::map<std::string, double> env = fixed;
        for (std::size_t i = 0; i < axes.size(); ++i) env[axes[i].name] = theta[i];
        return env;
    }
};

} // namespace logifit
