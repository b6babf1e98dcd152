#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "errors.hpp"
#include "expr.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "trajectory.hpp"

namespace logifit {

namespace detail {

inline void check_params(const std::vector<std::string>& params, const std::string& model,
                         const std::map<std::string, double>& theta) {
    for (const auto& [name, _] : theta) {
        bool known = false;
        for (const auto& p : params) known = known || p == name;
        if (!known)
            throw ValidationError("model '" + model + "' has no parameter '" + name + "'");
    }
    for (const auto& p : params)
        if (!theta.count(p))
            throw ValidationError("parameter '" + p + "' of model '" + model + "' is not bound");
}

/// Slot layout shared by the simulators: state variables first (so they can be
/// updated in place), then modes, then constants and parameters.
struct SlotEnv {
    std::map<std::string, std::size_t> slots;
    std::vector<double> values;

    std::size_t add(const std::string& name, double v) {
        std::size_t idx = values.size();
        if (!slots.emplace(name, idx).second)
            throw ValidationError("duplicate name '" + name + "' in evaluation environment");
        values.push_back(v);
        return idx;
    }
};

inline SlotEnv
make_env(const std::vector<std::string>& state, const std::vector<double>& init,
         const std::map<std::string, double>& constants,
         const std::vector<std::string>& params, const std::map<std::string, double>& theta) {
    SlotEnv env;
    for (std::size_t i = 0; i < state.size(); ++i) env.add(state[i], init[i]);
    for (const auto& [n, v] : constants) env.add(n, v);
    for (const auto& n : params) env.add(n, theta.at(n));
    return env;
}

} // namespace detail

/// Exact stochastic simulation of a reaction network; records the state after
/// every event.
inline Trajectory ssa_simulate(const ReactionNetwork& net,
                               const std::map<std::string, double>& theta,
                               const SimConfig& cfg, RngStream& rng) {
    detail::check_params(net.params, net.name, theta);
    detail::SlotEnv env = detail::make_env(net.species, net.initial, net.constants,
                                           net.params, theta);
    const std::size_t n = net.species.size();
    std::vector<CompiledExpr> rates;
    rates.reserve(net.reactions.size());
    for (const Reaction& r : net.reactions) rates.emplace_back(r.rate, env.slots);

    Trajectory traj;
    traj.names = net.species;
    traj.horizon = cfg.horizon;
    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.values.insert(traj.values.end(), env.values.begin(), env.values.begin() + n);
    };
    record(0.0);

    std::vector<double> a(rates.size());
    double t = 0.0;
    std::uint64_t events = 0;
    for (;;) {
        double a0 = 0.0;
        for (std::size_t j = 0; j < rates.size(); ++j) {
            a[j] = rates[j].eval(env.values);
            if (!(a[j] >= 0.0))
                throw SimulationError("reaction '" + net.reactions[j].name +
                                      "' has a negative or non-finite propensity at t=" +
                                      std::to_string(t));
            a0 += a[j];
        }
        if (a0 <= 0.0) break;
        t += rng.exponential(a0);
        if (t > cfg.horizon) break;
        if (++events > cfg.max_events)
            throw SimulationError("model '" + net.name + "' exceeded " +
                                  std::to_string(cfg.max_events) + " events before t=" +
                                  std::to_string(cfg.horizon));
        double u = rng.uniform() * a0;
        std::size_t j = 0;
        for (; j + 1 < a.size(); ++j) {
            if (u < a[j]) break;
            u -= a[j];
        }
        const Reaction& r = net.reactions[j];
        for (std::size_t s = 0; s < n; ++s) {
            env.values[s] += r.change[s];
            if (env.values[s] < 0.0)
                throw SimulationError("reaction '" + r.name + "' drove species '" +
                                      net.species[s] + "' negative at t=" + std::to_string(t));
        }
        record(t);
    }
    return traj;
}

namespace detail {

struct SdeStepper {
    const SdeSystem* sde;
    std::vector<CompiledExpr> drift;
    std::vector<std::vector<std::pair<std::size_t, CompiledExpr>>> diffusion; // per channel

    SdeStepper(const SdeSystem& s, const std::map<std::string, std::size_t>& slots) : sde(&s) {
        for (const ExprPtr& e : s.drift) drift.emplace_back(e, slots);
        diffusion.resize(s.channels.size());
        for (std::size_t ch = 0; ch < s.channels.size(); ++ch)
            for (std::size_t v = 0; v < s.vars.size(); ++v)
                if (s.diffusion[v][ch])
                    diffusion[ch].emplace_back(v, CompiledExpr(s.diffusion[v][ch], slots));
    }

    /// One forward step: v += F dt + G dW with dW ~ N(0, h I).
    void step(std::vector<double>& env, double h, double sqrt_h, RngStream& rng,
              std::vector<double>& scratch) const {
        const std::size_t n = sde->vars.size();
        scratch.assign(n, 0.0);
        for (std::size_t v = 0; v < n; ++v) scratch[v] = drift[v].eval(env) * h;
        for (std::size_t ch = 0; ch < diffusion.size(); ++ch) {
            if (diffusion[ch].empty()) continue;
            double dw = rng.normal() * sqrt_h;
            for (const auto& [v, g] : diffusion[ch]) scratch[v] += g.eval(env) * dw;
        }
        for (std::size_t v = 0; v < n; ++v) env[v] += scratch[v];
    }
};

inline void check_finite(const std::vector<double>& env, std::size_t n, const std::string& name,
                         double t) {
    for (std::size_t v = 0; v < n; ++v)
        if (!std::isfinite(env[v]))
            throw SimulationError("model '" + name + "' produced a non-finite state at t=" +
                                  std::to_string(t));
}

inline std::vector<double> time_grid(const SimConfig& cfg) {
    if (cfg.step <= 0.0) throw SimulationError("integration step must be positive");
    std::size_t steps = static_cast<std::size_t>(std::floor(cfg.horizon / cfg.step + 1e-9));
    if (steps < 1)
        throw SimulationError("integration step " + std::to_string(cfg.step) +
                              " exceeds the horizon " + std::to_string(cfg.horizon));
    std::vector<double> grid(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) grid[i] = static_cast<double>(i) * cfg.step;
    return grid;
}

} // namespace detail

/// Euler-Maruyama integration on the grid 0, h, 2h, ...
inline Trajectory em_simulate(const SdeSystem& sde, const std::map<std::string, double>& theta,
                              const SimConfig& cfg, RngStream& rng) {
    detail::check_params(sde.params, sde.name, theta);
    detail::SlotEnv env = detail::make_env(sde.vars, sde.initial, sde.constants, sde.params, theta);
    detail::SdeStepper stepper(sde, env.slots);
    std::vector<double> grid = detail::time_grid(cfg);
    const std::size_t n = sde.vars.size();

    Trajectory traj;
    traj.names = sde.vars;
    traj.horizon = cfg.horizon;
    traj.times.reserve(grid.size());
    traj.values.reserve(grid.size() * n);
    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.values.insert(traj.values.end(), env.values.begin(), env.values.begin() + n);
    };
    record(0.0);
    const double h = cfg.step, sqrt_h = std::sqrt(h);
    std::vector<double> scratch;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        stepper.step(env.values, h, sqrt_h, rng, scratch);
        detail::check_finite(env.values, n, sde.name, grid[i]);
        record(grid[i]);
    }
    return traj;
}

/// Stochastic hybrid simulation: Euler-Maruyama for the continuous part with
/// per-mode cumulative hazards. A mode whose accumulated hazard crosses its
/// Exp(1) threshold flips at the end of the step.
inline Trajectory shs_simulate(const HybridSystem& sys, const std::map<std::string, double>& theta,
                               const SimConfig& cfg, RngStream& rng) {
    detail::check_params(sys.continuous.params, sys.name, theta);
    const SdeSystem& sde = sys.continuous;
    const std::size_t n = sde.vars.size();
    const std::size_t m = sys.modes.size();

    detail::SlotEnv env;
    for (std::size_t i = 0; i < n; ++i) env.add(sde.vars[i], sde.initial[i]);
    for (const Mode& mode : sys.modes) env.add(mode.name, mode.initial);
    for (const auto& [name, v] : sde.constants) env.add(name, v);
    for (const auto& p : sde.params) env.add(p, theta.at(p));

    detail::SdeStepper stepper(sde, env.slots);
    struct ModeState {
        CompiledExpr on_off, off_on;
        double hazard = 0.0;
        double threshold = 0.0;
    };
    std::vector<ModeState> modes(m);
    for (std::size_t i = 0; i < m; ++i) {
        modes[i].on_off = CompiledExpr(sys.modes[i].rate_on_off, env.slots);
        modes[i].off_on = CompiledExpr(sys.modes[i].rate_off_on, env.slots);
        modes[i].threshold = rng.exponential(1.0);
    }

    std::vector<double> grid = detail::time_grid(cfg);
    Trajectory traj;
    traj.names = sde.vars;
    for (const Mode& mode : sys.modes) traj.names.push_back(mode.name);
    traj.horizon = cfg.horizon;
    traj.times.reserve(grid.size());
    traj.values.reserve(grid.size() * (n + m));
    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.values.insert(traj.values.end(), env.values.begin(), env.values.begin() + n + m);
    };
    record(0.0);

    const double h = cfg.step, sqrt_h = std::sqrt(h);
    std::vector<double> scratch, rate(m);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        // Rates use the state at the start of the step, like the drift.
        for (std::size_t k = 0; k < m; ++k) {
            bool on = env.values[n + k] != 0.0;
            rate[k] = (on ? modes[k].on_off : modes[k].off_on).eval(env.values);
            if (!(rate[k] >= 0.0))
                throw SimulationError("mode '" + sys.modes[k].name +
                                      "' has a negative or non-finite switching rate at t=" +
                                      std::to_string(grid[i - 1]));
        }
        stepper.step(env.values, h, sqrt_h, rng, scratch);
        for (std::size_t k = 0; k < m; ++k) {
            modes[k].hazard += rate[k] * h;
            if (modes[k].hazard >= modes[k].threshold) {
                env.values[n + k] = env.values[n + k] != 0.0 ? 0.0 : 1.0;
                modes[k].hazard = 0.0;
                modes[k].threshold = rng.exponential(1.0);
            }
        }
        detail::check_finite(env.values, n, sys.name, grid[i]);
        record(grid[i]);
    }
    return traj;
}

/// Dispatch on the model class.
inline Trajectory simulate(const Model& model, const std::map<std::string, double>& theta,
                           const SimConfig& cfg, RngStream& rng) {
    if (const auto* rn = std::get_if<ReactionNetwork>(&model))
        return ssa_simulate(*rn, theta, cfg, rng);
    if (const auto* sde = std::get_if<SdeSystem>(&model))
        return em_simulate(*sde, theta, cfg, rng);
    return shs_simulate(std::get<HybridSystem>(model), theta, cfg, rng);
}

} // namespace logifit
