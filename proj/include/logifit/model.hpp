#pragma once

#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "expr.hpp"

namespace logifit {

/// One reaction channel: net stoichiometry change plus a propensity expression
/// over species, constants and parameters.
struct Reaction {
    std::string name;
    std::vector<int> change; // per species
    ExprPtr rate;
};

struct ReactionNetwork {
    std::string name;
    std::vector<std::string> species;
    std::vector<double> initial;
    std::map<std::string, double> constants;
    std::vector<std::string> params;
    std::vector<Reaction> reactions;
};

struct SdeSystem {
    std::string name;
    std::vector<std::string> vars;
    std::vector<double> initial;
    std::map<std::string, double> constants;
    std::vector<std::string> params;
    std::vector<ExprPtr> drift;                    // per var
    std::vector<std::string> channels;             // Wiener channel names
    std::vector<std::vector<ExprPtr>> diffusion;   // vars x channels, null = 0
};

/// Two-state (0/1) discrete mode with hazard expressions for each direction.
struct Mode {
    std::string name;
    int initial = 0;
    ExprPtr rate_on_off;  // active while the mode is 1
    ExprPtr rate_off_on;  // active while the mode is 0
};

struct HybridSystem {
    std::string name;
    SdeSystem continuous;
    std::vector<Mode> modes;
};

using Model = std::variant<ReactionNetwork, SdeSystem, HybridSystem>;

inline const std::string& model_name(const Model& m) {
    return std::visit([](const auto& x) -> const std::string& { return x.name; }, m);
}

inline const std::vector<std::string>& model_params(const Model& m) {
    if (const auto* rn = std::get_if<ReactionNetwork>(&m)) return rn->params;
    if (const auto* sde = std::get_if<SdeSystem>(&m)) return sde->params;
    return std::get<HybridSystem>(m).continuous.params;
}

/// State variable names as they appear in trajectories (hybrid systems append
/// their mode indicators).
inline std::vector<std::string> model_state_names(const Model& m) {
    if (const auto* rn = std::get_if<ReactionNetwork>(&m)) return rn->species;
    if (const auto* sde = std::get_if<SdeSystem>(&m)) return sde->vars;
    const auto& h = std::get<HybridSystem>(m);
    std::vector<std::string> names = h.continuous.vars;
    for (const Mode& mode : h.modes) names.push_back(mode.name);
    return names;
}

/// Checks that every model parameter is bound and nothing unknown is supplied.
inline void check_binding(const Model& m, const std::map<std::string, double>& theta) {
    const auto& params = model_params(m);
    std::set<std::string> known(params.begin(), params.end());
    for (const auto& [name, _] : theta)
        if (!known.count(name))
            throw ValidationError("model '" + model_name(m) + "' has no parameter '" + name + "'");
    for (const auto& p : params)
        if (!theta.count(p))
            throw ValidationError("parameter '" + p + "' of model '" + model_name(m) +
                                  "' is not bound");
}

struct SimConfig {
    double horizon = 0.0;
    double step = 0.1;                  // SDE / hybrid integration step
    std::uint64_t max_events = 10'000'000; // CTMC event guard
};

} // namespace logifit
