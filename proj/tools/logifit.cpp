// Command-line front end: simulation, statistical checking, synthetic
// observations, parameter identification and parameter design.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "logifit.hpp"

using nlohmann::json;
using namespace logifit;

namespace {

struct Common {
    std::uint64_t seed = 0;
    bool seed_given = false;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    bool json_errors = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "RNG seed (generated and printed when omitted)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--workers", c.workers, "trajectory worker threads");
    cmd->add_flag("--json-errors", c.json_errors, "report errors as JSON on stderr");
}

void resolve_seed(Common& c, const CLI::App* cmd) {
    c.seed_given = cmd->count("--seed") > 0;
    if (!c.seed_given) {
        std::random_device rd;
        c.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        std::cerr << "seed: " << c.seed << "\n";
    }
}

std::map<std::string, double> parse_assignments(const std::vector<std::string>& sets) {
    std::map<std::string, double> theta;
    for (const auto& s : sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ValidationError("bad --set '" + s + "' (want name=value)");
        std::string name = s.substr(0, eq);
        std::string val = s.substr(eq + 1);
        char* end = nullptr;
        double v = std::strtod(val.c_str(), &end);
        if (end == val.c_str() || *end != '\0')
            throw ValidationError("bad --set value for '" + name + "': '" + val + "'");
        if (!theta.emplace(name, v).second)
            throw ValidationError("parameter '" + name + "' assigned twice");
    }
    return theta;
}

/// Parse a file's content, prefixing parse errors with the path.
template <class Fn>
auto parse_file(const std::string& path, Fn&& fn) {
    std::string src = read_file(path);
    try {
        return fn(src);
    } catch (const ParseError& e) {
        throw ParseError(e.line, e.column, path + ": " + e.what());
    }
}

struct Manifest {
    std::string subcommand;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    json config = json::object();
    std::vector<std::pair<std::string, std::string>> inputs;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    void input(const std::string& path) { inputs.emplace_back(path, digest_file(path)); }

    json finish() const {
        json m;
        m["subcommand"] = subcommand;
        m["version"] = version;
        m["seed"] = seed;
        m["workers"] = workers;
        m["config"] = config;
        json ins = json::object();
        for (const auto& [path, dg] : inputs) ins[path] = dg;
        m["inputs"] = ins;
        m["wall_clock_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        return m;
    }
};

void emit_json(const json& doc, const std::string& out_path) {
    std::string text = doc.dump(2);
    text += "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw ValidationError("cannot write file: " + out_path);
        out << text;
    }
}

void write_sidecar_manifest(const std::string& out_path, const Manifest& mf) {
    emit_json(mf.finish(), out_path + ".manifest.json");
}

std::string suffixed_path(const std::string& path, std::size_t i) {
    auto slash = path.find_last_of('/');
    auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return path + "_" + std::to_string(i);
    return path.substr(0, dot) + "_" + std::to_string(i) + path.substr(dot);
}

double default_horizon(const std::vector<NamedFormula>& props) {
    double depth = 0.0;
    for (const auto& p : props) depth = std::max(depth, temporal_depth(*p.formula));
    return depth;
}

std::vector<FormulaPtr> formulas_of(const std::vector<NamedFormula>& props) {
    std::vector<FormulaPtr> fs;
    for (const auto& p : props) fs.push_back(p.formula);
    return fs;
}

json laplace_std_json(const std::vector<Axis>& axes, const std::vector<double>& stds) {
    json out = json::object();
    for (std::size_t i = 0; i < axes.size(); ++i) {
        if (std::isfinite(stds[i]))
            out[axes[i].name] = stds[i];
        else
            out[axes[i].name] = nullptr;  // unbounded (clipped curvature direction)
    }
    return out;
}

void write_trace_csv(const std::string& path, const ParameterSpace& space,
                     const SearchResult& res) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << "iter";
    for (const auto& ax : space.axes) out << "," << ax.name;
    out << ",value,std\n";
    for (const auto& e : res.trace) {
        out << e.iteration;
        for (double v : e.theta) out << "," << detail::format_double(v);
        out << "," << detail::format_double(e.value) << "," << detail::format_double(e.std)
            << "\n";
    }
}

json search_result_json(const ParameterSpace& space, const SearchResult& res,
                        const std::string& trace_file) {
    json doc;
    json best = json::object();
    for (std::size_t i = 0; i < space.axes.size(); ++i)
        best[space.axes[i].name] = res.best_theta[i];
    doc["best"] = best;
    doc["objective"] = {{"value", res.best.value}, {"std", res.best.std}};
    doc["laplace_std"] = laplace_std_json(space.axes, res.laplace.std);
    doc["evaluations"] = res.evaluations;
    doc["init_evaluations"] = res.init_evaluations;
    if (trace_file.empty())
        doc["trace_file"] = nullptr;
    else
        doc["trace_file"] = trace_file;
    if (!res.warnings.empty()) doc["warnings"] = res.warnings;
    return doc;
}

NoiseSpec parse_noise(const std::string& text) {
    NoiseSpec spec;
    if (text == "bootstrap") {
        spec.kind = NoiseKind::Bootstrap;
    } else if (text == "posterior") {
        spec.kind = NoiseKind::Posterior;
    } else if (text.rfind("fixed:", 0) == 0) {
        spec.kind = NoiseKind::Fixed;
        std::string val = text.substr(6);
        char* end = nullptr;
        spec.fixed_std = std::strtod(val.c_str(), &end);
        if (end == val.c_str() || *end != '\0' || spec.fixed_std < 0.0)
            throw ValidationError("bad --noise fixed value '" + val + "'");
    } else {
        throw ValidationError("--noise must be bootstrap, posterior or fixed:<std>");
    }
    return spec;
}

void check_observation_names(const std::vector<NamedFormula>& props, const DesignMatrix& data) {
    std::vector<std::string> want;
    for (const auto& p : props) want.push_back(p.name);
    if (want == data.names) return;
    std::string msg = "observation columns do not match the property names; observations have [";
    for (std::size_t i = 0; i < data.names.size(); ++i) msg += (i ? ", " : "") + data.names[i];
    msg += "] but the properties are [";
    for (std::size_t i = 0; i < want.size(); ++i) msg += (i ? ", " : "") + want[i];
    msg += "]";
    throw ValidationError(msg);
}

// --- subcommand payloads -------------------------------------------------

struct SimulateArgs {
    Common common;
    std::string model_file, out;
    std::vector<std::string> sets;
    double horizon = 0.0;
    double step = 0.1;
    std::uint64_t max_events = 10'000'000;
    std::size_t runs = 1;
};

int run_simulate(SimulateArgs& a) {
    Manifest mf;
    mf.subcommand = "simulate";
    mf.seed = a.common.seed;
    mf.workers = a.common.workers;
    mf.input(a.model_file);
    Model model = parse_file(a.model_file, [](const std::string& s) { return parse_model(s); });
    auto theta = parse_assignments(a.sets);
    check_binding(model, theta);
    if (!(a.horizon > 0.0)) throw ValidationError("simulation horizon -T must be positive");
    if (a.runs == 0) throw ValidationError("--runs must be positive");
    SimConfig cfg{a.horizon, a.step, a.max_events};
    mf.config = {{"set", theta},         {"horizon", a.horizon}, {"step", a.step},
                 {"max_events", a.max_events}, {"runs", a.runs},  {"out", a.out}};
    for (std::size_t i = 0; i < a.runs; ++i) {
        RngStream rng(a.common.seed, i);
        Trajectory traj = simulate(model, theta, cfg, rng);
        write_trajectory_csv(a.runs == 1 ? a.out : suffixed_path(a.out, i), traj);
    }
    write_sidecar_manifest(a.out, mf);
    return 0;
}

struct CheckArgs {
    Common common;
    std::string model_file, props_file, out;
    std::vector<std::string> sets;
    double horizon = -1.0;
    double step = 0.1;
    std::uint64_t max_events = 10'000'000;
    std::size_t runs = 0;
};

int run_check(CheckArgs& a, bool observe, const std::string& obs_out) {
    Manifest mf;
    mf.subcommand = observe ? "observe" : "check";
    mf.seed = a.common.seed;
    mf.workers = a.common.workers;
    mf.input(a.model_file);
    mf.input(a.props_file);
    Model model = parse_file(a.model_file, [](const std::string& s) { return parse_model(s); });
    auto props = parse_file(a.props_file,
                            [&](const std::string& s) { return parse_properties(s, model); });
    auto theta = parse_assignments(a.sets);
    check_binding(model, theta);
    if (a.runs == 0) throw ValidationError("--runs must be positive");
    double horizon = a.horizon > 0.0 ? a.horizon : default_horizon(props);
    SimConfig cfg{horizon, a.step, a.max_events};
    mf.config = {{"set", theta}, {"horizon", horizon},           {"step", a.step},
                 {"max_events", a.max_events}, {"runs", a.runs}, {"out", observe ? obs_out : a.out}};

    std::vector<std::uint32_t> outcomes;
    SmcResult res = smc_sample(model, theta, formulas_of(props), a.runs, cfg, a.common.seed,
                               nullptr, a.common.workers, observe ? &outcomes : nullptr);
    if (observe) {
        DesignMatrix data;
        for (const auto& p : props) data.names.push_back(p.name);
        data.rows = std::move(outcomes);
        write_observations_csv(obs_out, data);
        write_sidecar_manifest(obs_out, mf);
        return 0;
    }

    const std::size_t d = props.size();
    std::vector<double> q = predictive(res.posterior);
    json joint = json::object(), counts = json::object(), pred = json::object();
    std::vector<double> marginal(d, 0.0);
    for (std::size_t j = 0; j < res.counts.size(); ++j) {
        std::string bits = outcome_bits(static_cast<std::uint32_t>(j), d);
        counts[bits] = res.counts[j];
        joint[bits] = static_cast<double>(res.counts[j]) / static_cast<double>(res.n_runs);
        pred[bits] = q[j];
        for (std::size_t i = 0; i < d; ++i)
            if (bits[i] == '1') marginal[i] += static_cast<double>(res.counts[j]);
    }
    json marg = json::object();
    for (std::size_t i = 0; i < d; ++i)
        marg[props[i].name] = marginal[i] / static_cast<double>(res.n_runs);
    json doc;
    doc["n_runs"] = res.n_runs;
    doc["marginals"] = marg;
    doc["counts"] = counts;
    doc["joint"] = joint;
    doc["predictive"] = pred;
    doc["manifest"] = mf.finish();
    emit_json(doc, a.out);
    return 0;
}

struct SearchArgs {
    Common common;
    std::string model_file, props_file, data_file, space_file, priors_file;
    std::string out, trace_file;
    std::string noise = "bootstrap";
    double horizon = -1.0;
    double step = 0.1;
    std::uint64_t max_events = 10'000'000;
    std::size_t runs = 1000;
    std::size_t init = 48;
    std::size_t grid = 500;
    double beta = 2.0;
    std::size_t max_evals = 200;
};

UcbConfig make_ucb(const SearchArgs& a) {
    UcbConfig cfg;
    cfg.init = a.init;
    cfg.grid = a.grid;
    cfg.beta0 = a.beta;
    cfg.smc_runs = a.runs;
    cfg.seed = a.common.seed;
    cfg.max_evals = a.max_evals;
    return cfg;
}

json search_config_json(const SearchArgs& a, double horizon, const char* noise) {
    return {{"runs", a.runs},       {"init", a.init},   {"grid", a.grid},
            {"beta", a.beta},       {"noise", noise},   {"horizon", horizon},
            {"step", a.step},       {"max_events", a.max_events},
            {"max_evals", a.max_evals}};
}

int run_identify(SearchArgs& a, bool map_mode) {
    Manifest mf;
    mf.subcommand = "identify";
    mf.seed = a.common.seed;
    mf.workers = a.common.workers;
    mf.input(a.model_file);
    mf.input(a.props_file);
    mf.input(a.data_file);
    mf.input(a.space_file);
    Model model = parse_file(a.model_file, [](const std::string& s) { return parse_model(s); });
    auto props = parse_file(a.props_file,
                            [&](const std::string& s) { return parse_properties(s, model); });
    DesignMatrix data = read_observations_csv(a.data_file);
    check_observation_names(props, data);
    ParameterSpace space = parse_file(a.space_file,
                                      [](const std::string& s) { return parse_space(s); });
    std::map<std::string, GammaPrior> priors;
    if (map_mode) {
        mf.input(a.priors_file);
        priors = parse_file(a.priors_file,
                            [](const std::string& s) { return parse_priors(s); });
        for (const auto& [name, g] : priors) {
            (void)g;
            bool known = space.fixed.count(name) > 0;
            for (const auto& ax : space.axes) known = known || ax.name == name;
            if (!known)
                throw ValidationError("prior on '" + name + "' which is not in the parameter space");
        }
    }
    double horizon = a.horizon > 0.0 ? a.horizon : default_horizon(props);
    SimConfig sim{horizon, a.step, a.max_events};
    NoiseSpec noise = parse_noise(a.noise);
    mf.config = search_config_json(a, horizon, a.noise.c_str());
    mf.config["map"] = map_mode;

    SearchResult res = identify(model, formulas_of(props), data, space,
                                map_mode ? &priors : nullptr, make_ucb(a), sim, noise,
                                a.common.workers);
    if (!a.trace_file.empty()) write_trace_csv(a.trace_file, space, res);
    json doc = search_result_json(space, res, a.trace_file);
    doc["manifest"] = mf.finish();
    emit_json(doc, a.out);
    return 0;
}

int run_design(SearchArgs& a) {
    Manifest mf;
    mf.subcommand = "design";
    mf.seed = a.common.seed;
    mf.workers = a.common.workers;
    mf.input(a.model_file);
    mf.input(a.props_file);
    mf.input(a.data_file);  // target distribution
    mf.input(a.space_file);
    Model model = parse_file(a.model_file, [](const std::string& s) { return parse_model(s); });
    auto props = parse_file(a.props_file,
                            [&](const std::string& s) { return parse_properties(s, model); });
    std::vector<double> target = read_target_csv(a.data_file, props.size());
    ParameterSpace space = parse_file(a.space_file,
                                      [](const std::string& s) { return parse_space(s); });
    double horizon = a.horizon > 0.0 ? a.horizon : default_horizon(props);
    SimConfig sim{horizon, a.step, a.max_events};
    NoiseSpec noise = parse_noise(a.noise);
    if (noise.kind == NoiseKind::Posterior)
        throw ValidationError("--noise posterior applies to likelihood objectives; "
                              "design uses bootstrap or fixed noise");
    mf.config = search_config_json(a, horizon, a.noise.c_str());

    SearchResult res = design(model, formulas_of(props), target, space, make_ucb(a), sim, noise,
                              a.common.workers);
    if (!a.trace_file.empty()) write_trace_csv(a.trace_file, space, res);
    json doc = search_result_json(space, res, a.trace_file);
    doc["jsd"] = -res.best.value;

    // verification sample at the chosen parameters
    SmcResult ver = smc_sample(model, space.bind(res.best_theta), formulas_of(props), a.runs, sim,
                               derive_seed(a.common.seed, 0xFEEDu), nullptr, a.common.workers);
    std::vector<double> q = predictive(ver.posterior);
    json table = json::object();
    for (std::size_t j = 0; j < q.size(); ++j)
        table[outcome_bits(static_cast<std::uint32_t>(j), props.size())] = {
            {"target", target[j]}, {"achieved", q[j]}};
    doc["table"] = table;
    doc["manifest"] = mf.finish();
    emit_json(doc, a.out);
    return 0;
}

int guarded(const Common& c, const std::function<int()>& fn) {
    const auto report = [&](const char* type, const std::string& msg, int code) {
        if (c.json_errors) {
            json e = {{"error", {{"type", type}, {"message", msg}}}};
            std::cerr << e.dump() << "\n";
        } else {
            std::cerr << "error: " << msg << "\n";
        }
        return code;
    };
    try {
        return fn();
    } catch (const ParseError& e) {
        return report("parse", e.what(), 2);
    } catch (const ValidationError& e) {
        return report("validation", e.what(), 2);
    } catch (const SimulationError& e) {
        return report("simulation", e.what(), 3);
    } catch (const NumericsError& e) {
        return report("numerics", e.what(), 3);
    } catch (const EvalError& e) {
        return report("evaluation", e.what(), 3);
    } catch (const std::exception& e) {
        return report("internal", e.what(), 3);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"identification and design of stochastic model parameters "
                 "from temporal logic constraints"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(version));

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate", "sample trajectories to CSV");
    sim_cmd->add_option("model", sim_args.model_file, "model file")->required();
    sim_cmd->add_option("--set", sim_args.sets, "parameter assignment name=value");
    sim_cmd->add_option("-T,--horizon", sim_args.horizon, "time horizon")->required();
    sim_cmd->add_option("--step", sim_args.step, "integration step");
    sim_cmd->add_option("--max-events", sim_args.max_events, "jump event guard");
    sim_cmd->add_option("--runs", sim_args.runs, "number of trajectories");
    sim_cmd->add_option("-o,--out", sim_args.out, "output CSV path")->required();
    add_common(sim_cmd, sim_args.common);

    CheckArgs check_args;
    auto* check_cmd = app.add_subcommand("check", "estimate satisfaction probabilities");
    check_cmd->add_option("model", check_args.model_file, "model file")->required();
    check_cmd->add_option("props", check_args.props_file, "property file")->required();
    check_cmd->add_option("--set", check_args.sets, "parameter assignment name=value");
    check_cmd->add_option("-T,--horizon", check_args.horizon,
                          "time horizon (default: formula look-ahead)");
    check_cmd->add_option("--step", check_args.step, "integration step");
    check_cmd->add_option("--max-events", check_args.max_events, "jump event guard");
    check_cmd->add_option("--runs", check_args.runs, "number of runs")->required();
    check_cmd->add_option("-o,--out", check_args.out, "result JSON path (default stdout)");
    add_common(check_cmd, check_args.common);

    CheckArgs observe_args;
    std::string observe_out;
    auto* observe_cmd = app.add_subcommand("observe", "generate a synthetic observation matrix");
    observe_cmd->add_option("model", observe_args.model_file, "model file")->required();
    observe_cmd->add_option("props", observe_args.props_file, "property file")->required();
    observe_cmd->add_option("--set", observe_args.sets, "parameter assignment name=value");
    observe_cmd->add_option("-T,--horizon", observe_args.horizon,
                            "time horizon (default: formula look-ahead)");
    observe_cmd->add_option("--step", observe_args.step, "integration step");
    observe_cmd->add_option("--max-events", observe_args.max_events, "jump event guard");
    observe_cmd->add_option("--runs", observe_args.runs, "number of observations")->required();
    observe_cmd->add_option("-o,--out", observe_out, "output CSV path")->required();
    add_common(observe_cmd, observe_args.common);

    SearchArgs id_args;
    bool id_map = false;
    auto* id_cmd = app.add_subcommand("identify", "identify parameters from observed truth values");
    id_cmd->add_option("model", id_args.model_file, "model file")->required();
    id_cmd->add_option("props", id_args.props_file, "property file")->required();
    id_cmd->add_option("observations", id_args.data_file, "observation CSV")->required();
    id_cmd->add_option("space", id_args.space_file, "search space file")->required();
    auto* map_opt = id_cmd->add_option("--map", id_args.priors_file,
                                       "gamma prior file; switches the objective to the posterior");
    id_cmd->add_option("--runs", id_args.runs, "SMC runs per objective evaluation");
    id_cmd->add_option("--init", id_args.init, "initial design size");
    id_cmd->add_option("--grid", id_args.grid, "candidate grid size");
    id_cmd->add_option("--beta", id_args.beta, "initial exploration constant");
    id_cmd->add_option("--max-evals", id_args.max_evals, "cap on evaluations beyond the design");
    id_cmd->add_option("--noise", id_args.noise, "bootstrap | posterior | fixed:<std>");
    id_cmd->add_option("-T,--horizon", id_args.horizon,
                       "time horizon (default: formula look-ahead)");
    id_cmd->add_option("--step", id_args.step, "integration step");
    id_cmd->add_option("--max-events", id_args.max_events, "jump event guard");
    id_cmd->add_option("--trace", id_args.trace_file, "evaluation trace CSV path");
    id_cmd->add_option("-o,--out", id_args.out, "result JSON path (default stdout)");
    add_common(id_cmd, id_args.common);

    SearchArgs design_args;
    auto* design_cmd = app.add_subcommand("design", "tune parameters toward a target distribution");
    design_cmd->add_option("model", design_args.model_file, "model file")->required();
    design_cmd->add_option("props", design_args.props_file, "property file")->required();
    design_cmd->add_option("target", design_args.data_file, "target distribution CSV")->required();
    design_cmd->add_option("space", design_args.space_file, "search space file")->required();
    design_cmd->add_option("--runs", design_args.runs, "SMC runs per objective evaluation");
    design_cmd->add_option("--init", design_args.init, "initial design size");
    design_cmd->add_option("--grid", design_args.grid, "candidate grid size");
    design_cmd->add_option("--beta", design_args.beta, "initial exploration constant");
    design_cmd->add_option("--max-evals", design_args.max_evals,
                           "cap on evaluations beyond the design");
    design_cmd->add_option("--noise", design_args.noise, "bootstrap | fixed:<std>");
    design_cmd->add_option("-T,--horizon", design_args.horizon,
                           "time horizon (default: formula look-ahead)");
    design_cmd->add_option("--step", design_args.step, "integration step");
    design_cmd->add_option("--max-events", design_args.max_events, "jump event guard");
    design_cmd->add_option("--trace", design_args.trace_file, "evaluation trace CSV path");
    design_cmd->add_option("-o,--out", design_args.out, "result JSON path (default stdout)");
    add_common(design_cmd, design_args.common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (sim_cmd->parsed()) {
        resolve_seed(sim_args.common, sim_cmd);
        return guarded(sim_args.common, [&] { return run_simulate(sim_args); });
    }
    if (check_cmd->parsed()) {
        resolve_seed(check_args.common, check_cmd);
        return guarded(check_args.common, [&] { return run_check(check_args, false, ""); });
    }
    if (observe_cmd->parsed()) {
        resolve_seed(observe_args.common, observe_cmd);
        return guarded(observe_args.common,
                       [&] { return run_check(observe_args, true, observe_out); });
    }
    if (id_cmd->parsed()) {
        resolve_seed(id_args.common, id_cmd);
        id_map = map_opt->count() > 0;
        return guarded(id_args.common, [&] { return run_identify(id_args, id_map); });
    }
    if (design_cmd->parsed()) {
        resolve_seed(design_args.common, design_cmd);
        return guarded(design_args.common, [&] { return run_design(design_args); });
    }
    return 2;
}
