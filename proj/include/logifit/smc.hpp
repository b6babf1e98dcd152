#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "formula.hpp"
#include "model.hpp"
#include "monitor.hpp"
#include "rng.hpp"
#include "sim.hpp"
#include "space.hpp"
#include "util.hpp"

namespace logifit {

// Joint truth values are indexed with formula 0 as the most significant bit,
// matching the left-to-right order of bitstrings in target files.

inline std::uint32_t outcome_index(const std::vector<bool>& bits) {
    std::uint32_t idx = 0;
    for (bool b : bits) idx = (idx << 1) | (b ? 1u : 0u);
    return idx;
}

inline std::string outcome_bits(std::uint32_t idx, std::size_t d) {
    std::string s(d, '0');
    for (std::size_t i = 0; i < d; ++i)
        if (idx & (1u << (d - 1 - i))) s[i] = '1';
    return s;
}

/// Truth observations: one row per observed run, columns in formula order.
struct DesignMatrix {
    std::vector<std::string> names;
    std::vector<std::uint32_t> rows; // outcome index per observation

    std::size_t dim() const { return names.size(); }

    std::vector<std::uint64_t> outcome_counts() const {
        std::vector<std::uint64_t> h(std::size_t{1} << names.size(), 0);
        for (auto r : rows) h[r]++;
        return h;
    }
};

struct SmcResult {
    std::vector<std::uint64_t> counts;  // joint truth outcomes over 2^d
    std::vector<double> posterior;      // Dirichlet parameters: prior + counts
    std::size_t n_runs = 0;
};

struct NoisyValue {
    double value = 0.0;
    double std = 0.0;
};

inline std::vector<double> uniform_prior(std::size_t d) {
    return std::vector<double>(std::size_t{1} << d, 1.0);
}

inline const std::map<std::string, double>& model_constants(const Model& m) {
    if (const auto* rn = std::get_if<ReactionNetwork>(&m)) return rn->constants;
    if (const auto* sde = std::get_if<SdeSystem>(&m)) return sde->constants;
    return std::get<HybridSystem>(m).continuous.constants;
}

/// Samples joint truth values of the formulae under the model at theta and
/// updates a Dirichlet prior over the 2^d outcomes. Each run draws from its
/// own stream, so the result does not depend on the worker count.
inline SmcResult smc_sample(const Model& model, const std::map<std::string, double>& theta,
                            const std::vector<FormulaPtr>& formulae, std::size_t n_runs,
                            const SimConfig& cfg, std::uint64_t seed,
                            const std::vector<double>* prior = nullptr, unsigned workers = 1,
                            std::vector<std::uint32_t>* outcomes_out = nullptr) {
    if (formulae.empty()) throw ValidationError("no formulae to sample");
    if (n_runs == 0) throw ValidationError("number of runs must be positive");
    const std::size_t d = formulae.size();
    if (d > 20) throw ValidationError("too many formulae (outcome table would have 2^" +
                                      std::to_string(d) + " entries)");
    double depth = 0.0;
    for (const auto& f : formulae) depth = std::max(depth, temporal_depth(*f));
    if (cfg.horizon < depth)
        throw ValidationError("simulation horizon " + std::to_string(cfg.horizon) +
                              " is shorter than the formula look-ahead " + std::to_string(depth));
    const auto& constants = model_constants(model);

    std::vector<std::uint32_t> outcome(n_runs);
    parallel_for(n_runs, workers, [&](std::size_t i) {
        RngStream rng(seed, i);
        Trajectory traj = simulate(model, theta, cfg, rng);
        std::uint32_t idx = 0;
        for (const auto& f : formulae) {
            BooleanSignal sig = formula_signal(*f, traj, constants);
            idx = (idx << 1) | (sig.contains(0.0) ? 1u : 0u);
        }
        outcome[i] = idx;
    });

    SmcResult res;
    res.n_runs = n_runs;
    res.counts.assign(std::size_t{1} << d, 0);
    for (auto idx : outcome) res.counts[idx]++;
    if (outcomes_out) *outcomes_out = std::move(outcome);
    if (prior) {
        if (prior->size() != res.counts.size())
            throw ValidationError("prior has " + std::to_string(prior->size()) +
                                  " entries, expected " + std::to_string(res.counts.size()));
        res.posterior.assign(prior->begin(), prior->end());
    } else {
        res.posterior.assign(res.counts.size(), 1.0);
    }
    for (std::size_t j = 0; j < res.counts.size(); ++j)
        res.posterior[j] += static_cast<double>(res.counts[j]);
    return res;
}

/// Posterior predictive outcome distribution of a Dirichlet with the given
/// parameters; entries are strictly positive.
inline std::vector<double> predictive(const std::vector<double>& posterior) {
    double total = std::accumulate(posterior.begin(), posterior.end(), 0.0);
    if (total <= 0.0) throw ValidationError("Dirichlet parameters must have positive mass");
    std::vector<double> q(posterior.size());
    for (std::size_t j = 0; j < q.size(); ++j) q[j] = posterior[j] / total;
    return q;
}

/// Sum over observed outcomes of h_j log q_j.
inline double log_likelihood(const std::vector<std::uint64_t>& h, const std::vector<double>& q) {
    if (h.size() != q.size())
        throw ValidationError("outcome counts and distribution differ in size");
    double ll = 0.0;
    for (std::size_t j = 0; j < h.size(); ++j) {
        if (h[j] == 0) continue;
        if (q[j] <= 0.0) return -std::numeric_limits<double>::infinity();
        ll += static_cast<double>(h[j]) * std::log(q[j]);
    }
    return ll;
}

/// Log density of a Gamma(shape, rate = shape/mean) prior at theta.
inline double gamma_log_prior(const GammaPrior& g, double theta) {
    if (theta <= 0.0) return -std::numeric_limits<double>::infinity();
    double rate = g.shape / g.mean;
    return (g.shape - 1.0) * std::log(theta) - rate * theta + g.shape * std::log(rate) -
           std::lgamma(g.shape);
}

/// Log likelihood plus independent Gamma prior terms for the parameters that
/// have one.
inline double log_posterior(double loglik, const std::map<std::string, GammaPrior>& priors,
                            const std::map<std::string, double>& theta) {
    double lp = loglik;
    for (const auto& [name, prior] : priors) {
        auto it = theta.find(name);
        if (it == theta.end())
            throw ValidationError("prior given for unknown parameter '" + name + "'");
        lp += gamma_log_prior(prior, it->second);
    }
    return lp;
}

/// Jensen-Shannon divergence (natural log, bounded by log 2).
inline double jsd(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size())
        throw ValidationError("distributions differ in size");
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double m = p[i] + q[i];
        if (p[i] > 0.0) acc += p[i] * std::log(2.0 * p[i] / m);
        if (q[i] > 0.0) acc += q[i] * std::log(2.0 * q[i] / m);
    }
    return 0.5 * acc;
}

/// Resamples the observed outcomes with repetition and reports the spread of
/// the objective under the resampled predictive distributions.
inline NoisyValue bootstrap_noise(const std::vector<std::uint64_t>& counts,
                                  const std::vector<double>& prior,
                                  const std::function<double(const std::vector<double>&)>& objective,
                                  int B, RngStream& rng) {
    if (B < 2) throw ValidationError("bootstrap needs at least 2 resamples");
    std::uint64_t n = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    if (n == 0) throw ValidationError("bootstrap needs at least one observed outcome");
    auto with_prior = [&](const std::vector<std::uint64_t>& k) {
        std::vector<double> post(prior);
        for (std::size_t j = 0; j < k.size(); ++j) post[j] += static_cast<double>(k[j]);
        return objective(predictive(post));
    };
    NoisyValue out;
    out.value = with_prior(counts);
    std::vector<double> vals(B);
    std::vector<std::uint64_t> resampled(counts.size());
    for (int b = 0; b < B; ++b) {
        std::uint64_t left = n;
        double mass = static_cast<double>(n);
        for (std::size_t j = 0; j < counts.size(); ++j) {
            if (left == 0) { resampled[j] = 0; continue; }
            double pj = static_cast<double>(counts[j]) / mass;
            std::uint64_t kj;
            if (pj >= 1.0) kj = left;
            else kj = std::binomial_distribution<std::uint64_t>(left, pj)(rng.engine());
            resampled[j] = kj;
            left -= kj;
            mass -= static_cast<double>(counts[j]);
        }
        vals[b] = with_prior(resampled);
    }
    double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / B;
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    out.std = std::sqrt(ss / (B - 1));
    return out;
}

namespace detail {

inline double log_multinomial_beta(const std::vector<double>& v) {
    double sum = 0.0, acc = 0.0;
    for (double x : v) {
        acc += std::lgamma(x);
        sum += x;
    }
    return acc - std::lgamma(sum);
}

} // namespace detail

/// Exact moments of the likelihood under the Dirichlet posterior:
/// E[L] and VAR[L] from multinomial Beta ratios, reported on the log scale
/// with a delta-method standard deviation.
inline NoisyValue posterior_noise(const std::vector<double>& prior,
                                  const std::vector<std::uint64_t>& counts,
                                  const std::vector<std::uint64_t>& h) {
    if (prior.size() != counts.size() || prior.size() != h.size())
        throw ValidationError("prior, counts and data counts differ in size");
    std::vector<double> base(prior.size()), plus_h(prior.size()), plus_2h(prior.size());
    for (std::size_t j = 0; j < prior.size(); ++j) {
        base[j] = prior[j] + static_cast<double>(counts[j]);
        plus_h[j] = base[j] + static_cast<double>(h[j]);
        plus_2h[j] = base[j] + 2.0 * static_cast<double>(h[j]);
    }
    double log_b = detail::log_multinomial_beta(base);
    double log_e1 = detail::log_multinomial_beta(plus_h) - log_b;   // log E[L]
    double log_e2 = detail::log_multinomial_beta(plus_2h) - log_b;  // log E[L^2]
    NoisyValue out;
    out.value = log_e1;
    double ratio = std::exp(log_e2 - 2.0 * log_e1); // 1 + VAR/E^2
    out.std = std::sqrt(std::max(ratio - 1.0, 0.0));
    return out;
}

/// Validates a target outcome distribution for d formulae.
inline void validate_target(const std::vector<double>& target, std::size_t d, double tol = 1e-9) {
    if (target.size() != (std::size_t{1} << d))
        throw ValidationError("target distribution has " + std::to_string(target.size()) +
                              " entries, expected 2^" + std::to_string(d) + " = " +
                              std::to_string(std::size_t{1} << d));
    double sum = 0.0;
    for (double p : target) {
        if (p < 0.0) throw ValidationError("target probabilities must be non-negative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > tol)
        throw ValidationError("target probabilities sum to " + std::to_string(sum) +
                              ", expected 1");
}

} // namespace logifit
