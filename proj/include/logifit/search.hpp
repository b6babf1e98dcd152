#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "errors.hpp"
#include "gp.hpp"
#include "lhs.hpp"
#include "rng.hpp"
#include "smc.hpp"
#include "space.hpp"

namespace logifit {

struct UcbConfig {
    std::size_t init = 48;        // initial design size n0
    std::size_t grid = 500;       // candidate grid size per iteration
    double beta0 = 2.0;           // initial exploration constant
    double beta_growth = 2.0;
    double beta_cap = 16.0;
    int max_stagnant = 3;         // consecutive non-improving iterations before stopping
    int refine_steps = 50;
    std::size_t smc_runs = 1000;  // SMC budget per objective evaluation
    std::uint64_t seed = 0;
    std::size_t max_evals = 200;  // hard cap on evaluations beyond the initial design

    void validate() const {
        if (init < 2) throw ValidationError("initial design needs at least 2 points");
        if (grid < init) throw ValidationError("candidate grid must be at least as large as the initial design");
        if (!(beta0 > 0.0)) throw ValidationError("exploration constant must be positive");
        if (max_stagnant < 1) throw ValidationError("stagnation limit must be at least 1");
        if (smc_runs == 0) throw ValidationError("per-evaluation run budget must be positive");
    }
};

struct TraceEntry {
    int iteration = 0;            // 0 for the initial design
    Eigen::VectorXd x;            // normalized point
    std::vector<double> theta;    // raw parameter values
    double value = 0.0;
    double std = 0.0;
};

struct LaplaceResult {
    Eigen::MatrixXd covariance;   // raw scale, projected onto non-negative curvature
    std::vector<double> std;      // per-parameter std; +inf along clipped directions
    int clipped_directions = 0;
    std::vector<std::string> warnings;
};

struct SearchResult {
    std::vector<double> best_theta;
    Eigen::VectorXd best_x;
    NoisyValue best;
    LaplaceResult laplace;
    std::vector<TraceEntry> trace;
    std::size_t evaluations = 0;       // total, including the initial design
    std::size_t init_evaluations = 0;  // how many of those were initial points
    std::vector<std::string> warnings;
};

using Objective = std::function<NoisyValue(const std::vector<double>&)>;

struct UcbChoice {
    std::size_t index = 0;
    Eigen::VectorXd x;
    double score = 0.0;
};

/// Candidate maximizing mean + beta * std; ties go to the lowest index.
inline UcbChoice ucb_select(const FittedGp& gp, const std::vector<Eigen::VectorXd>& candidates,
                            double beta) {
    if (candidates.empty()) throw ValidationError("no candidates to select from");
    UcbChoice best;
    best.score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        Prediction p = gp.predict(candidates[i]);
        double score = p.mean + beta * std::sqrt(p.var);
        if (score > best.score) {
            best.score = score;
            best.index = i;
            best.x = candidates[i];
        }
    }
    return best;
}

namespace detail {

inline double ucb_value(const FittedGp& gp, const Eigen::VectorXd& x, double beta) {
    Prediction p = gp.predict(x);
    return p.mean + beta * std::sqrt(p.var);
}

inline Eigen::VectorXd ucb_grad(const FittedGp& gp, const Eigen::VectorXd& x, double beta) {
    Eigen::VectorXd g = gp.mean_grad(x);
    if (beta > 0.0) {
        double sigma = std::sqrt(gp.predict(x).var);
        if (sigma > 1e-12) g += beta * gp.var_grad(x) / (2.0 * sigma);
    }
    return g;
}

inline Eigen::VectorXd clamp_box(Eigen::VectorXd x) {
    return x.cwiseMax(-1.0).cwiseMin(1.0);
}

} // namespace detail

/// Ascends the acquisition surface from x0: Newton step on the mean curvature
/// when it points uphill, damped gradient steps otherwise, always projected
/// onto [-1,1]^d. Never returns a point worse than x0.
inline Eigen::VectorXd local_refine(const FittedGp& gp, const Eigen::VectorXd& x0, double beta,
                                    int max_steps = 50) {
    Eigen::VectorXd x = detail::clamp_box(x0);
    double f = detail::ucb_value(gp, x, beta);
    for (int it = 0; it < max_steps; ++it) {
        Eigen::VectorXd g = detail::ucb_grad(gp, x, beta);
        if (g.norm() < 1e-10) break;
        bool moved = false;

        Eigen::MatrixXd H = gp.mean_hessian(x);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        if (ldlt.info() == Eigen::Success) {
            Eigen::VectorXd p = -ldlt.solve(g);
            if (p.dot(g) > 0.0 && p.norm() <= 1.0) {
                Eigen::VectorXd cand = detail::clamp_box(x + p);
                double fc = detail::ucb_value(gp, cand, beta);
                if (fc > f) {
                    x = cand;
                    f = fc;
                    moved = true;
                }
            }
        }
        if (!moved) {
            double step = 0.25;
            Eigen::VectorXd dir = g / g.norm();
            while (step > 1e-12) {
                Eigen::VectorXd cand = detail::clamp_box(x + step * dir);
                double fc = detail::ucb_value(gp, cand, beta);
                if (fc > f) {
                    x = cand;
                    f = fc;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
        }
        if (!moved) break;
    }
    return x;
}

/// Curvature-based uncertainty of the surrogate maximum: covariance is the
/// inverse negated Hessian of the posterior mean at x_star, transported to the
/// raw parameter scale. Non-positive curvature directions are dropped from the
/// covariance and reported; parameters lying along a negative-curvature
/// direction get an infinite std marker.
inline LaplaceResult laplace(const FittedGp& gp, const Eigen::VectorXd& x_star,
                             const ParameterSpace& space) {
    const auto d = static_cast<Eigen::Index>(space.dim());
    if (x_star.size() != d) throw ValidationError("optimum dimension does not match the space");
    LaplaceResult out;
    for (Eigen::Index a = 0; a < d; ++a)
        if (std::abs(x_star(a)) >= 1.0 - 1e-9) {
            out.warnings.push_back("optimum lies on the boundary of axis " + space.axes[a].name +
                                   "; curvature estimate is one-sided");
            break;
        }

    Eigen::MatrixXd negH = -gp.mean_hessian(x_star);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(negH);
    if (eig.info() != Eigen::Success) throw NumericsError("eigendecomposition of the curvature failed");
    Eigen::VectorXd lam = eig.eigenvalues();
    Eigen::MatrixXd V = eig.eigenvectors();
    double scale = lam.cwiseAbs().maxCoeff();
    double thresh = std::max(scale, 1.0) * 1e-12;

    std::vector<bool> negative(d, false);
    Eigen::MatrixXd cov_n = Eigen::MatrixXd::Zero(d, d);
    bool singular = false;
    for (Eigen::Index i = 0; i < d; ++i) {
        if (lam(i) > thresh) {
            cov_n += V.col(i) * V.col(i).transpose() / lam(i);
        } else if (lam(i) < -thresh) {
            negative[i] = true;
            ++out.clipped_directions;
        } else {
            singular = true;
        }
    }
    if (out.clipped_directions > 0)
        out.warnings.push_back(std::to_string(out.clipped_directions) +
                               " direction(s) of negative curvature at the optimum; "
                               "their variance is unbounded");
    if (singular)
        out.warnings.push_back("curvature is singular; covariance uses the pseudo-inverse");

    std::vector<double> theta = space.denormalize(
        std::vector<double>(x_star.data(), x_star.data() + d));
    Eigen::VectorXd jac(d);
    for (Eigen::Index a = 0; a < d; ++a) jac(a) = space.jacobian(a, theta[a]);
    out.covariance = jac.asDiagonal() * cov_n * jac.asDiagonal();
    out.covariance = ((out.covariance + out.covariance.transpose()) / 2.0).eval();

    out.std.resize(d);
    for (Eigen::Index a = 0; a < d; ++a) {
        out.std[a] = std::sqrt(std::max(out.covariance(a, a), 0.0));
        for (Eigen::Index i = 0; i < d; ++i)
            if (negative[i] && std::abs(V(a, i)) > 1e-9)
                out.std[a] = std::numeric_limits<double>::infinity();
    }
    return out;
}

/// GP-UCB maximization of a noisy objective over the normalized box.
///
/// Evaluates an orthogonal-LHS initial design, fits kernel hyperparameters to
/// it once, then repeatedly resamples a candidate grid, refines the best UCB
/// candidate and evaluates the objective there whenever its refined UCB beats
/// the best observed value. Stops after max_stagnant consecutive iterations
/// without improvement of the best value.
inline SearchResult gpucb_maximize(const Objective& objective, const ParameterSpace& space,
                                   const UcbConfig& cfg) {
    cfg.validate();
    space.validate();
    const std::size_t d = space.dim();
    if (d == 0) throw ValidationError("no free parameters to search over");

    SearchResult res;
    auto try_eval = [&](const std::vector<double>& theta, NoisyValue& out) {
        for (int attempt = 0; attempt < 2; ++attempt) {
            try {
                out = objective(theta);
                if (!std::isfinite(out.value))
                    throw NumericsError("objective value is not finite");
                return true;
            } catch (const std::exception& e) {
                res.warnings.push_back(std::string(attempt == 0 ? "objective failed (retrying): "
                                                                : "objective failed (skipping point): ") +
                                       e.what());
            }
        }
        return false;
    };

    std::vector<Eigen::VectorXd> init_pts =
        orthogonal_lhs(cfg.init, d, derive_seed(cfg.seed, 1), &res.warnings);
    TrainingSet train;
    for (const auto& x : init_pts) {
        std::vector<double> theta = space.denormalize(std::vector<double>(x.data(), x.data() + d));
        NoisyValue nv;
        if (!try_eval(theta, nv)) continue;
        train.add(x, nv.value, nv.std * nv.std);
        res.trace.push_back({0, x, theta, nv.value, nv.std});
    }
    if (train.size() < 2)
        throw NumericsError("fewer than 2 initial objective evaluations succeeded");
    res.init_evaluations = res.trace.size();

    HyperFit hyper = optimize_hyperparams(train, 5, derive_seed(cfg.seed, 2));
    for (const auto& w : hyper.warnings) res.warnings.push_back(w);
    auto gp = std::make_unique<FittedGp>(train, hyper.kernel);

    std::size_t best_i = 0;
    for (std::size_t i = 1; i < res.trace.size(); ++i)
        if (res.trace[i].value > res.trace[best_i].value) best_i = i;
    double best_value = res.trace[best_i].value;
    Eigen::VectorXd best_x = res.trace[best_i].x;

    double beta = cfg.beta0;
    int stagnant = 0;
    std::size_t extra = 0;
    for (int iter = 1; stagnant < cfg.max_stagnant && extra < cfg.max_evals; ++iter) {
        std::vector<Eigen::VectorXd> grid =
            orthogonal_lhs(cfg.grid, d, derive_seed(cfg.seed, 100 + static_cast<std::uint64_t>(iter)),
                           &res.warnings);
        UcbChoice choice = ucb_select(*gp, grid, beta);
        Eigen::VectorXd xr = local_refine(*gp, choice.x, beta, cfg.refine_steps);

        bool evaluated = false;
        bool improved = false;
        if (detail::ucb_value(*gp, xr, beta) > best_value + 1e-6) {
            std::vector<double> theta =
                space.denormalize(std::vector<double>(xr.data(), xr.data() + d));
            NoisyValue nv;
            if (try_eval(theta, nv)) {
                evaluated = true;
                ++extra;
                train.add(xr, nv.value, nv.std * nv.std);
                gp = std::make_unique<FittedGp>(train, hyper.kernel);
                res.trace.push_back({iter, xr, theta, nv.value, nv.std});
                if (nv.value > best_value) {
                    best_value = nv.value;
                    best_x = xr;
                    best_i = res.trace.size() - 1;
                    improved = true;
                }
            }
        }
        if (improved)
            stagnant = 0;
        else
            ++stagnant;
        if (evaluated)
            beta = cfg.beta0;
        else
            beta = std::min(beta * cfg.beta_growth, cfg.beta_cap);
    }

    res.evaluations = res.trace.size();
    res.best_x = best_x;
    res.best_theta = res.trace[best_i].theta;
    res.best = NoisyValue{res.trace[best_i].value, res.trace[best_i].std};

    Eigen::VectorXd x_lap = local_refine(*gp, best_x, 0.0, cfg.refine_steps);
    res.laplace = laplace(*gp, x_lap, space);
    for (const auto& w : res.laplace.warnings) res.warnings.push_back(w);
    return res;
}

enum class NoiseKind { Bootstrap, Posterior, Fixed };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::Bootstrap;
    double fixed_std = 0.0;
    int bootstrap_samples = 200;
};

namespace detail {

/// Wires an SMC evaluation into a scalar objective with its noise estimate.
template <class Fn>
NoisyValue smc_objective_eval(const Model& model, const std::map<std::string, double>& theta,
                              const std::vector<FormulaPtr>& formulae, const SimConfig& sim,
                              std::size_t n_runs, std::uint64_t seed, unsigned workers,
                              const NoiseSpec& noise, const Fn& value_of_predictive) {
    SmcResult smc = smc_sample(model, theta, formulae, n_runs, sim, seed, nullptr, workers);
    std::vector<double> alpha = uniform_prior(formulae.size());
    switch (noise.kind) {
    case NoiseKind::Bootstrap: {
        RngStream rng(derive_seed(seed, 0xB001u), 0);
        return bootstrap_noise(smc.counts, alpha, value_of_predictive,
                               noise.bootstrap_samples, rng);
    }
    case NoiseKind::Fixed:
        return NoisyValue{value_of_predictive(predictive(smc.posterior)), noise.fixed_std};
    case NoiseKind::Posterior:
        throw ValidationError("analytic posterior noise is handled by the caller");
    }
    throw ValidationError("unknown noise kind");
}

} // namespace detail

/// Parameter identification: maximizes the data log-likelihood (or, with
/// priors, the log-posterior) of the observed truth matrix over the space.
inline SearchResult identify(const Model& model, const std::vector<FormulaPtr>& formulae,
                             const DesignMatrix& data, const ParameterSpace& space,
                             const std::map<std::string, GammaPrior>* priors, const UcbConfig& cfg,
                             const SimConfig& sim, const NoiseSpec& noise = {},
                             unsigned workers = 1) {
    if (data.dim() != formulae.size())
        throw ValidationError("observation matrix has " + std::to_string(data.dim()) +
                              " formulae but " + std::to_string(formulae.size()) + " were given");
    if (data.rows.empty()) throw ValidationError("no observations");
    std::vector<std::uint64_t> h = data.outcome_counts();

    auto counter = std::make_shared<std::uint64_t>(0);
    Objective objective = [&, counter](const std::vector<double>& theta_free) {
        std::uint64_t eval_seed = derive_seed(cfg.seed, 1'000'000 + (*counter)++);
        std::map<std::string, double> theta = space.bind(theta_free);
        double prior_term = 0.0;
        if (priors) prior_term = log_posterior(0.0, *priors, theta);

        if (noise.kind == NoiseKind::Posterior) {
            SmcResult smc = smc_sample(model, theta, formulae, cfg.smc_runs, sim, eval_seed,
                                       nullptr, workers);
            NoisyValue nv = posterior_noise(uniform_prior(formulae.size()), smc.counts, h);
            nv.value += prior_term;
            return nv;
        }
        auto loglik = [&](const std::vector<double>& q) { return log_likelihood(h, q); };
        NoisyValue nv = detail::smc_objective_eval(model, theta, formulae, sim, cfg.smc_runs,
                                                   eval_seed, workers, noise, loglik);
        nv.value += prior_term;
        return nv;
    };
    return gpucb_maximize(objective, space, cfg);
}

/// Parameter design: maximizes the negated Jensen-Shannon divergence between
/// the target outcome distribution and the predictive distribution.
inline SearchResult design(const Model& model, const std::vector<FormulaPtr>& formulae,
                           const std::vector<double>& target, const ParameterSpace& space,
                           const UcbConfig& cfg, const SimConfig& sim, const NoiseSpec& noise = {},
                           unsigned workers = 1) {
    validate_target(target, formulae.size(), 1e-6);
    if (noise.kind == NoiseKind::Posterior)
        throw ValidationError("analytic posterior noise applies to likelihood objectives only");

    auto counter = std::make_shared<std::uint64_t>(0);
    Objective objective = [&, counter](const std::vector<double>& theta_free) {
        std::uint64_t eval_seed = derive_seed(cfg.seed, 1'000'000 + (*counter)++);
        std::map<std::string, double> theta = space.bind(theta_free);
        auto neg_jsd = [&](const std::vector<double>& q) { return -jsd(target, q); };
        return detail::smc_objective_eval(model, theta, formulae, sim, cfg.smc_runs, eval_seed,
                                          workers, noise, neg_jsd);
    };
    return gpucb_maximize(objective, space, cfg);
}

} // namespace logifit
