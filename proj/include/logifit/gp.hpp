#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace logifit {

/// Squared-exponential kernel k(x,x') = gamma * exp(-|x-x'|^2 / lambda^2).
struct Kernel {
    double gamma = 1.0;
    double lambda = 1.0;

    double operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
        return gamma * std::exp(-(a - b).squaredNorm() / (lambda * lambda));
    }
};

/// Observations with per-point noise variances. Points closer than 1e-10 are
/// treated as repeated measurements and combined by precision weighting.
class TrainingSet {
public:
    void add(const Eigen::VectorXd& x, double y, double noise_var) {
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if ((points_[i] - x).norm() < 1e-10) {
                double w_old = 1.0 / std::max(vars_[i], 1e-12);
                double w_new = 1.0 / std::max(noise_var, 1e-12);
                ys_[i] = (w_old * ys_[i] + w_new * y) / (w_old + w_new);
                vars_[i] = 1.0 / (w_old + w_new);
                return;
            }
        }
        points_.push_back(x);
        ys_.push_back(y);
        vars_.push_back(noise_var);
    }

    std::size_t size() const { return points_.size(); }
    std::size_t dim() const { return points_.empty() ? 0 : points_[0].size(); }
    const std::vector<Eigen::VectorXd>& points() const { return points_; }
    const std::vector<double>& values() const { return ys_; }
    const std::vector<double>& noise_vars() const { return vars_; }

    Eigen::MatrixXd design_matrix() const {
        Eigen::MatrixXd X(points_.size(), dim());
        for (std::size_t i = 0; i < points_.size(); ++i) X.row(i) = points_[i].transpose();
        return X;
    }
    Eigen::VectorXd value_vector() const {
        return Eigen::Map<const Eigen::VectorXd>(ys_.data(), ys_.size());
    }
    Eigen::VectorXd noise_vector() const {
        return Eigen::Map<const Eigen::VectorXd>(vars_.data(), vars_.size());
    }

    double value_variance() const {
        if (ys_.empty()) return 0.0;
        double mean = 0.0;
        for (double y : ys_) mean += y;
        mean /= static_cast<double>(ys_.size());
        double ss = 0.0;
        for (double y : ys_) ss += (y - mean) * (y - mean);
        return ss / static_cast<double>(ys_.size());
    }

private:
    std::vector<Eigen::VectorXd> points_;
    std::vector<double> ys_;
    std::vector<double> vars_;
};

namespace detail {

inline Eigen::MatrixXd kernel_matrix(const Kernel& k, const Eigen::MatrixXd& X) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = k.gamma;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double r2 = (X.row(i) - X.row(j)).squaredNorm();
            K(i, j) = K(j, i) = k.gamma * std::exp(-r2 / (k.lambda * k.lambda));
        }
    }
    return K;
}

/// Cholesky with an escalating diagonal jitter; reports the level used.
inline Eigen::LLT<Eigen::MatrixXd> jittered_llt(const Eigen::MatrixXd& Khat, double gamma,
                                                double& jitter_used) {
    Eigen::LLT<Eigen::MatrixXd> llt(Khat);
    jitter_used = 0.0;
    if (llt.info() == Eigen::Success) return llt;
    for (double jitter = 1e-10 * gamma; jitter <= 1e-6 * gamma * 1.0000001; jitter *= 10.0) {
        Eigen::MatrixXd K2 = Khat;
        K2.diagonal().array() += jitter;
        llt.compute(K2);
        if (llt.info() == Eigen::Success) {
            jitter_used = jitter;
            return llt;
        }
    }
    throw NumericsError("kernel matrix is not positive definite even with jitter");
}

} // namespace detail

struct Prediction {
    double mean = 0.0;
    double var = 0.0;
};

/// Posterior Gaussian process: holds the Cholesky factor of the noisy kernel
/// matrix over the training inputs.
class FittedGp {
public:
    FittedGp(const TrainingSet& train, const Kernel& kernel) : kernel_(kernel) {
        if (train.size() == 0) throw ValidationError("cannot fit a process to no data");
        X_ = train.design_matrix();
        Eigen::VectorXd y = train.value_vector();
        y_mean_ = y.mean();
        Eigen::VectorXd yc = y.array() - y_mean_;
        Eigen::MatrixXd Khat = detail::kernel_matrix(kernel_, X_);
        Khat.diagonal() += train.noise_vector();
        llt_ = detail::jittered_llt(Khat, kernel_.gamma, jitter_used_);
        alpha_ = llt_.solve(yc);
    }

    Prediction predict(const Eigen::VectorXd& x) const {
        Eigen::VectorXd ks = kvec(x);
        Prediction p;
        p.mean = y_mean_ + ks.dot(alpha_);
        p.var = std::max(kernel_.gamma - ks.dot(llt_.solve(ks)), 0.0);
        return p;
    }

    /// Gradient of the posterior mean.
    Eigen::VectorXd mean_grad(const Eigen::VectorXd& x) const {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
        const double il2 = 1.0 / (kernel_.lambda * kernel_.lambda);
        for (Eigen::Index i = 0; i < X_.rows(); ++i) {
            Eigen::VectorXd dx = x - X_.row(i).transpose();
            double ki = kernel_.gamma * std::exp(-dx.squaredNorm() * il2);
            g -= alpha_(i) * ki * 2.0 * il2 * dx;
        }
        return g;
    }

    /// Hessian of the posterior mean.
    Eigen::MatrixXd mean_hessian(const Eigen::VectorXd& x) const {
        const Eigen::Index d = x.size();
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d, d);
        const double il2 = 1.0 / (kernel_.lambda * kernel_.lambda);
        for (Eigen::Index i = 0; i < X_.rows(); ++i) {
            Eigen::VectorXd dx = x - X_.row(i).transpose();
            double ki = kernel_.gamma * std::exp(-dx.squaredNorm() * il2);
            H += alpha_(i) * ki * (4.0 * il2 * il2 * dx * dx.transpose() -
                                   2.0 * il2 * Eigen::MatrixXd::Identity(d, d));
        }
        return H;
    }

    /// Gradient of the posterior variance.
    Eigen::VectorXd var_grad(const Eigen::VectorXd& x) const {
        Eigen::VectorXd ks = kvec(x);
        Eigen::VectorXd w = llt_.solve(ks);
        Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
        const double il2 = 1.0 / (kernel_.lambda * kernel_.lambda);
        for (Eigen::Index i = 0; i < X_.rows(); ++i) {
            Eigen::VectorXd dx = x - X_.row(i).transpose();
            g -= 2.0 * w(i) * ks(i) * (-2.0 * il2) * dx;
        }
        return g;
    }

    const Kernel& kernel() const { return kernel_; }
    const Eigen::MatrixXd& inputs() const { return X_; }
    double jitter_used() const { return jitter_used_; }

private:
    Eigen::VectorXd kvec(const Eigen::VectorXd& x) const {
        Eigen::VectorXd ks(X_.rows());
        const double il2 = 1.0 / (kernel_.lambda * kernel_.lambda);
        for (Eigen::Index i = 0; i < X_.rows(); ++i)
            ks(i) = kernel_.gamma *
                    std::exp(-(x - X_.row(i).transpose()).squaredNorm() * il2);
        return ks;
    }

    Kernel kernel_;
    Eigen::MatrixXd X_;
    Eigen::VectorXd alpha_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double y_mean_ = 0.0;
    double jitter_used_ = 0.0;
};

/// Log marginal likelihood of the (mean-centered) data; optionally its
/// gradient with respect to (log gamma, log lambda).
inline double log_evidence(const TrainingSet& train, const Kernel& kernel,
                           Eigen::Vector2d* grad = nullptr) {
    const Eigen::Index n = static_cast<Eigen::Index>(train.size());
    if (n == 0) throw ValidationError("cannot evaluate evidence with no data");
    Eigen::MatrixXd X = train.design_matrix();
    Eigen::VectorXd yc = train.value_vector().array() - train.value_vector().mean();
    Eigen::MatrixXd K = detail::kernel_matrix(kernel, X);
    Eigen::MatrixXd Khat = K;
    Khat.diagonal() += train.noise_vector();
    double jitter = 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt = detail::jittered_llt(Khat, kernel.gamma, jitter);
    Eigen::VectorXd alpha = llt.solve(yc);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
    double ev = -0.5 * yc.dot(alpha) - 0.5 * logdet -
                0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
    if (grad) {
        // d/dpsi log evidence = 1/2 tr[(alpha alpha^T - Khat^{-1}) dKhat/dpsi]
        Eigen::MatrixXd Kinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
        Eigen::MatrixXd A = alpha * alpha.transpose() - Kinv;
        Eigen::MatrixXd dK_dlog_lambda(n, n);
        const double il2 = 1.0 / (kernel.lambda * kernel.lambda);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                double r2 = (X.row(i) - X.row(j)).squaredNorm();
                dK_dlog_lambda(i, j) = K(i, j) * 2.0 * r2 * il2;
            }
        (*grad)(0) = 0.5 * A.cwiseProduct(K).sum();
        (*grad)(1) = 0.5 * A.cwiseProduct(dK_dlog_lambda).sum();
    }
    return ev;
}

struct HyperFit {
    Kernel kernel;
    double evidence = 0.0;
    bool clipped = false;
    std::vector<std::string> warnings;
};

/// Multi-start safeguarded gradient ascent on the log evidence over
/// (log gamma, log lambda).
inline HyperFit optimize_hyperparams(const TrainingSet& train, int n_starts = 5,
                                     std::uint64_t seed = 0) {
    if (train.size() == 0) throw ValidationError("cannot optimize hyperparameters with no data");
    const double lo = std::log(1e-8), hi = std::log(1e8);
    double vy = train.value_variance();
    double vref = vy > 0.0 ? vy : 1e-8;

    RngStream rng(seed, 0);
    HyperFit best;
    best.evidence = -std::numeric_limits<double>::infinity();
    bool best_clipped = false;
    bool any_start = false;
    if (train.size() < 3)
        best.warnings.push_back("fewer than 3 observations; hyperparameter estimates are weak");

    for (int s = 0; s < n_starts; ++s) {
        Eigen::Vector2d z;
        z(0) = std::log(vref) + std::log(0.01) + rng.uniform() * std::log(100.0 / 0.01);
        z(1) = std::log(0.05) + rng.uniform() * std::log(4.0 / 0.05);
        z = z.cwiseMax(lo).cwiseMin(hi);

        auto eval = [&](const Eigen::Vector2d& zz, Eigen::Vector2d* g) {
            Kernel k{std::exp(zz(0)), std::exp(zz(1))};
            return log_evidence(train, k, g);
        };
        Eigen::Vector2d g;
        double f;
        try {
            f = eval(z, &g);
        } catch (const NumericsError&) {
            continue;
        }
        any_start = true;
        double step = 0.5;
        for (int it = 0; it < 200; ++it) {
            if (g.norm() < 1e-6) break;
            Eigen::Vector2d dir = g / g.norm();
            bool moved = false;
            while (step > 1e-12) {
                Eigen::Vector2d z2 = (z + step * dir).cwiseMax(lo).cwiseMin(hi);
                double f2;
                try {
                    Eigen::Vector2d g2;
                    f2 = eval(z2, &g2);
                    if (f2 > f) {
                        z = z2;
                        f = f2;
                        g = g2;
                        moved = true;
                        step = std::min(step * 1.5, 2.0);
                        break;
                    }
                } catch (const NumericsError&) {
                    // shrink away from a non-factorizable corner
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        if (f > best.evidence) {
            best.evidence = f;
            best.kernel = Kernel{std::exp(z(0)), std::exp(z(1))};
            best_clipped = z(0) <= lo + 1e-12 || z(0) >= hi - 1e-12 || z(1) <= lo + 1e-12 ||
                           z(1) >= hi - 1e-12;
        }
    }
    if (!any_start) {
        best.kernel = Kernel{vref, 1.0};
        best.evidence = -std::numeric_limits<double>::infinity();
        best.warnings.push_back("no hyperparameter start factorized; using fallback kernel");
        return best;
    }
    best.clipped = best_clipped;
    if (best_clipped)
        best.warnings.push_back("kernel hyperparameters clipped at their bounds (gamma=" +
                                std::to_string(best.kernel.gamma) + ", lambda=" +
                                std::to_string(best.kernel.lambda) + ")");
    return best;
}

} // namespace logifit
