#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "logifit/gp.hpp"
#include "logifit/lhs.hpp"
#include "logifit/rng.hpp"

using namespace logifit;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

Eigen::VectorXd random_point(RngStream& rng, std::size_t d) {
    Eigen::VectorXd v(d);
    for (std::size_t i = 0; i < d; ++i) v(i) = -1.0 + 2.0 * rng.uniform();
    return v;
}

TrainingSet random_train(RngStream& rng, std::size_t n, std::size_t d, double noise_lo,
                         double noise_hi) {
    TrainingSet t;
    for (std::size_t i = 0; i < n; ++i) {
        double nv = noise_lo + (noise_hi - noise_lo) * rng.uniform();
        t.add(random_point(rng, d), -2.0 + 4.0 * rng.uniform(), nv);
    }
    return t;
}

} // namespace

TEST_CASE("kernel is symmetric and peaks at the amplitude", "[gp]") {
    Kernel k{2.5, 0.7};
    Eigen::VectorXd a = vec2(0.3, -0.2), b = vec2(-0.5, 0.9);
    CHECK_THAT(k(a, a), WithinAbs(2.5, 1e-15));
    CHECK_THAT(k(a, b), WithinAbs(k(b, a), 1e-15));
    CHECK(k(a, b) < k(a, a));
    CHECK_THAT(k(a, b), WithinRel(2.5 * std::exp(-(a - b).squaredNorm() / 0.49), 1e-12));
}

TEST_CASE("coincident inputs are merged by precision weighting", "[gp]") {
    TrainingSet t;
    Eigen::VectorXd x = vec2(0.1, 0.2);
    t.add(x, 1.0, 1.0);
    t.add(x, 3.0, 1.0);
    REQUIRE(t.size() == 1);
    CHECK_THAT(t.values()[0], WithinAbs(2.0, 1e-12));
    CHECK_THAT(t.noise_vars()[0], WithinAbs(0.5, 1e-12));

    // Unequal precisions pull the merged value toward the sharper one.
    TrainingSet u;
    u.add(x, 0.0, 0.01);
    u.add(x + Eigen::VectorXd::Constant(2, 1e-12), 1.0, 1.0);
    REQUIRE(u.size() == 1);
    CHECK_THAT(u.values()[0], WithinAbs(1.0 / 101.0, 1e-12));

    TrainingSet v;
    v.add(x, 0.0, 0.01);
    v.add(x + Eigen::VectorXd::Constant(2, 1e-3), 1.0, 1.0);
    CHECK(v.size() == 2);
}

TEST_CASE("fitting requires data", "[gp]") {
    TrainingSet empty;
    CHECK_THROWS_AS(FittedGp(empty, Kernel{}), ValidationError);
    CHECK_THROWS_AS(log_evidence(empty, Kernel{}), ValidationError);
    CHECK_THROWS_AS(optimize_hyperparams(empty), ValidationError);
}

TEST_CASE("single point posterior has the closed form", "[gp]") {
    const double gamma = 2.0, s2 = 0.5, y1 = 3.7;
    TrainingSet t;
    t.add(vec2(0.0, 0.0), y1, s2);
    FittedGp gp(t, Kernel{gamma, 1.0});

    // Centering makes the single residual zero, so the mean is flat at y1.
    Prediction at = gp.predict(vec2(0.0, 0.0));
    CHECK_THAT(at.mean, WithinAbs(y1, 1e-12));
    CHECK_THAT(at.var, WithinAbs(gamma * s2 / (gamma + s2), 1e-12));

    Prediction far = gp.predict(vec2(30.0, 30.0));
    CHECK_THAT(far.mean, WithinAbs(y1, 1e-12));
    CHECK_THAT(far.var, WithinAbs(gamma, 1e-12));
}

TEST_CASE("antisymmetric data has zero mean at the midpoint", "[gp]") {
    TrainingSet t;
    t.add(vec2(-0.5, 0.0), 1.0, 0.01);
    t.add(vec2(0.5, 0.0), -1.0, 0.01);
    FittedGp gp(t, Kernel{1.0, 1.0});
    CHECK_THAT(gp.predict(vec2(0.0, 0.0)).mean, WithinAbs(0.0, 1e-12));
    CHECK(gp.predict(vec2(-0.5, 0.0)).mean > 0.5);
}

TEST_CASE("noiseless fit interpolates the data", "[gp]") {
    RngStream rng(601, 0);
    TrainingSet t;
    std::vector<Eigen::VectorXd> xs;
    std::vector<double> ys;
    for (int i = 0; i < 8; ++i) {
        Eigen::VectorXd x = random_point(rng, 2);
        double y = std::sin(3.0 * x(0)) + x(1) * x(1);
        xs.push_back(x);
        ys.push_back(y);
        t.add(x, y, 0.0);
    }
    FittedGp gp(t, Kernel{2.0, 0.8});
    for (std::size_t i = 0; i < xs.size(); ++i) {
        Prediction p = gp.predict(xs[i]);
        CHECK_THAT(p.mean, WithinAbs(ys[i], 1e-8));
        CHECK_THAT(p.var, WithinAbs(0.0, 1e-8));
    }
}

TEST_CASE("far queries revert to the prior", "[gp]") {
    RngStream rng(602, 0);
    TrainingSet t = random_train(rng, 10, 2, 1e-3, 0.1);
    double mean_y = 0.0;
    for (double y : t.values()) mean_y += y;
    mean_y /= static_cast<double>(t.size());
    FittedGp gp(t, Kernel{1.5, 0.6});
    Prediction p = gp.predict(vec2(40.0, -40.0));
    CHECK_THAT(p.mean, WithinAbs(mean_y, 1e-6));
    CHECK_THAT(p.var, WithinAbs(1.5, 1e-6));
}

TEST_CASE("evidence matches the one-point closed form", "[gp]") {
    for (double gamma : {0.5, 2.0}) {
        for (double s2 : {0.1, 1.0}) {
            TrainingSet t;
            t.add(vec2(0.0, 0.0), 0.0, s2);
            double ev = log_evidence(t, Kernel{gamma, 1.0});
            CHECK_THAT(ev, WithinAbs(-0.5 * std::log(2.0 * M_PI * (gamma + s2)), 1e-12));
        }
    }
}

TEST_CASE("evidence gradient matches central finite differences", "[gp]") {
    RngStream rng(603, 0);
    const double h = 1e-5;
    for (int rep = 0; rep < 50; ++rep) {
        std::size_t d = 1 + static_cast<std::size_t>(rng.uniform() * 3.0);
        if (d > 3) d = 3;
        std::size_t n = 4 + static_cast<std::size_t>(rng.uniform() * 7.0);
        TrainingSet t = random_train(rng, n, d, 1e-3, 0.1);
        Kernel k{std::exp(std::log(0.2) + rng.uniform() * std::log(25.0)),
                 std::exp(std::log(0.3) + rng.uniform() * std::log(10.0))};

        Eigen::Vector2d g;
        log_evidence(t, k, &g);
        for (int axis = 0; axis < 2; ++axis) {
            auto at = [&](double delta) {
                Kernel kk = k;
                if (axis == 0)
                    kk.gamma = std::exp(std::log(k.gamma) + delta);
                else
                    kk.lambda = std::exp(std::log(k.lambda) + delta);
                return log_evidence(t, kk);
            };
            double fd = (at(h) - at(-h)) / (2.0 * h);
            double denom = std::max(std::abs(fd), 1e-3);
            CHECK(std::abs(g(axis) - fd) / denom < 1e-4);
        }
    }
}

TEST_CASE("evidence and predictions ignore input order", "[gp]") {
    RngStream rng(604, 0);
    TrainingSet fwd = random_train(rng, 9, 2, 1e-3, 0.1);
    TrainingSet rev;
    for (std::size_t i = fwd.size(); i-- > 0;)
        rev.add(fwd.points()[i], fwd.values()[i], fwd.noise_vars()[i]);
    Kernel k{1.3, 0.9};
    CHECK_THAT(log_evidence(fwd, k), WithinAbs(log_evidence(rev, k), 1e-10));
    FittedGp a(fwd, k), b(rev, k);
    for (int q = 0; q < 10; ++q) {
        Eigen::VectorXd x = random_point(rng, 2);
        CHECK_THAT(a.predict(x).mean, WithinAbs(b.predict(x).mean, 1e-10));
        CHECK_THAT(a.predict(x).var, WithinAbs(b.predict(x).var, 1e-10));
    }
}

TEST_CASE("extra data never inflates posterior variance", "[gp]") {
    RngStream rng(605, 0);
    for (int rep = 0; rep < 20; ++rep) {
        std::size_t d = 1 + static_cast<std::size_t>(rng.uniform() * 2.0);
        TrainingSet small = random_train(rng, 6, d, 1e-3, 0.05);
        TrainingSet big = small;
        big.add(random_point(rng, d), -2.0 + 4.0 * rng.uniform(), 1e-3 + 0.05 * rng.uniform());
        Kernel k{1.0, 0.8};
        FittedGp gs(small, k), gb(big, k);
        for (int q = 0; q < 20; ++q) {
            Eigen::VectorXd x = random_point(rng, d);
            double vs = gs.predict(x).var, vb = gb.predict(x).var;
            CHECK(vb <= vs + 1e-7);
            CHECK(vs >= 0.0);
            CHECK(vs <= k.gamma + 1e-9);
        }
    }
}

TEST_CASE("posterior derivatives match finite differences", "[gp]") {
    RngStream rng(606, 0);
    TrainingSet t = random_train(rng, 10, 2, 1e-3, 0.05);
    FittedGp gp(t, Kernel{1.2, 0.7});
    const double h = 1e-5;
    for (int q = 0; q < 10; ++q) {
        Eigen::VectorXd x = random_point(rng, 2);
        Eigen::VectorXd g = gp.mean_grad(x);
        Eigen::MatrixXd H = gp.mean_hessian(x);
        Eigen::VectorXd gv = gp.var_grad(x);
        for (int axis = 0; axis < 2; ++axis) {
            Eigen::VectorXd xp = x, xm = x;
            xp(axis) += h;
            xm(axis) -= h;
            double fd_mean = (gp.predict(xp).mean - gp.predict(xm).mean) / (2.0 * h);
            CHECK_THAT(g(axis), WithinAbs(fd_mean, 1e-6));
            double fd_var = (gp.predict(xp).var - gp.predict(xm).var) / (2.0 * h);
            CHECK_THAT(gv(axis), WithinAbs(fd_var, 1e-6));
            Eigen::VectorXd fd_grad = (gp.mean_grad(xp) - gp.mean_grad(xm)) / (2.0 * h);
            for (int j = 0; j < 2; ++j) CHECK_THAT(H(j, axis), WithinAbs(fd_grad(j), 1e-5));
        }
    }
}

TEST_CASE("hyperparameter search recovers a known lengthscale", "[gp]") {
    // Draw one sample path from a process with gamma=1, lambda=0.5.
    RngStream rng(607, 0);
    const std::size_t n = 60;
    std::vector<Eigen::VectorXd> xs;
    for (std::size_t i = 0; i < n; ++i) xs.push_back(random_point(rng, 2));
    Eigen::MatrixXd X(n, 2);
    for (std::size_t i = 0; i < n; ++i) X.row(i) = xs[i].transpose();
    Kernel truth{1.0, 0.5};
    Eigen::MatrixXd K(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) K(i, j) = truth(xs[i], xs[j]);
    K.diagonal().array() += 1e-8;
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    REQUIRE(llt.info() == Eigen::Success);
    Eigen::VectorXd z(n);
    for (std::size_t i = 0; i < n; ++i) z(i) = rng.normal();
    Eigen::VectorXd y = llt.matrixL() * z;

    TrainingSet t;
    for (std::size_t i = 0; i < n; ++i) t.add(xs[i], y(i), 1e-4);
    HyperFit fit = optimize_hyperparams(t, 5, 42);
    CHECK(fit.kernel.lambda > 0.25);
    CHECK(fit.kernel.lambda < 1.0);
    CHECK(std::isfinite(fit.evidence));

    // The optimum cannot fall below any of its own starting kernels; starts
    // use the stream (42, 0), two uniforms each.
    double vref = t.value_variance();
    RngStream starts(42, 0);
    for (int s = 0; s < 5; ++s) {
        double lg = std::log(vref) + std::log(0.01) + starts.uniform() * std::log(100.0 / 0.01);
        double ll = std::log(0.05) + starts.uniform() * std::log(4.0 / 0.05);
        double f0;
        try {
            f0 = log_evidence(t, Kernel{std::exp(lg), std::exp(ll)});
        } catch (const NumericsError&) {
            continue;
        }
        CHECK(fit.evidence >= f0 - 1e-9);
    }
}

TEST_CASE("constant targets drive the amplitude to its floor", "[gp]") {
    RngStream rng(608, 0);
    TrainingSet t;
    for (int i = 0; i < 6; ++i) t.add(random_point(rng, 2), 3.3, 0.01);
    HyperFit fit = optimize_hyperparams(t, 5, 7);
    CHECK(fit.kernel.gamma <= 1e-6);
    CHECK(fit.clipped);
    bool mentioned = false;
    for (const auto& w : fit.warnings) mentioned = mentioned || w.find("clipped") != std::string::npos;
    CHECK(mentioned);
}

TEST_CASE("tiny training sets carry a warning", "[gp]") {
    TrainingSet t;
    t.add(vec2(-0.3, 0.0), 1.0, 0.1);
    t.add(vec2(0.4, 0.1), 2.0, 0.1);
    HyperFit fit = optimize_hyperparams(t, 5, 1);
    REQUIRE(!fit.warnings.empty());
    CHECK(fit.warnings.front().find("fewer than 3 observations") != std::string::npos);
}

TEST_CASE("dense noiseless designs factorize within the jitter ladder", "[gp]") {
    auto pts = orthogonal_lhs(48, 2, 11);
    TrainingSet t;
    for (const auto& p : pts) t.add(p, std::sin(2.0 * p(0)) * std::cos(p(1)), 0.0);
    Kernel k{1.0, 1.0};
    FittedGp gp(t, k);
    CHECK(gp.jitter_used() <= 1e-6 * k.gamma);
    Prediction p = gp.predict(pts[0]);
    CHECK(std::isfinite(p.mean));
    CHECK(p.var >= 0.0);
}
