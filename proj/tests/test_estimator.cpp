#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "made/estimator.hpp"
#include "made/kernel.hpp"
#include "made/rng.hpp"
#include "oracles.hpp"

using namespace made;

namespace {

// Single-index Gaussian data: y = m(beta'x) + noise.
Dataset gaussian_single_index(int n, int p, const Eigen::VectorXd& beta,
                              double noise, Rng& rng) {
    Dataset data;
    data.X.resize(n, p);
    data.y.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) data.X(i, j) = rng.normal();
        const double t = beta.dot(data.X.row(i));
        data.y(i) = std::sin(1.5 * t) + 0.5 * t + noise * rng.normal();
    }
    return data;
}

WeightMatrix uniform_weights(int ne, int m) {
    WeightMatrix w;
    w.w = Eigen::MatrixXd::Constant(ne, m, 1.0 / m);
    return w;
}

}  // namespace

TEST_CASE("gaussian objective equals the weighted squared error up to a constant") {
    Rng rng(101);
    const int n = 8, p = 3, d = 1;
    const double sigma2 = 1.4;
    Dataset data = gaussian_single_index(n, p, Eigen::Vector3d(1, 0, 0), 0.3, rng);
    data.dispersion = sigma2;
    const Family g = Family::gaussian(sigma2);

    Eigen::MatrixXd B = stiefel::random_semi_orthogonal(p, d, rng);
    const auto weights = refined_weights(data.X, B, Bandwidth{1.0, 0.8});

    for (int rep = 0; rep < 5; ++rep) {
        Eigen::VectorXd a1(n), a2(n);
        Eigen::MatrixXd g1(n, d), g2(n, d);
        for (int j = 0; j < n; ++j) {
            a1(j) = rng.normal();
            a2(j) = rng.normal();
            g1(j, 0) = rng.normal();
            g2(j, 0) = rng.normal();
        }
        const auto sse = [&](const Eigen::VectorXd& a, const Eigen::MatrixXd& gm) {
            double total = 0.0;
            const Eigen::VectorXd u = data.X * B;
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    const double fitted = a(j) + gm(j, 0) * (u(i) - u(j));
                    total += weights.w(j, i) * (data.y(i) - fitted) *
                             (data.y(i) - fitted);
                }
            return total;
        };
        const double dq = objective_q(g, data, a1, g1, B, weights) -
                          objective_q(g, data, a2, g2, B, weights);
        const double dsse = sse(a1, g1) - sse(a2, g2);
        CHECK(dq == doctest::Approx(-dsse / (2.0 * sigma2)).epsilon(1e-10));
    }
}

TEST_CASE("objective at a single evaluation point reduces to local likelihood") {
    const Family poisson = Family::poisson();
    Dataset data;
    data.X.resize(1, 2);
    data.X << 0.3, -0.1;
    data.y.resize(1);
    data.y << 2.0;
    Eigen::MatrixXd B(2, 1);
    B << 1.0, 0.0;
    Eigen::VectorXd alpha(1);
    alpha << 0.4;
    Eigen::MatrixXd gamma(1, 1);
    gamma << 0.9;
    const double q =
        objective_q(poisson, data, alpha, gamma, B, uniform_weights(1, 1));
    CHECK(q == doctest::Approx(poisson.loglik(2.0, 0.4, 1.0)).epsilon(1e-12));
}

TEST_CASE("intercept-only poisson objective matches the weighted likelihood") {
    const Family poisson = Family::poisson();
    Dataset data;
    const int n = 5;
    data.X = Eigen::MatrixXd::Zero(n, 2);
    data.y.resize(n);
    data.y << 1, 0, 2, 3, 1;
    data.eval = {0};
    Eigen::MatrixXd B(2, 1);
    B << 0.0, 1.0;
    Eigen::VectorXd alpha(1);
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(1, 1);
    const double ybar = data.y.mean();
    alpha << std::log(ybar);
    const double q =
        objective_q(poisson, data, alpha, gamma, B, uniform_weights(1, n));
    double expected = 0.0;
    for (int i = 0; i < n; ++i)
        expected += poisson.loglik(data.y(i), std::log(ybar), 1.0) / n;
    CHECK(q == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("domain violations yield the rejection sentinel") {
    const Family expf = Family::exponential();
    Dataset data;
    data.X.resize(2, 1);
    data.X << 0.0, 1.0;
    data.y.resize(2);
    data.y << 1.0, 2.0;
    Eigen::MatrixXd B(1, 1);
    B << 1.0;
    Eigen::VectorXd alpha(2);
    alpha << 0.5, -1.0;  // first intercept leaves the domain
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(2, 1);
    const double q =
        objective_q(expf, data, alpha, gamma, B, uniform_weights(2, 2));
    CHECK(q == -std::numeric_limits<double>::infinity());
}

TEST_CASE("gradient vanishes when all slopes are zero") {
    Rng rng(7);
    Dataset data = gaussian_single_index(6, 3, Eigen::Vector3d(0, 1, 0), 0.2, rng);
    const Family g = Family::gaussian(1.0);
    Eigen::MatrixXd B = stiefel::random_semi_orthogonal(3, 2, rng);
    Eigen::VectorXd alpha = Eigen::VectorXd::Random(6);
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(6, 2);
    const auto w = refined_weights(data.X, B, Bandwidth{1.0, 1.0});
    CHECK(gradient_q_wrt_b(g, data, alpha, gamma, B, w).norm() == 0.0);
}

TEST_CASE("gradient vanishes at a saturated gaussian fit") {
    // Responses linear in x: alpha_j, gamma_j chosen to interpolate exactly.
    const Family g = Family::gaussian(1.0);
    Rng rng(8);
    const int n = 7, p = 2;
    Dataset data;
    data.X.resize(n, p);
    data.y.resize(n);
    Eigen::Vector2d coef(0.7, -0.4);
    for (int i = 0; i < n; ++i) {
        data.X(i, 0) = rng.normal();
        data.X(i, 1) = rng.normal();
        data.y(i) = coef.dot(data.X.row(i));
    }
    Eigen::MatrixXd B(p, 1);
    B << 1.0, 0.0;
    // theta_ij = alpha_j + gamma_j (x_i1 - x_j1) must equal y_i: only exact
    // when the response depends on the first coordinate alone.
    data.y = data.X.col(0) * 2.5;
    Eigen::VectorXd alpha = data.y;
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Constant(n, 1, 2.5);
    const auto w = refined_weights(data.X, B, Bandwidth{1.0, 0.9});
    CHECK(gradient_q_wrt_b(g, data, alpha, gamma, B, w).norm() < 1e-12);
}

TEST_CASE("gradient matches finite differences with weights frozen") {
    Rng rng(9);
    for (const std::string fam : {"gaussian", "poisson", "binomial"}) {
        const Family family = Family::from_name(fam);
        const int n = 6, p = 3, d = 1;
        Dataset data;
        data.X.resize(n, p);
        data.y.resize(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < p; ++j) data.X(i, j) = rng.normal();
            const double t = data.X(i, 0);
            const double mu = family.name() == FamilyName::Gaussian
                                  ? t
                                  : (family.name() == FamilyName::Poisson
                                         ? std::exp(0.5 * t)
                                         : 1.0 / (1.0 + std::exp(-t)));
            data.y(i) = family.sample(family.link(family.clamp_mean(mu)), 1.0,
                                      1.0, rng);
        }
        Eigen::MatrixXd B = stiefel::random_semi_orthogonal(p, d, rng);
        Eigen::VectorXd alpha(n);
        Eigen::MatrixXd gamma(n, d);
        for (int j = 0; j < n; ++j) {
            alpha(j) = family.link(family.clamp_mean(
                std::max(0.3, static_cast<double>(data.y.mean()))));
            gamma(j, 0) = 0.2 * rng.normal();
        }
        const auto w = refined_weights(data.X, B, Bandwidth{1.0, 0.8});
        const Eigen::MatrixXd grad =
            gradient_q_wrt_b(family, data, alpha, gamma, B, w);
        const Eigen::MatrixXd fd = oracles::central_diff_matrix(
            [&](const Eigen::MatrixXd& Bc) {
                return objective_q(family, data, alpha, gamma, Bc, w);
            },
            B, 1e-5);
        CHECK((grad - fd).norm() < 1e-6 * (1.0 + grad.norm()));
    }
}

TEST_CASE("pfc initializer") {
    SUBCASE("finds the signal coordinate") {
        Rng rng(10);
        const int n = 500, p = 4;
        Dataset data;
        data.X.resize(n, p);
        data.y.resize(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < p; ++j) data.X(i, j) = rng.normal();
            data.y(i) = 2.0 * data.X(i, 1) + 0.2 * rng.normal();
        }
        const PfcInit init = init_pfc(data, 1);
        CHECK_FALSE(init.degenerate);
        const double cosang = std::fabs(init.B(1, 0));
        CHECK(cosang > std::cos(10.0 * M_PI / 180.0));
    }
    SUBCASE("constant response falls back to the uniform direction") {
        Dataset data;
        data.X = Eigen::MatrixXd::Random(20, 3);
        data.y = Eigen::VectorXd::Constant(20, 0.0);
        const PfcInit init = init_pfc(data, 1);
        CHECK(init.degenerate);
        CHECK((init.B.transpose() * init.B -
               Eigen::MatrixXd::Identity(1, 1))
                  .norm() < 1e-12);
    }
    SUBCASE("output is orthonormal") {
        Rng rng(12);
        Dataset data = gaussian_single_index(60, 5, Eigen::VectorXd::Unit(5, 2),
                                             0.4, rng);
        const PfcInit init = init_pfc(data, 2);
        CHECK((init.B.transpose() * init.B - Eigen::MatrixXd::Identity(2, 2))
                  .norm() < 1e-12);
    }
}

TEST_CASE("subspace distance") {
    Eigen::MatrixXd B1(2, 1), B2(2, 1);
    B1 << 1.0, 0.0;
    B2 << 0.0, 1.0;
    CHECK(subspace_distance(B1, B1) == doctest::Approx(0.0));
    CHECK(subspace_distance(B1, B2) == doctest::Approx(1.0));

    Rng rng(13);
    const Eigen::MatrixXd B = stiefel::random_semi_orthogonal(5, 2, rng);
    const Eigen::MatrixXd Bh = stiefel::random_semi_orthogonal(5, 2, rng);
    Eigen::MatrixXd O(2, 2);
    const double ang = 1.1;
    O << std::cos(ang), -std::sin(ang), std::sin(ang), std::cos(ang);
    CHECK(subspace_distance(B, Bh) ==
          doctest::Approx(subspace_distance(B, Bh * O)).epsilon(1e-12));
    CHECK(subspace_distance(B, Bh) <= std::sqrt(2.0) + 1e-12);
}

TEST_CASE("dispersion estimation") {
    const Family g = Family::gaussian(1.0);
    Dataset data;
    data.X = Eigen::MatrixXd::Zero(2, 1);
    data.y.resize(2);
    data.y << 1.0, -1.0;
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(2);
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(2, 1);
    Eigen::MatrixXd B(1, 1);
    B << 1.0;
    const auto w = uniform_weights(2, 2);
    CHECK(estimate_dispersion(g, data, alpha, gamma, B, w) == doctest::Approx(1.0));

    data.y << 0.0, 0.0;
    CHECK(estimate_dispersion(g, data, alpha, gamma, B, w) ==
          doctest::Approx(1e-12));

    Dataset d4;
    d4.X = Eigen::MatrixXd::Zero(4, 1);
    d4.y.resize(4);
    d4.y << 0.1, 0.2, 0.3, 0.4;
    Eigen::VectorXd a4 = Eigen::VectorXd::Zero(4);
    Eigen::MatrixXd g4 = Eigen::MatrixXd::Zero(4, 1);
    CHECK(estimate_dispersion(g, d4, a4, g4, B, uniform_weights(4, 4)) ==
          doctest::Approx(0.075).epsilon(1e-12));
}

TEST_CASE("generic dispersion step maximizes the objective for gamma data") {
    Rng rng(14);
    const double kappa_true = 3.0;
    const Family fam = Family::gamma(kappa_true);
    const int n = 120;
    Dataset data;
    data.X = Eigen::MatrixXd::Zero(n, 1);
    data.y.resize(n);
    for (int i = 0; i < n; ++i)
        data.y(i) = rng.gamma(kappa_true, kappa_true / 2.0);  // mean 2
    data.dispersion = 1.0 / kappa_true;
    Eigen::VectorXd alpha =
        Eigen::VectorXd::Constant(n, fam.link(data.y.mean()));
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(n, 1);
    Eigen::MatrixXd B(1, 1);
    B << 1.0;
    const double phi_hat =
        estimate_dispersion(fam, data, alpha, gamma, B, uniform_weights(n, n));
    // The profile optimum should beat nearby dispersions.
    const auto q_at = [&](double phi) {
        Dataset tmp = data;
        tmp.dispersion = phi;
        return objective_q(fam, tmp, alpha, gamma, B, uniform_weights(n, n));
    };
    CHECK(q_at(phi_hat) >= q_at(phi_hat * 1.3) - 1e-9);
    CHECK(q_at(phi_hat) >= q_at(phi_hat / 1.3) - 1e-9);
    CHECK(phi_hat == doctest::Approx(1.0 / kappa_true).epsilon(0.5));
}

TEST_CASE("fit alternation") {
    Rng rng(20260601);
    Eigen::VectorXd beta(4);
    beta << 2, -1, 0.5, 1;
    beta.normalize();
    Dataset data = gaussian_single_index(80, 4, beta, 0.1, rng);
    const Family g = Family::gaussian(1.0);

    MadeConfig config;
    config.d = 1;
    config.bandwidth_c = 1.5;
    config.outer_max_iter = 25;

    SUBCASE("recovers the single index direction") {
        const MadeFit fit = made::fit(g, data, config);
        CHECK(subspace_distance(beta, fit.B) < 0.2);
        CHECK((fit.B.transpose() * fit.B - Eigen::MatrixXd::Identity(1, 1))
                  .norm() < 1e-10);
    }

    SUBCASE("coefficient and basis steps are monotone within an iteration") {
        const MadeFit fit = made::fit(g, data, config);
        for (std::size_t k = 0; k + 1 < fit.trace.size(); ++k) {
            if (fit.trace[k].phase == 'x' && fit.trace[k + 1].phase == 'B' &&
                fit.trace[k].iteration == fit.trace[k + 1].iteration)
                CHECK(fit.trace[k + 1].objective >=
                      fit.trace[k].objective - 1e-8);
        }
    }

    SUBCASE("raw-weight objective trace is globally non-decreasing") {
        MadeConfig raw = config;
        raw.weight_mode = WeightMode::Raw;
        const MadeFit fit = made::fit(g, data, raw);
        for (std::size_t k = 1; k < fit.trace.size(); ++k)
            CHECK(fit.trace[k].objective >= fit.trace[k - 1].objective - 1e-8);
    }

    SUBCASE("row permutation leaves the objective unchanged") {
        const MadeFit fit = made::fit(g, data, config);
        std::vector<int> perm(data.n());
        for (int i = 0; i < data.n(); ++i) perm[i] = (i * 37 + 11) % data.n();
        const Dataset shuffled = data.subset(perm);
        const MadeFit fit2 = made::fit(g, shuffled, config);
        CHECK(fit.objective == doctest::Approx(fit2.objective).epsilon(1e-8));
    }

    SUBCASE("parallel and sequential coefficient passes agree bitwise") {
        MadeConfig seq = config;
        seq.threads = 1;
        MadeConfig par = config;
        par.threads = 4;
        const MadeFit f1 = made::fit(g, data, seq);
        const MadeFit f2 = made::fit(g, data, par);
        CHECK((f1.alpha - f2.alpha).lpNorm<Eigen::Infinity>() == 0.0);
        CHECK((f1.gamma - f2.gamma).lpNorm<Eigen::Infinity>() == 0.0);
        CHECK((f1.B - f2.B).lpNorm<Eigen::Infinity>() == 0.0);
    }

    SUBCASE("full dimension keeps the identity projection") {
        MadeConfig full = config;
        full.d = 4;
        full.outer_max_iter = 4;
        const MadeFit fit = made::fit(g, data, full);
        CHECK((fit.B * fit.B.transpose() - Eigen::MatrixXd::Identity(4, 4))
                  .norm() < 1e-9);
        CHECK(subspace_distance(beta, fit.B) < 1e-9);
    }

    SUBCASE("intercept-only dimension zero fit") {
        MadeConfig zero = config;
        zero.d = 0;
        const MadeFit fit = made::fit(g, data, zero);
        CHECK(fit.converged);
        CHECK(fit.B.cols() == 0);
        CHECK(fit.gamma.cols() == 0);
        CHECK(fit.alpha.allFinite());
    }
}

TEST_CASE("objective is invariant to orthogonal rotation of the basis") {
    Rng rng(15);
    const int n = 10, p = 4, d = 2;
    Dataset data = gaussian_single_index(n, p, Eigen::VectorXd::Unit(p, 0), 0.3, rng);
    const Family g = Family::gaussian(1.0);
    const Eigen::MatrixXd B = stiefel::random_semi_orthogonal(p, d, rng);
    Eigen::VectorXd alpha = Eigen::VectorXd::Random(n);
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Random(n, d);
    const double ang = 0.9;
    Eigen::MatrixXd O(2, 2);
    O << std::cos(ang), -std::sin(ang), std::sin(ang), std::cos(ang);

    const auto w1 = refined_weights(data.X, B, Bandwidth{1.0, 0.9});
    const auto w2 = refined_weights(data.X, B * O, Bandwidth{1.0, 0.9});
    const double q1 = objective_q(g, data, alpha, gamma, B, w1);
    const double q2 =
        objective_q(g, data, alpha, (gamma * O).eval(), B * O, w2);
    CHECK(q1 == doctest::Approx(q2).epsilon(1e-8));
}

TEST_CASE("estimated dispersion tracks the truth for gaussian data") {
    Rng rng(16);
    Eigen::VectorXd beta(3);
    beta << 1, 1, 1;
    beta.normalize();
    const double sigma = 0.4;
    Dataset data = gaussian_single_index(150, 3, beta, sigma, rng);
    MadeConfig config;
    config.d = 1;
    config.dispersion_mode = DispersionMode::Estimate;
    config.outer_max_iter = 15;
    const MadeFit fit = made::fit(Family::gaussian(1.0), data, config);
    CHECK(fit.dispersion > 0.5 * sigma * sigma);
    CHECK(fit.dispersion < 3.0 * sigma * sigma);
}
