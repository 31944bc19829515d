#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "made/estimator.hpp"
#include "made/rng.hpp"
#include "made/stiefel.hpp"

using namespace made::stiefel;
using made::Rng;

namespace {

Eigen::MatrixXd random_tangent(const Eigen::MatrixXd& B, Rng& rng) {
    Eigen::MatrixXd V(B.rows(), B.cols());
    for (int i = 0; i < V.rows(); ++i)
        for (int j = 0; j < V.cols(); ++j) V(i, j) = rng.normal();
    // Project: H = V - B sym(B'V).
    const Eigen::MatrixXd BtV = B.transpose() * V;
    return V - B * 0.5 * (BtV + BtV.transpose());
}

}  // namespace

TEST_CASE("matrix exponential matches scalar and rotation cases") {
    Eigen::MatrixXd a(1, 1);
    a << 0.37;
    CHECK(matrix_exponential(a)(0, 0) == doctest::Approx(std::exp(0.37)));

    Eigen::MatrixXd skew(2, 2);
    const double t = 1.234;
    skew << 0.0, -t, t, 0.0;
    const Eigen::MatrixXd R = matrix_exponential(skew);
    CHECK(R(0, 0) == doctest::Approx(std::cos(t)).epsilon(1e-13));
    CHECK(R(1, 0) == doctest::Approx(std::sin(t)).epsilon(1e-13));

    // exp(A) exp(-A) = I for a larger random matrix (exercises squaring).
    Rng rng(7);
    Eigen::MatrixXd M(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) M(i, j) = 2.5 * rng.normal();
    const Eigen::MatrixXd E = matrix_exponential(M);
    const Eigen::MatrixXd Einv = matrix_exponential(Eigen::MatrixXd(-M));
    CHECK((E * Einv - Eigen::MatrixXd::Identity(6, 6)).norm() < 1e-10);
}

TEST_CASE("canonical gradient is tangent") {
    SUBCASE("gradient of the squared norm vanishes on the manifold") {
        Rng rng(11);
        const Eigen::MatrixXd B = random_semi_orthogonal(5, 2, rng);
        CHECK(canonical_gradient(B, B).norm() < 1e-12);
    }
    SUBCASE("hand-computed two-by-one case") {
        Eigen::MatrixXd B(2, 1), FB(2, 1);
        B << 1.0, 0.0;
        FB << 3.0, 4.0;
        const Eigen::MatrixXd G = canonical_gradient(FB, B);
        CHECK(G(0, 0) == doctest::Approx(0.0));
        CHECK(G(1, 0) == doctest::Approx(4.0));
    }
    SUBCASE("B'G is skew-symmetric") {
        Rng rng(13);
        const Eigen::MatrixXd B = random_semi_orthogonal(6, 3, rng);
        Eigen::MatrixXd FB(6, 3);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 3; ++j) FB(i, j) = rng.normal();
        const Eigen::MatrixXd G = canonical_gradient(FB, B);
        const Eigen::MatrixXd S = B.transpose() * G;
        CHECK((S + S.transpose()).norm() < 1e-12);
    }
}

TEST_CASE("tangent norm") {
    Rng rng(17);
    const Eigen::MatrixXd B = random_semi_orthogonal(4, 2, rng);
    CHECK(tangent_norm_sq(B, Eigen::MatrixXd::Zero(4, 2)) == doctest::Approx(0.0));

    // Horizontal direction: B'H = 0, norm reduces to the Frobenius norm.
    Eigen::MatrixXd H = random_tangent(B, rng);
    H -= B * (B.transpose() * H);  // strip the vertical part entirely
    CHECK(tangent_norm_sq(B, H) == doctest::Approx(H.squaredNorm()));

    Eigen::MatrixXd B1(2, 1), H1(2, 1);
    B1 << 1.0, 0.0;
    H1 << 0.0, 2.0;
    CHECK(tangent_norm_sq(B1, H1) == doctest::Approx(4.0));
}

TEST_CASE("geodesic steps stay on the manifold") {
    SUBCASE("zero step is the identity") {
        Rng rng(19);
        const Eigen::MatrixXd B = random_semi_orthogonal(5, 2, rng);
        const Eigen::MatrixXd H = random_tangent(B, rng);
        const Geodesic geo = make_geodesic(B, H);
        const GeodesicPoint point = geodesic_step(B, geo, 0.0);
        CHECK((point.B - B).norm() < 1e-14);
        CHECK((point.M - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-14);
        CHECK(point.N.norm() < 1e-14);
    }
    SUBCASE("two-by-one geodesic is the circle") {
        Eigen::MatrixXd B(2, 1), H(2, 1);
        B << 1.0, 0.0;
        H << 0.0, 1.0;
        const Geodesic geo = make_geodesic(B, H);
        for (const double t : {0.3, 1.0, 2.5}) {
            const GeodesicPoint point = geodesic_step(B, geo, t);
            CHECK(point.B(0, 0) == doctest::Approx(std::cos(t)).epsilon(1e-13));
            CHECK(point.B(1, 0) == doctest::Approx(std::sin(t)).epsilon(1e-13));
        }
    }
    SUBCASE("orthonormality along random geodesics") {
        Rng rng(23);
        for (int rep = 0; rep < 20; ++rep) {
            const Eigen::MatrixXd B = random_semi_orthogonal(6, 2, rng);
            const Eigen::MatrixXd H = random_tangent(B, rng);
            const Geodesic geo = make_geodesic(B, H);
            const GeodesicPoint point = geodesic_step(B, geo, rng.uniform(0.0, 3.0));
            CHECK((point.B.transpose() * point.B -
                   Eigen::MatrixXd::Identity(2, 2))
                      .norm() < 1e-10);
        }
    }
    SUBCASE("steps compose in the one-column case") {
        Rng rng(29);
        const Eigen::MatrixXd B = random_semi_orthogonal(5, 1, rng);
        Eigen::MatrixXd H = random_tangent(B, rng);
        H /= std::sqrt(tangent_norm_sq(B, H));
        const double s = 0.4, t = 0.9;
        const Geodesic geo = make_geodesic(B, H);
        const Eigen::MatrixXd Bst = geodesic_step(B, geo, s + t).B;
        // Step to B(s), transport H, then step the rest of the way.
        const GeodesicPoint mid = geodesic_step(B, geo, s);
        const Eigen::MatrixXd Hs = parallel_transport(H, B, geo, mid);
        const Geodesic geo2 = make_geodesic(mid.B, Hs);
        const Eigen::MatrixXd Bst2 = geodesic_step(mid.B, geo2, t).B;
        CHECK((Bst - Bst2).norm() < 1e-10);
    }
}

TEST_CASE("parallel transport") {
    Rng rng(31);
    const Eigen::MatrixXd B = random_semi_orthogonal(5, 2, rng);
    const Eigen::MatrixXd H = random_tangent(B, rng);
    const Geodesic geo = make_geodesic(B, H);

    SUBCASE("zero step is the identity") {
        const GeodesicPoint point = geodesic_step(B, geo, 0.0);
        CHECK((parallel_transport(H, B, geo, point) - H).norm() < 1e-12);
    }
    SUBCASE("transported vector stays tangent") {
        const GeodesicPoint point = geodesic_step(B, geo, 0.8);
        const Eigen::MatrixXd tH = parallel_transport(H, B, geo, point);
        const Eigen::MatrixXd S = point.B.transpose() * tH;
        CHECK((S + S.transpose()).norm() < 1e-8);
    }
    SUBCASE("transport preserves length on the circle") {
        Eigen::MatrixXd B1(2, 1), H1(2, 1);
        B1 << 1.0, 0.0;
        H1 << 0.0, 1.0;
        const Geodesic geo1 = make_geodesic(B1, H1);
        const GeodesicPoint point = geodesic_step(B1, geo1, 1.1);
        const Eigen::MatrixXd tH = parallel_transport(H1, B1, geo1, point);
        CHECK(tH.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("line search maximizes along the geodesic") {
    SUBCASE("recovers the analytic maximizer of a trig objective") {
        // Q(B(t)) = cos t * a + sin t * b has maximizer atan2(b, a).
        const double a = 0.8, b = 1.7;
        const auto value_at = [&](double t) {
            return a * std::cos(t) + b * std::sin(t);
        };
        const double t_star = std::atan2(b, a);
        LineSearchOptions opts;
        opts.iterations = 40;
        const LineSearchResult ls = line_search(value_at, value_at(0.0), 2.0, opts);
        CHECK_FALSE(ls.stalled);
        CHECK(std::fabs(ls.t - t_star) < 1e-4);
    }
    SUBCASE("constant objective stalls") {
        const LineSearchResult ls =
            line_search([](double) { return 1.0; }, 1.0, 1.0, LineSearchOptions{});
        CHECK(ls.stalled);
        CHECK(ls.t == 0.0);
    }
    SUBCASE("accepted step improves the objective") {
        const auto value_at = [](double t) { return -(t - 0.3) * (t - 0.3); };
        const LineSearchResult ls =
            line_search(value_at, value_at(0.0), 5.0, LineSearchOptions{});
        CHECK_FALSE(ls.stalled);
        CHECK(ls.value > value_at(0.0));
    }
}

TEST_CASE("conjugate gradient on the rayleigh quotient finds the top eigenspace") {
    Rng rng(20260101);
    const int p = 5, d = 2;
    Eigen::MatrixXd S(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j <= i; ++j) S(i, j) = S(j, i) = rng.normal();
    S += p * Eigen::MatrixXd::Identity(p, p);  // keep it well conditioned

    Objective obj;
    obj.value = [&](const Eigen::MatrixXd& B) {
        return (B.transpose() * S * B).trace();
    };
    obj.gradient = [&](const Eigen::MatrixXd& B) { return 2.0 * S * B; };

    const Eigen::MatrixXd B0 = random_semi_orthogonal(p, d, rng);
    CgOptions opts;
    opts.tol = 1e-12;
    const CgResult res = cg_maximize(obj, B0, opts);
    CHECK(res.converged);

    // Oracle: eigen-decomposition.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
    Eigen::MatrixXd top(p, d);
    top.col(0) = eig.eigenvectors().col(p - 1);
    top.col(1) = eig.eigenvectors().col(p - 2);
    CHECK(made::subspace_distance(top, res.B) < 1e-6);

    for (const auto& row : res.trace) CHECK(row.orth_error < 1e-10);
    for (std::size_t k = 1; k < res.trace.size(); ++k)
        CHECK(res.trace[k].objective >= res.trace[k - 1].objective - 1e-10);
}

TEST_CASE("conjugate gradient solves the procrustes problem") {
    // max tr(B'Y) over St(d, p) has optimum at B = U V' with value sum of
    // singular values (SVD oracle).
    Rng rng(4242);
    const int p = 6, d = 2;
    Eigen::MatrixXd Y(p, d);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < d; ++j) Y(i, j) = rng.normal();

    Objective obj;
    obj.value = [&](const Eigen::MatrixXd& B) {
        return (B.array() * Y.array()).sum();
    };
    obj.gradient = [&](const Eigen::MatrixXd&) { return Y; };

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Y, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double best = svd.singularValues().sum();

    CgOptions opts;
    opts.tol = 1e-12;
    const CgResult res = cg_maximize(obj, random_semi_orthogonal(p, d, rng), opts);
    CHECK(res.converged);
    CHECK(std::fabs(res.objective - best) < 1e-8);
}

TEST_CASE("stationary start returns immediately") {
    // Rayleigh quotient started exactly at the dominant eigenbasis.
    Rng rng(77);
    const int p = 4, d = 1;
    Eigen::MatrixXd S(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j <= i; ++j) S(i, j) = S(j, i) = rng.normal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
    Eigen::MatrixXd B0 = eig.eigenvectors().col(p - 1);

    Objective obj;
    obj.value = [&](const Eigen::MatrixXd& B) {
        return (B.transpose() * S * B).trace();
    };
    obj.gradient = [&](const Eigen::MatrixXd& B) { return 2.0 * S * B; };
    const CgResult res = cg_maximize(obj, B0, CgOptions{});
    CHECK(res.converged);
    CHECK(res.iterations == 0);
}
