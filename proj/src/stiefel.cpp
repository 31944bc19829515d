#include "made/stiefel.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "made/errors.hpp"

namespace made::stiefel {

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& A) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n) throw NumericalError("matrix_exponential: square input required");
    if (n == 0) return A;
    if (n == 1) {
        Eigen::MatrixXd r(1, 1);
        r(0, 0) = std::exp(A(0, 0));
        return r;
    }

    static const double b[] = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0,  129060195264000.0,   10559470521600.0,
        670442572800.0,      33522128640.0,       1323241920.0,
        40840800.0,          960960.0,            16380.0,
        182.0,               1.0};
    const double theta13 = 5.371920351148152;

    const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > theta13)
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    const Eigen::MatrixXd As = A / std::ldexp(1.0, squarings);

    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd A2 = As * As;
    const Eigen::MatrixXd A4 = A2 * A2;
    const Eigen::MatrixXd A6 = A2 * A4;
    const Eigen::MatrixXd U =
        As * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 +
              b[5] * A4 + b[3] * A2 + b[1] * I);
    const Eigen::MatrixXd V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) +
                              b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;

    Eigen::MatrixXd F = (V - U).partialPivLu().solve(V + U);
    for (int s = 0; s < squarings; ++s) F = F * F;
    return F;
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& B) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(B);
    Eigen::MatrixXd Q =
        qr.householderQ() * Eigen::MatrixXd::Identity(B.rows(), B.cols());
    const Eigen::MatrixXd R =
        qr.matrixQR().topRows(B.cols()).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < B.cols(); ++j)
        if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
    return Q;
}

Eigen::MatrixXd random_semi_orthogonal(int p, int d, Rng& rng) {
    Eigen::MatrixXd G(p, d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < p; ++i) G(i, j) = rng.normal();
    return orthonormalize(G);
}

Eigen::MatrixXd canonical_gradient(const Eigen::MatrixXd& FB,
                                   const Eigen::MatrixXd& B) {
    return FB - B * FB.transpose() * B;
}

double canonical_inner(const Eigen::MatrixXd& B, const Eigen::MatrixXd& D1,
                       const Eigen::MatrixXd& D2) {
    return (D1.array() * D2.array()).sum() -
           0.5 * ((B.transpose() * D1).array() * (B.transpose() * D2).array()).sum();
}

double tangent_norm_sq(const Eigen::MatrixXd& B, const Eigen::MatrixXd& H) {
    const Eigen::MatrixXd A = B.transpose() * H;
    return H.squaredNorm() - 0.5 * A.squaredNorm();
}

Geodesic make_geodesic(const Eigen::MatrixXd& B, const Eigen::MatrixXd& H) {
    Geodesic geo;
    const Eigen::MatrixXd BtH = B.transpose() * H;
    geo.A = 0.5 * (BtH - BtH.transpose());
    const Eigen::MatrixXd K = H - B * BtH;  // (I - BB')H
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(K);
    geo.Q = qr.householderQ() * Eigen::MatrixXd::Identity(K.rows(), K.cols());
    geo.R = qr.matrixQR().topRows(K.cols()).triangularView<Eigen::Upper>();
    return geo;
}

GeodesicPoint geodesic_step(const Eigen::MatrixXd& B, const Geodesic& geo,
                            double t) {
    const Eigen::Index d = B.cols();
    Eigen::MatrixXd block(2 * d, 2 * d);
    block.topLeftCorner(d, d) = geo.A;
    block.topRightCorner(d, d) = -geo.R.transpose();
    block.bottomLeftCorner(d, d) = geo.R;
    block.bottomRightCorner(d, d).setZero();

    const Eigen::MatrixXd E = matrix_exponential(t * block);
    GeodesicPoint point;
    point.M = E.topLeftCorner(d, d);
    point.N = E.bottomLeftCorner(d, d);
    point.B = B * point.M + geo.Q * point.N;
    return point;
}

Eigen::MatrixXd parallel_transport(const Eigen::MatrixXd& H,
                                   const Eigen::MatrixXd& B, const Geodesic& geo,
                                   const GeodesicPoint& point) {
    return H * point.M - B * geo.R.transpose() * point.N;
}

LineSearchResult line_search(const std::function<double(double)>& value_at,
                             double f0, double window,
                             const LineSearchOptions& options) {
    LineSearchResult result;
    result.value = f0;
    if (!(window > 0.0) || !std::isfinite(window)) {
        result.stalled = true;
        return result;
    }

    const double invphi = 0.6180339887498949;
    double w = window;
    for (int shrink = 0; shrink <= options.max_shrinks; ++shrink, w *= 0.5) {
        double lo = 0.0, hi = w;
        double best_t = 0.0, best_f = f0;
        bool moved = false;  // any probe distinguishable from f0
        const auto probe = [&](double t) {
            const double f = value_at(t);
            ++result.evaluations;
            if (f != f0) moved = true;
            if (f > best_f) {
                best_f = f;
                best_t = t;
            }
            return f;
        };
        double c = hi - invphi * (hi - lo);
        double d = lo + invphi * (hi - lo);
        double fc = probe(c);
        double fd = probe(d);
        for (int it = 0; it < options.iterations; ++it) {
            if (fc > fd) {
                hi = d;
                d = c;
                fd = fc;
                c = hi - invphi * (hi - lo);
                fc = probe(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + invphi * (hi - lo);
                fd = probe(d);
            }
        }
        if (best_f > f0 && best_t > 0.0) {
            result.t = best_t;
            result.value = best_f;
            return result;
        }
        // A window in which every probe matched f0 exactly is numerically
        // flat; smaller windows cannot do better.
        if (!moved) break;
    }
    result.stalled = true;
    return result;
}

CgResult cg_maximize(const Objective& objective, const Eigen::MatrixXd& B0,
                     const CgOptions& options) {
    const Eigen::Index p = B0.rows();
    const Eigen::Index d = B0.cols();

    const auto safe_value = [&](const Eigen::MatrixXd& B) {
        const double v = objective.value(B);
        return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
    };
    const auto orth_error = [](const Eigen::MatrixXd& M) {
        return (M.transpose() * M -
                Eigen::MatrixXd::Identity(M.cols(), M.cols()))
            .norm();
    };

    CgResult result;
    Eigen::MatrixXd B = orthonormalize(B0);
    double q = safe_value(B);
    Eigen::MatrixXd G = canonical_gradient(-objective.gradient(B), B);
    Eigen::MatrixXd H = -G;
    bool steepest = true;

    const int reset_period =
        std::max<int>(1, static_cast<int>(d * (p - d) + d * (d - 1) / 2));

    int k = 0;
    while (k < options.max_iter) {
        const double stat = tangent_norm_sq(B, G);
        result.trace.push_back({k, q, stat, 0.0, orth_error(B)});
        if (stat < options.tol) {
            result.converged = true;
            break;
        }

        // The recursion minimizes F = -Q, so H = -grad F is an ascent
        // direction of Q; search t >= 0 along the geodesic through B.
        const double hnorm = std::sqrt(std::max(0.0, tangent_norm_sq(B, H)));
        bool advanced = false;
        if (hnorm > 0.0) {
            const Geodesic geo = make_geodesic(B, H);
            const auto q_at = [&](double t) {
                return safe_value(geodesic_step(B, geo, t).B);
            };
            const LineSearchResult ls =
                line_search(q_at, q, 1.0 / hnorm, options.line_search);
            if (!ls.stalled) {
                const GeodesicPoint point = geodesic_step(B, geo, ls.t);
                const Eigen::MatrixXd B_next = orthonormalize(point.B);
                const double q_next = safe_value(B_next);
                if (q_next > q) {
                    const Eigen::MatrixXd G_next =
                        canonical_gradient(-objective.gradient(B_next), B_next);
                    const Eigen::MatrixXd tauH =
                        parallel_transport(H, B, geo, point);
                    const double denom = canonical_inner(B, G, G);
                    const double gamma =
                        denom > 0.0
                            ? canonical_inner(B_next, G_next - G, G_next) / denom
                            : 0.0;
                    if ((k + 1) % reset_period == 0) {
                        H = -G_next;
                        steepest = true;
                    } else {
                        H = -G_next + gamma * tauH;
                        steepest = false;
                    }
                    B = B_next;
                    q = q_next;
                    G = G_next;
                    result.trace.back().step = ls.t;
                    advanced = true;
                    ++k;
                }
            }
        }
        if (!advanced) {
            if (steepest) break;  // steepest ascent itself made no progress
            // Stalled conjugate direction: reset and retry from -G.
            H = -G;
            steepest = true;
            result.trace.pop_back();
        }
    }

    result.B = B;
    result.objective = q;
    result.iterations = k;
    if (result.trace.empty() || result.trace.back().iteration != k)
        result.trace.push_back({k, q, tangent_norm_sq(B, G), 0.0, orth_error(B)});
    return result;
}

}  // namespace made::stiefel
