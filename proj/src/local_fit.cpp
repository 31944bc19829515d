#include "made/local_fit.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

namespace made {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kThetaMargin = 1e-10;
}

Eigen::ArrayXd local_theta(const Family& family, const LocalDesign& design,
                           const Eigen::VectorXd& xi, bool* clamped) {
    Eigen::ArrayXd theta = (design.Z * xi + design.offset).array();
    const double sup = family.theta_sup();
    if (std::isfinite(sup)) {
        const double cap = sup - kThetaMargin;
        const bool any = (theta > cap).any();
        if (any) theta = theta.min(cap);
        if (clamped) *clamped = any;
    } else if (clamped) {
        *clamped = false;
    }
    return theta;
}

double local_loglik(const Family& family, const LocalDesign& design,
                    const Eigen::VectorXd& xi) {
    const Eigen::ArrayXd theta = local_theta(family, design, xi);
    const Eigen::ArrayXd b = family.b(theta);
    const double value =
        (design.w.array() * (design.ym.array() * theta - b) * design.inv_a.array())
            .sum() +
        design.wlogf0;
    return std::isfinite(value) ? value : kNegInf;
}

Eigen::VectorXd local_score(const Family& family, const LocalDesign& design,
                            const Eigen::VectorXd& xi) {
    const Eigen::ArrayXd theta = local_theta(family, design, xi);
    const Eigen::ArrayXd resid =
        design.w.array() * (design.ym.array() - family.mean(theta)) *
        design.inv_a.array();
    return design.Z.transpose() * resid.matrix();
}

Eigen::MatrixXd local_jacobian(const Family& family, const LocalDesign& design,
                               const Eigen::VectorXd& xi) {
    const Eigen::ArrayXd theta = local_theta(family, design, xi);
    Eigen::ArrayXd curv(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i)
        curv(i) = family.variance_scale(theta(i));
    curv *= design.w.array() * design.inv_a.array();
    return -(design.Z.transpose() * curv.matrix().asDiagonal() * design.Z);
}

LocalFit newton_fit(const Family& family, const LocalDesign& design,
                    const Eigen::VectorXd& xi0, const NewtonOptions& options) {
    LocalFit fit;
    fit.xi = xi0;
    double value = local_loglik(family, design, fit.xi);

    const Eigen::Index k = design.Z.cols();
    for (int g = 0; g < options.max_iter; ++g) {
        const Eigen::VectorXd score = local_score(family, design, fit.xi);
        Eigen::MatrixXd neg_hess = -local_jacobian(family, design, fit.xi);

        Eigen::LLT<Eigen::MatrixXd> llt(neg_hess);
        Eigen::VectorXd step;
        if (llt.info() == Eigen::Success) {
            step = llt.solve(score);
        }
        if (llt.info() != Eigen::Success || !step.allFinite()) {
            const double ridge =
                1e-8 * (neg_hess.trace() / static_cast<double>(k) + 1.0);
            neg_hess.diagonal().array() += ridge;
            step = neg_hess.ldlt().solve(score);
            fit.ridged = true;
            if (!step.allFinite()) break;
        }

        if (step.norm() < options.tol) {
            // Apply the sub-tolerance step when it does not hurt; it sharpens
            // the score without counting as an iteration.
            const Eigen::VectorXd candidate = fit.xi + step;
            const double cand_value = local_loglik(family, design, candidate);
            if (cand_value >= value) {
                fit.xi = candidate;
                value = cand_value;
            }
            fit.converged = true;
            fit.final_step_norm = step.norm();
            break;
        }

        // Step halving: accept the first scale that improves the likelihood.
        double scale = 1.0;
        bool accepted = false;
        for (int half = 0; half <= options.max_halvings; ++half, scale *= 0.5) {
            const Eigen::VectorXd candidate = fit.xi + scale * step;
            const double cand_value = local_loglik(family, design, candidate);
            if (cand_value > value) {
                fit.xi = candidate;
                value = cand_value;
                fit.final_step_norm = scale * step.norm();
                fit.iterations = g + 1;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;  // no ascent direction left
        // Convergence is decided by the full Newton step at the top of the
        // next pass; a halved step shrinking below tol is a stall, not a
        // fixed point.
    }

    bool clamped = false;
    local_theta(family, design, fit.xi, &clamped);
    fit.domain_clamped = clamped;
    fit.loglik = value;
    return fit;
}

}  // namespace made
