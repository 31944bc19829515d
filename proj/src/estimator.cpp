#include "made/estimator.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "made/errors.hpp"
#include "made/parallel.hpp"

namespace made {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kThetaMargin = 1e-10;
constexpr double kDispersionFloor = 1e-12;

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) out.row(k) = X.row(rows[k]);
    return out;
}

// Cached per-fit quantities for repeated objective/gradient evaluations.
struct QWorkspace {
    const Family* family;
    double phi;
    Eigen::MatrixXd Xtrain;  // |M| x p
    Eigen::MatrixXd Xeval;   // |N| x p
    Eigen::ArrayXd ym;       // model-scale responses over M
    Eigen::ArrayXd inv_a;    // 1/a_i(phi) over M
    Eigen::ArrayXd offs;     // offsets over M
    Eigen::ArrayXd logf0;    // log f0(y_i, phi) over M

    QWorkspace(const Family& fam, const Dataset& data)
        : family(&fam), phi(data.dispersion) {
        const std::vector<int> trains = data.train_indices();
        const std::vector<int> evals = data.eval_indices();
        Xtrain = take_rows(data.X, trains);
        Xeval = take_rows(data.X, evals);
        const int m = static_cast<int>(trains.size());
        ym.resize(m);
        inv_a.resize(m);
        offs.resize(m);
        logf0.resize(m);
        for (int k = 0; k < m; ++k) {
            const int i = trains[k];
            ym(k) = fam.model_response(data.y(i), data.trial(i));
            inv_a(k) = 1.0 / fam.a_scale(phi, data.trial(i));
            offs(k) = data.offset(i);
            logf0(k) = fam.log_f0(data.y(i), phi, data.trial(i));
        }
    }
};

double objective_impl(const QWorkspace& ws, const Eigen::VectorXd& alphas,
                      const Eigen::MatrixXd& gammas, const Eigen::MatrixXd& B,
                      const Eigen::MatrixXd& w) {
    const Eigen::MatrixXd Utrain = ws.Xtrain * B;
    const Eigen::MatrixXd Ueval = ws.Xeval * B;
    const double sup = ws.family->theta_sup();
    const bool bounded = std::isfinite(sup);
    const Eigen::Index m = ws.Xtrain.rows();
    Eigen::ArrayXd theta(m), bvals(m);
    double total = 0.0;
    for (Eigen::Index jj = 0; jj < alphas.size(); ++jj) {
        theta.matrix().noalias() = Utrain * gammas.row(jj).transpose();
        theta += (alphas(jj) - Ueval.row(jj).dot(gammas.row(jj))) + ws.offs;
        if (bounded && (theta >= sup).any()) return kNegInf;
        ws.family->b_into(theta, bvals);
        const auto wrow = w.row(jj).transpose().array();
        const double qj =
            (wrow * ((ws.ym * theta - bvals) * ws.inv_a + ws.logf0)).sum();
        if (!std::isfinite(qj)) {
            // Zero-weight terms may carry non-finite values; mask them out.
            const Eigen::ArrayXd val =
                (ws.ym * theta - bvals) * ws.inv_a + ws.logf0;
            const double masked = (wrow > 0.0).select(wrow * val, 0.0).sum();
            if (!std::isfinite(masked)) return kNegInf;
            total += masked;
            continue;
        }
        total += qj;
    }
    return total;
}

Eigen::MatrixXd gradient_impl(const QWorkspace& ws, const Eigen::VectorXd& alphas,
                              const Eigen::MatrixXd& gammas,
                              const Eigen::MatrixXd& B, const Eigen::MatrixXd& w) {
    const Eigen::MatrixXd Utrain = ws.Xtrain * B;
    const Eigen::MatrixXd Ueval = ws.Xeval * B;
    const double sup = ws.family->theta_sup();
    const bool bounded = std::isfinite(sup);
    const Eigen::Index m = ws.Xtrain.rows();
    Eigen::ArrayXd theta(m), mu(m), resid(m);
    Eigen::VectorXd xr(ws.Xtrain.cols());
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(B.rows(), B.cols());
    for (Eigen::Index jj = 0; jj < alphas.size(); ++jj) {
        theta.matrix().noalias() = Utrain * gammas.row(jj).transpose();
        theta += (alphas(jj) - Ueval.row(jj).dot(gammas.row(jj))) + ws.offs;
        if (bounded) theta = theta.min(sup - kThetaMargin);
        ws.family->mean_into(theta, mu);
        resid = w.row(jj).transpose().array() * (ws.ym - mu) * ws.inv_a;
        if (!resid.allFinite())
            resid = resid.isFinite().select(resid, 0.0);
        xr.noalias() = ws.Xtrain.transpose() * resid.matrix();
        xr -= resid.sum() * ws.Xeval.row(jj).transpose();
        grad.noalias() += xr * gammas.row(jj);
    }
    return grad;
}

}  // namespace

double MadeConfig::resolve_bandwidth(int n) const {
    if (bandwidth_h) {
        if (!(*bandwidth_h > 0.0)) throw ConfigError("bandwidth h must be positive");
        return *bandwidth_h;
    }
    if (!(bandwidth_c > 0.0)) throw ConfigError("bandwidth multiplier c must be positive");
    return bandwidth_c * std::pow(static_cast<double>(n), -1.0 / (d + 4.0));
}

void MadeConfig::validate(int p) const {
    if (d < 0 || d > p) throw ConfigError("dimension d must satisfy 0 <= d <= p");
    if (!(outer_tol > 0.0)) throw ConfigError("outer tolerance must be positive");
    if (outer_max_iter < 1) throw ConfigError("outer_max_iter must be >= 1");
    if (init == InitMode::User &&
        (user_init.cols() != d || user_init.rows() != p))
        throw ConfigError("user initialization must be a p x d matrix");
}

Eigen::VectorXd MadeFit::fitted_theta(const Dataset& data) const {
    Eigen::VectorXd theta(alpha.size());
    for (Eigen::Index k = 0; k < alpha.size(); ++k)
        theta(k) = alpha(k) + data.offset(eval_points[k]);
    return theta;
}

Eigen::VectorXd MadeFit::fitted_means(const Family& family,
                                      const Dataset& data) const {
    const Eigen::VectorXd theta = fitted_theta(data);
    Eigen::VectorXd mu(theta.size());
    for (Eigen::Index k = 0; k < theta.size(); ++k)
        mu(k) = family.mean(std::min(theta(k), family.theta_sup() - kThetaMargin));
    return mu;
}

double objective_q(const Family& family, const Dataset& data,
                   const Eigen::VectorXd& alphas, const Eigen::MatrixXd& gammas,
                   const Eigen::MatrixXd& B, const WeightMatrix& weights) {
    QWorkspace ws(family, data);
    return objective_impl(ws, alphas, gammas, B, weights.w);
}

Eigen::MatrixXd gradient_q_wrt_b(const Family& family, const Dataset& data,
                                 const Eigen::VectorXd& alphas,
                                 const Eigen::MatrixXd& gammas,
                                 const Eigen::MatrixXd& B,
                                 const WeightMatrix& weights) {
    QWorkspace ws(family, data);
    return gradient_impl(ws, alphas, gammas, B, weights.w);
}

PfcInit init_pfc(const Dataset& data, int d) {
    const std::vector<int> rows = data.train_indices();
    const int n = static_cast<int>(rows.size());
    const int p = data.p();
    if (n <= d) throw DataError("init_pfc: need more observations than dimensions");

    PfcInit out;
    Eigen::MatrixXd Xc = take_rows(data.X, rows);
    Xc.rowwise() -= Xc.colwise().mean();

    Eigen::MatrixXd F(n, d);
    for (int k = 0; k < n; ++k) {
        double power = 1.0;
        for (int c = 0; c < d; ++c) {
            power *= data.y(rows[k]);
            F(k, c) = power;
        }
    }

    const Eigen::MatrixXd FtF = F.transpose() * F;
    const Eigen::MatrixXd FtX = F.transpose() * Xc;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(FtF);
    Eigen::MatrixXd coef;
    if (lu.isInvertible()) {
        coef = lu.solve(FtX);
    } else {
        coef = FtF.completeOrthogonalDecomposition().pseudoInverse() * FtX;
        out.degenerate = true;
    }
    Eigen::MatrixXd sigma = Xc.transpose() * F * coef / static_cast<double>(n);
    sigma = 0.5 * (sigma + sigma.transpose());

    const double scale = Xc.squaredNorm() / std::max(1, n);
    if (sigma.norm() <= 1e-14 * (1.0 + scale)) {
        // No usable response moments (e.g. constant Y): fall back to the
        // uniform direction padded with coordinate axes.
        Eigen::MatrixXd seed = Eigen::MatrixXd::Zero(p, d);
        seed.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(p)));
        for (int c = 1; c < d; ++c) seed(c - 1, c) = 1.0;
        out.B = stiefel::orthonormalize(seed);
        out.degenerate = true;
        return out;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
    Eigen::MatrixXd B(p, d);
    for (int c = 0; c < d; ++c) B.col(c) = eig.eigenvectors().col(p - 1 - c);
    out.B = stiefel::orthonormalize(B);
    return out;
}

double subspace_distance(const Eigen::MatrixXd& B_true,
                         const Eigen::MatrixXd& B_hat) {
    if (B_true.rows() != B_hat.rows())
        throw DataError("subspace_distance: row dimensions differ");
    return (B_true - B_hat * (B_hat.transpose() * B_true)).norm();
}

double estimate_dispersion(const Family& family, const Dataset& data,
                           const Eigen::VectorXd& alphas,
                           const Eigen::MatrixXd& gammas,
                           const Eigen::MatrixXd& B, const WeightMatrix& weights) {
    const std::vector<int> evals = data.eval_indices();
    if (family.name() == FamilyName::Gaussian) {
        double ss = 0.0;
        for (std::size_t k = 0; k < evals.size(); ++k) {
            const double mu = alphas(k) + data.offset(evals[k]);
            const double r = data.y(evals[k]) - mu;
            ss += r * r;
        }
        return std::max(kDispersionFloor, ss / static_cast<double>(evals.size()));
    }

    // Generic one-dimensional maximization over the dispersion: coarse
    // log-spaced bracket followed by golden-section refinement.
    const auto q_at = [&](double phi) {
        Dataset tmp = data;
        tmp.dispersion = phi;
        return objective_q(family, tmp, alphas, gammas, B, weights);
    };
    const int grid_size = 49;
    const double lo = std::log(1e-6), hi = std::log(1e6);
    int best = 0;
    double best_val = kNegInf;
    std::vector<double> logphi(grid_size);
    for (int k = 0; k < grid_size; ++k) {
        logphi[k] = lo + (hi - lo) * k / (grid_size - 1);
        const double v = q_at(std::exp(logphi[k]));
        if (v > best_val) {
            best_val = v;
            best = k;
        }
    }
    double a = logphi[std::max(0, best - 1)];
    double b = logphi[std::min(grid_size - 1, best + 1)];
    const double invphi = 0.6180339887498949;
    double c = b - invphi * (b - a), dd = a + invphi * (b - a);
    double fc = q_at(std::exp(c)), fd = q_at(std::exp(dd));
    for (int it = 0; it < 60; ++it) {
        if (fc > fd) {
            b = dd; dd = c; fd = fc;
            c = b - invphi * (b - a);
            fc = q_at(std::exp(c));
        } else {
            a = c; c = dd; fc = fd;
            dd = a + invphi * (b - a);
            fd = q_at(std::exp(dd));
        }
    }
    return std::max(kDispersionFloor, std::exp(0.5 * (a + b)));
}

MadeFit fit(const Family& family, const Dataset& data, const MadeConfig& config,
            const WarmStart* warm) {
    data.validate(family);
    config.validate(data.p());

    const std::vector<int> trains = data.train_indices();
    const std::vector<int> evals = data.eval_indices();
    const int m = static_cast<int>(trains.size());
    const int ne = static_cast<int>(evals.size());
    const int p = data.p();
    const int d = config.d;
    if (m < d + 2) throw DataError("fit: training set too small for dimension d");

    const double h = config.resolve_bandwidth(m);
    const Bandwidth bw{config.bandwidth_c, h};

    MadeFit out;
    out.bandwidth_h = h;
    out.eval_points = evals;
    out.train_points = trains;

    // Initial basis.
    Eigen::MatrixXd B(p, d);
    switch (config.init) {
        case InitMode::Pfc: {
            if (d > 0) {
                Dataset tr = data;
                tr.train = trains;
                tr.eval.clear();
                B = init_pfc(tr, d).B;
            }
            break;
        }
        case InitMode::Random: {
            Rng rng(config.seed ? config.seed : 0x5eedULL);
            if (d > 0) B = stiefel::random_semi_orthogonal(p, d, rng);
            break;
        }
        case InitMode::User:
            B = stiefel::orthonormalize(config.user_init);
            break;
    }

    // Algorithm step 1: raw weights w_i(X_j).
    WeightMatrix weights = raw_weights(data.X, bw, evals, trains);

    Dataset work = data;  // dispersion may be re-estimated in place
    Eigen::VectorXd alphas = Eigen::VectorXd::Zero(ne);
    Eigen::MatrixXd gammas = Eigen::MatrixXd::Zero(ne, d);
    bool have_coefs = false;
    if (warm) {
        if (warm->alpha.size() != ne || warm->gamma.rows() != ne ||
            warm->gamma.cols() != d)
            throw ConfigError("warm start dimensions do not match");
        alphas = warm->alpha;
        gammas = warm->gamma;
        have_coefs = true;
    }
    out.local.assign(ne, LocalFit{});

    const auto coef_pass = [&](const Eigen::MatrixXd& basis) {
        QWorkspace ws(family, work);
        const Eigen::MatrixXd Utrain = ws.Xtrain * basis;
        const Eigen::MatrixXd Ueval = ws.Xeval * basis;
        parallel_for(
            static_cast<std::size_t>(ne),
            [&](std::size_t jj) {
                LocalDesign design;
                design.Z.resize(m, d + 1);
                design.Z.col(0).setOnes();
                if (d > 0)
                    design.Z.rightCols(d) =
                        Utrain.rowwise() - Ueval.row(static_cast<int>(jj));
                design.w = weights.w.row(jj).transpose();
                design.ym = ws.ym.matrix();
                design.inv_a = ws.inv_a.matrix();
                design.offset = ws.offs.matrix();
                design.wlogf0 = (design.w.array() * ws.logf0).sum();

                Eigen::VectorXd xi0(d + 1);
                bool warm_ok = false;
                if (have_coefs) {
                    xi0(0) = alphas(jj);
                    if (d > 0) xi0.tail(d) = gammas.row(jj).transpose();
                    warm_ok = xi0.allFinite() &&
                              std::isfinite(local_loglik(family, design, xi0));
                }
                if (!warm_ok) {
                    const double ybar = (design.w.array() * ws.ym).sum();
                    xi0.setZero();
                    xi0(0) = family.link(family.clamp_mean(ybar));
                }

                LocalFit lf;
                bool failed = false;
                try {
                    lf = newton_fit(family, design, xi0, config.newton);
                    failed = !lf.xi.allFinite();
                } catch (const std::exception&) {
                    failed = true;
                }
                if (failed) {
                    // Failed local fit: park it at the intercept-only start
                    // (zero slope) so the B step ignores this point.
                    lf = LocalFit{};
                    lf.xi = Eigen::VectorXd::Zero(d + 1);
                    const double ybar = (design.w.array() * ws.ym).sum();
                    lf.xi(0) = family.link(family.clamp_mean(ybar));
                    lf.converged = false;
                }
                alphas(jj) = lf.xi(0);
                if (d > 0) gammas.row(jj) = lf.xi.tail(d).transpose();
                out.local[jj] = lf;
            },
            config.threads);
        have_coefs = true;
    };

    const auto current_objective = [&](const Eigen::MatrixXd& basis) {
        QWorkspace ws(family, work);
        return objective_impl(ws, alphas, gammas, basis, weights.w);
    };

    int outer = 0;
    bool converged = false;
    for (outer = 1; outer <= config.outer_max_iter; ++outer) {
        // (a) coefficient step with B fixed
        coef_pass(B);
        out.trace.push_back({outer, 'x', current_objective(B), 0.0});

        if (d == 0) {
            if (config.dispersion_mode == DispersionMode::Estimate)
                work.dispersion =
                    estimate_dispersion(family, work, alphas, gammas, B, weights);
            converged = true;
            break;
        }

        // (b) B step with coefficients and weights frozen
        QWorkspace ws(family, work);
        stiefel::Objective obj;
        obj.value = [&](const Eigen::MatrixXd& Bc) {
            return objective_impl(ws, alphas, gammas, Bc, weights.w);
        };
        obj.gradient = [&](const Eigen::MatrixXd& Bc) {
            return gradient_impl(ws, alphas, gammas, Bc, weights.w);
        };
        const stiefel::CgResult cg = stiefel::cg_maximize(obj, B, config.cg);

        const double delta =
            (cg.B - B * (B.transpose() * cg.B)).norm();  // ||(I-BB')B_new||_F
        out.trace.push_back({outer, 'B', cg.objective, delta});
        B = cg.B;

        // (c) optional dispersion step
        if (config.dispersion_mode == DispersionMode::Estimate)
            work.dispersion =
                estimate_dispersion(family, work, alphas, gammas, B, weights);

        // (d) weight refresh
        if (config.weight_mode == WeightMode::Refined)
            weights = refined_weights(data.X, B, bw, evals, trains);

        if (delta < config.outer_tol) {
            converged = true;
            break;
        }
    }

    // Final coefficient pass so (alpha, gamma) match the returned basis and
    // weights.
    coef_pass(B);

    out.B = B;
    out.alpha = alphas;
    out.gamma = gammas;
    out.dispersion = work.dispersion;
    out.converged = converged;
    out.outer_iterations = std::min(outer, config.outer_max_iter);
    out.objective = current_objective(B);
    out.trace.push_back({out.outer_iterations, 'x', out.objective, 0.0});
    out.weights = std::move(weights);
    return out;
}

}  // namespace made
