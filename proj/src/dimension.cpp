#include "made/dimension.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "made/errors.hpp"
#include "made/kernel.hpp"
#include "made/local_fit.hpp"
#include "made/parallel.hpp"

namespace made {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double summarize(const Eigen::VectorXd& gammas, GammaSummary summary) {
    if (summary == GammaSummary::MeanAbs) return gammas.cwiseAbs().mean();
    return gammas.mean();
}

// Responses (with their trial counts) shuffled over positions; predictors and
// offsets stay put.
Dataset permute_responses(const Dataset& data, Rng& rng) {
    const int n = data.n();
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.raw() % static_cast<std::uint64_t>(i + 1));
        std::swap(idx[i], idx[j]);
    }
    Dataset out = data;
    for (int i = 0; i < n; ++i) {
        out.y(i) = data.y(idx[i]);
        if (data.trials.size()) out.trials(i) = data.trials(idx[i]);
    }
    return out;
}

// Orthonormal basis of the orthogonal complement of B0.
Eigen::MatrixXd complement_basis(const Eigen::MatrixXd& B0) {
    const Eigen::Index p = B0.rows();
    const Eigen::Index d0 = B0.cols();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(B0);
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(p, p);
    return Q.rightCols(p - d0);
}

struct AugmentedFit {
    Eigen::VectorXd gamma_extra;  // scalar loading on the extra direction
    Eigen::VectorXd beta;         // unit vector orthogonal to B0
    bool converged = false;
};

// Fits theta_ij = alpha_j + gamma0_j' B0'(X_i - X_j) + gamma_j beta'(X_i - X_j)
// with B0 held fixed and beta = C v on the unit sphere of the complement
// coordinates. Mirrors the main alternation with the sphere in place of the
// Stiefel manifold.
AugmentedFit fit_augmented(const Family& family, const Dataset& data,
                           const MadeConfig& config,
                           const Eigen::MatrixXd& B0) {
    const int d0 = static_cast<int>(B0.cols());
    if (d0 == 0) {
        MadeConfig c1 = config;
        c1.d = 1;
        const MadeFit f = fit(family, data, c1);
        return {f.gamma.col(0), f.B.col(0), f.converged};
    }

    const std::vector<int> trains = data.train_indices();
    const std::vector<int> evals = data.eval_indices();
    const int m = static_cast<int>(trains.size());
    const int ne = static_cast<int>(evals.size());
    const int pt = data.p() - d0;

    MadeConfig local = config;
    local.d = d0 + 1;
    const double h = local.resolve_bandwidth(m);

    const Eigen::MatrixXd C = complement_basis(B0);
    const Eigen::MatrixXd Z0 = data.X * B0;  // fixed reduced coordinates
    const Eigen::MatrixXd Xt = data.X * C;   // complement coordinates

    // Training-side context.
    Eigen::ArrayXd ym(m), inv_a(m), offs(m), logf0(m);
    for (int k = 0; k < m; ++k) {
        const int i = trains[k];
        ym(k) = family.model_response(data.y(i), data.trial(i));
        inv_a(k) = 1.0 / family.a_scale(data.dispersion, data.trial(i));
        offs(k) = data.offset(i);
        logf0(k) = family.log_f0(data.y(i), data.dispersion, data.trial(i));
    }
    Eigen::MatrixXd Z0t(m, d0), Xtt(m, pt);
    for (int k = 0; k < m; ++k) {
        Z0t.row(k) = Z0.row(trains[k]);
        Xtt.row(k) = Xt.row(trains[k]);
    }

    // Initial extra direction: PFC on the complement coordinates.
    Dataset comp;
    comp.y = data.y;
    comp.X = Xt;
    comp.train = trains;
    Eigen::VectorXd v = init_pfc(comp, 1).B.col(0);

    WeightMatrix weights = raw_weights(data.X, Bandwidth{config.bandwidth_c, h},
                                       evals, trains);

    Eigen::VectorXd alphas = Eigen::VectorXd::Zero(ne);
    Eigen::MatrixXd gamma0 = Eigen::MatrixXd::Zero(ne, d0);
    Eigen::VectorXd gamma_x = Eigen::VectorXd::Zero(ne);
    bool have_coefs = false;

    const auto coef_pass = [&]() {
        parallel_for(
            static_cast<std::size_t>(ne),
            [&](std::size_t jj) {
                const int j = evals[jj];
                LocalDesign design;
                design.Z.resize(m, d0 + 2);
                design.Z.col(0).setOnes();
                design.Z.middleCols(1, d0) = Z0t.rowwise() - Z0.row(j);
                design.Z.col(d0 + 1) = (Xtt.rowwise() - Xt.row(j)) * v;
                design.w = weights.w.row(jj).transpose();
                design.ym = ym.matrix();
                design.inv_a = inv_a.matrix();
                design.offset = offs.matrix();
                design.wlogf0 = (design.w.array() * logf0).sum();

                Eigen::VectorXd xi0(d0 + 2);
                bool warm = false;
                if (have_coefs) {
                    xi0(0) = alphas(jj);
                    xi0.segment(1, d0) = gamma0.row(jj).transpose();
                    xi0(d0 + 1) = gamma_x(jj);
                    warm = std::isfinite(local_loglik(family, design, xi0));
                }
                if (!warm) {
                    xi0.setZero();
                    xi0(0) = family.link(
                        family.clamp_mean((design.w.array() * ym).sum()));
                }
                LocalFit lf;
                try {
                    lf = newton_fit(family, design, xi0, config.newton);
                    if (!lf.xi.allFinite()) throw NumericalError("non-finite");
                } catch (const std::exception&) {
                    lf.xi = Eigen::VectorXd::Zero(d0 + 2);
                    lf.xi(0) = family.link(
                        family.clamp_mean((design.w.array() * ym).sum()));
                }
                alphas(jj) = lf.xi(0);
                gamma0.row(jj) = lf.xi.segment(1, d0).transpose();
                gamma_x(jj) = lf.xi(d0 + 1);
            },
            config.threads);
        have_coefs = true;
    };

    // Objective and gradient in v with the fixed part frozen.
    const double sup = family.theta_sup();
    const auto theta_for = [&](std::size_t jj, const Eigen::VectorXd& vc) {
        const int j = evals[jj];
        Eigen::ArrayXd theta =
            ((Z0t.rowwise() - Z0.row(j)) * gamma0.row(jj).transpose()).array();
        theta += gamma_x(jj) * ((Xtt.rowwise() - Xt.row(j)) * vc).array();
        theta += alphas(jj) + offs;
        return theta;
    };
    stiefel::Objective obj;
    obj.value = [&](const Eigen::MatrixXd& vc) {
        double total = 0.0;
        for (int jj = 0; jj < ne; ++jj) {
            const Eigen::ArrayXd theta = theta_for(jj, vc.col(0));
            if (std::isfinite(sup) && (theta >= sup).any())
                return -std::numeric_limits<double>::infinity();
            const Eigen::ArrayXd val = (ym * theta - family.b(theta)) * inv_a;
            const Eigen::ArrayXd wrow = weights.w.row(jj).transpose().array();
            const double qj = (wrow * val).sum();
            if (!std::isfinite(qj))
                return -std::numeric_limits<double>::infinity();
            total += qj;
        }
        return total;
    };
    obj.gradient = [&](const Eigen::MatrixXd& vc) {
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(pt);
        for (int jj = 0; jj < ne; ++jj) {
            const int j = evals[jj];
            Eigen::ArrayXd theta = theta_for(jj, vc.col(0));
            if (std::isfinite(sup)) theta = theta.min(sup - 1e-10);
            Eigen::ArrayXd resid = weights.w.row(jj).transpose().array() *
                                   (ym - family.mean(theta)) * inv_a;
            if (!resid.allFinite()) resid = resid.isFinite().select(resid, 0.0);
            const Eigen::VectorXd xr = Xtt.transpose() * resid.matrix();
            grad += gamma_x(jj) * (xr - resid.sum() * Xt.row(j).transpose());
        }
        return Eigen::MatrixXd(grad);
    };

    AugmentedFit out;
    for (int outer = 1; outer <= config.outer_max_iter; ++outer) {
        coef_pass();
        const stiefel::CgResult cg = stiefel::cg_maximize(obj, v, config.cg);
        const Eigen::VectorXd v_new = cg.B.col(0);
        const double delta = (v_new - v * v.dot(v_new)).norm();
        v = v_new;
        if (config.weight_mode == WeightMode::Refined) {
            Eigen::MatrixXd coords(data.n(), d0 + 1);
            coords.leftCols(d0) = Z0;
            coords.col(d0) = Xt * v;
            weights = kernel_weights(coords, h, evals, trains);
        }
        if (delta < config.outer_tol) {
            out.converged = true;
            break;
        }
    }
    coef_pass();
    out.gamma_extra = gamma_x;
    out.beta = C * v;
    return out;
}

// Unweighted full-data log-likelihood at the fitted canonical parameters.
double full_loglik(const Family& family, const Dataset& data,
                   const MadeFit& fitted) {
    const Eigen::VectorXd theta = fitted.fitted_theta(data);
    double total = 0.0;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
        const int i = fitted.eval_points[k];
        total += family.loglik(data.y(i), family.clamp_theta(theta(k)),
                               data.dispersion, data.trial(i));
    }
    return total;
}

// Null fit at d0 and alternative fit at d0+1 warm-started from it.
struct NestedPair {
    MadeFit null_fit;
    MadeFit alt_fit;
};

NestedPair fit_nested(const Family& family, const Dataset& data,
                      const MadeConfig& config, int d0) {
    NestedPair pair;
    MadeConfig c0 = config;
    c0.d = d0;
    pair.null_fit = fit(family, data, c0);

    MadeConfig c1 = config;
    c1.d = d0 + 1;
    WarmStart warm;
    warm.alpha = pair.null_fit.alpha;
    warm.gamma.setZero(pair.null_fit.gamma.rows(), d0 + 1);
    warm.gamma.leftCols(d0) = pair.null_fit.gamma;
    if (d0 > 0) {
        c1.init = InitMode::User;
        c1.user_init.resize(data.p(), d0 + 1);
        c1.user_init.leftCols(d0) = pair.null_fit.B;
        c1.user_init.col(d0) = complement_basis(pair.null_fit.B).col(0);
    }
    pair.alt_fit = fit(family, data, c1, &warm);
    return pair;
}

}  // namespace

PermTestOutcome permutation_test(const Family& family, const Dataset& data,
                                 const MadeConfig& config, int d0,
                                 const DimOptions& options) {
    if (d0 < 0 || d0 >= data.p())
        throw ConfigError("permutation test requires 0 <= d0 < p");
    if (options.r_perm < 1) throw ConfigError("r_perm must be >= 1");

    PermTestOutcome out{};
    Eigen::MatrixXd B0(data.p(), 0);
    if (d0 > 0) {
        MadeConfig c0 = config;
        c0.d = d0;
        B0 = fit(family, data, c0).B;
        ++out.fits;
    }
    const AugmentedFit base = fit_augmented(family, data, config, B0);
    ++out.fits;
    out.statistic = summarize(base.gamma_extra, options.summary);

    MadeConfig inner = config;
    inner.threads = 1;
    const int R = options.r_perm;
    std::vector<double> stats(R, kNaN);
    parallel_for(
        static_cast<std::size_t>(R),
        [&](std::size_t r) {
            Rng rng = Rng::child(options.seed, r);
            const Dataset perm = permute_responses(data, rng);
            try {
                const AugmentedFit f = fit_augmented(family, perm, inner, B0);
                stats[r] = summarize(f.gamma_extra, options.summary);
            } catch (const std::exception&) {
                // replicate dropped
            }
        },
        options.threads);

    int used = 0, exceed = 0;
    for (const double s : stats) {
        if (!std::isfinite(s)) continue;
        ++used;
        if (std::fabs(s) > std::fabs(out.statistic)) ++exceed;
    }
    out.fits += R;
    out.replicates_used = used;
    out.replicates_failed = R - used;
    if (used == 0) throw NumericalError("permutation test: all replicates failed");
    out.p_value = static_cast<double>(exceed) / static_cast<double>(used);
    return out;
}

BootTestOutcome bootstrap_lrt(const Family& family, const Dataset& data,
                              const MadeConfig& config, int d0,
                              const DimOptions& options) {
    if (d0 < 0 || d0 >= data.p())
        throw ConfigError("bootstrap test requires 0 <= d0 < p");
    if (options.r_boot < 1) throw ConfigError("r_boot must be >= 1");

    BootTestOutcome out{};
    const NestedPair base = fit_nested(family, data, config, d0);
    out.fits += 2;
    out.lambda = 2.0 * (full_loglik(family, data, base.alt_fit) -
                        full_loglik(family, data, base.null_fit));

    const Eigen::VectorXd theta0 = base.null_fit.fitted_theta(data);
    MadeConfig inner = config;
    inner.threads = 1;
    const int R = options.r_boot;
    std::vector<double> lambdas(R, kNaN);
    parallel_for(
        static_cast<std::size_t>(R),
        [&](std::size_t r) {
            Rng rng = Rng::child(options.seed ^ 0xb007ULL, r);
            Dataset boot = data;
            for (int i = 0; i < data.n(); ++i)
                boot.y(i) =
                    family.sample(family.clamp_theta(theta0(i)),
                                  data.dispersion, data.trial(i), rng);
            try {
                const NestedPair rep = fit_nested(family, boot, inner, d0);
                lambdas[r] = 2.0 * (full_loglik(family, boot, rep.alt_fit) -
                                    full_loglik(family, boot, rep.null_fit));
            } catch (const std::exception&) {
                // replicate dropped
            }
        },
        options.threads);

    int used = 0, exceed = 0;
    for (const double l : lambdas) {
        if (!std::isfinite(l)) continue;
        ++used;
        if (l >= out.lambda) ++exceed;
    }
    out.fits += 2L * R;
    out.replicates_used = used;
    out.replicates_failed = R - used;
    if (used == 0) throw NumericalError("bootstrap test: all replicates failed");
    out.p_value = static_cast<double>(exceed) / static_cast<double>(used);
    return out;
}

DimTestResult sequential_dimension(const Family& family, const Dataset& data,
                                   const MadeConfig& config, DimMethod method,
                                   const DimOptions& options) {
    if (!(options.level > 0.0 && options.level < 1.0))
        throw ConfigError("significance level must lie in (0, 1)");
    if (method == DimMethod::CrossValidation)
        return cv_dimension(family, data, config, options);

    DimTestResult result;
    result.method = method;
    result.seed = options.seed;
    long fits = 0;
    for (int d0 = 0; d0 < data.p(); ++d0) {
        const long step_cost =
            method == DimMethod::Permutation
                ? 2L + options.r_perm
                : 2L * (1L + options.r_boot);
        if (fits + step_cost > options.max_fits) {
            result.complete = false;
            result.d_hat = d0;
            result.warnings.push_back("fit budget exhausted before d0=" +
                                      std::to_string(d0));
            return result;
        }
        DimStep step{};
        step.d0 = d0;
        if (method == DimMethod::Permutation) {
            const PermTestOutcome t = permutation_test(family, data, config,
                                                       d0, options);
            step.statistic = t.statistic;
            step.p_value = t.p_value;
            step.replicates_used = t.replicates_used;
            step.replicates_failed = t.replicates_failed;
            fits += t.fits;
        } else {
            const BootTestOutcome t =
                bootstrap_lrt(family, data, config, d0, options);
            step.statistic = t.lambda;
            step.p_value = t.p_value;
            step.replicates_used = t.replicates_used;
            step.replicates_failed = t.replicates_failed;
            fits += t.fits;
        }
        step.rejected = step.p_value < options.level;
        if (step.replicates_failed > 0)
            result.warnings.push_back(std::to_string(step.replicates_failed) +
                                      " replicate(s) dropped at d0=" +
                                      std::to_string(d0));
        result.steps.push_back(step);
        if (!step.rejected) {
            result.d_hat = d0;
            return result;
        }
    }
    result.d_hat = data.p();
    return result;
}

DimTestResult cv_dimension(const Family& family, const Dataset& data,
                           const MadeConfig& config, const DimOptions& options) {
    const int n = data.n();
    const int p = data.p();
    const int K = options.kfolds;
    if (K < 2 || K > n) throw ConfigError("cross-validation requires 2 <= K <= n");

    DimTestResult result;
    result.method = DimMethod::CrossValidation;
    result.seed = options.seed;

    // Seeded shuffle, then round-robin fold assignment.
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    Rng rng(options.seed + 1);
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.raw() % static_cast<std::uint64_t>(i + 1));
        std::swap(order[i], order[j]);
    }
    std::vector<std::vector<int>> folds(K);
    for (int i = 0; i < n; ++i) folds[i % K].push_back(order[i]);

    // A fold is skipped (for every d) when its training responses are all
    // identical and the family cannot produce a boundary mean.
    std::vector<bool> usable(K, true);
    for (int k = 0; k < K; ++k) {
        std::vector<int> train_rows;
        for (int kk = 0; kk < K; ++kk)
            if (kk != k)
                train_rows.insert(train_rows.end(), folds[kk].begin(),
                                  folds[kk].end());
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const int i : train_rows) {
            lo = std::min(lo, data.y(i));
            hi = std::max(hi, data.y(i));
        }
        if (lo == hi && family.name() != FamilyName::Gaussian) {
            usable[k] = false;
            result.warnings.push_back("fold " + std::to_string(k) +
                                      " skipped: degenerate response");
        }
    }

    const auto loss_of = [&](double y, double yhat) {
        switch (options.cv_loss) {
            case CvLoss::Squared: return (y - yhat) * (y - yhat);
            case CvLoss::Absolute: return std::fabs(y - yhat);
            case CvLoss::Misclass: return (yhat >= 0.5 ? 1.0 : 0.0) == y ? 0.0 : 1.0;
        }
        return 0.0;
    };

    MadeConfig inner = config;
    inner.threads = 1;

    struct Cell {
        double loss = 0.0;
        bool failed = false;
    };
    std::vector<Cell> cells((p + 1) * K);
    parallel_for(
        static_cast<std::size_t>((p + 1) * K),
        [&](std::size_t idx) {
            const int d = static_cast<int>(idx) / K;
            const int k = static_cast<int>(idx) % K;
            if (!usable[k]) return;
            std::vector<int> train_rows;
            for (int kk = 0; kk < K; ++kk)
                if (kk != k)
                    train_rows.insert(train_rows.end(), folds[kk].begin(),
                                      folds[kk].end());
            MadeConfig cd = inner;
            cd.d = d;
            try {
                const Dataset sub = data.subset(train_rows);
                const MadeFit f = fit(family, sub, cd);
                const Predictor pred(family, sub, f);
                double total = 0.0;
                for (const int j : folds[k]) {
                    const double yhat =
                        pred.predict(data.X.row(j).transpose(),
                                     options.cv_predictor, data.offset(j));
                    const double ymj =
                        family.model_response(data.y(j), data.trial(j));
                    total += loss_of(ymj, yhat);
                }
                cells[idx].loss = total;
            } catch (const std::exception&) {
                cells[idx].failed = true;
            }
        },
        options.threads);

    for (int d = 0; d <= p; ++d) {
        DimStep step{};
        step.d0 = d;
        step.p_value = kNaN;
        double total = 0.0;
        bool ok = false;
        for (int k = 0; k < K; ++k) {
            if (!usable[k]) continue;
            const Cell& cell = cells[d * K + k];
            if (cell.failed) {
                result.warnings.push_back("fold " + std::to_string(k) +
                                          " failed at d=" + std::to_string(d));
                continue;
            }
            total += cell.loss;
            ok = true;
        }
        step.statistic = ok ? total : kNaN;
        result.steps.push_back(step);
    }

    // Smallest dimension within a hair of the minimum loss (ties and
    // floating-point dust resolve toward the more parsimonious model).
    double best = std::numeric_limits<double>::infinity();
    for (const auto& step : result.steps)
        if (std::isfinite(step.statistic)) best = std::min(best, step.statistic);
    for (const auto& step : result.steps) {
        if (!std::isfinite(step.statistic)) continue;
        if (step.statistic <= best + 1e-9 * (1.0 + std::fabs(best))) {
            result.d_hat = step.d0;
            break;
        }
    }
    return result;
}

}  // namespace made
