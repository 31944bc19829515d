#include "made/simulate.hpp"

#include <cmath>

#include "made/errors.hpp"
#include "made/parallel.hpp"

namespace made {

SimDesign design_from_name(const std::string& name) {
    if (name == "binomial-inverse") return SimDesign::BinomialInverse;
    if (name == "gaussian-forward") return SimDesign::GaussianForward;
    if (name == "poisson-forward") return SimDesign::PoissonForward;
    if (name == "binomial-pred") return SimDesign::BinomialPred;
    if (name == "gaussian-pred") return SimDesign::GaussianPred;
    if (name == "poisson-pred") return SimDesign::PoissonPred;
    throw ConfigError("unknown simulation design '" + name + "'");
}

std::string design_name(SimDesign design) {
    switch (design) {
        case SimDesign::BinomialInverse: return "binomial-inverse";
        case SimDesign::GaussianForward: return "gaussian-forward";
        case SimDesign::PoissonForward: return "poisson-forward";
        case SimDesign::BinomialPred: return "binomial-pred";
        case SimDesign::GaussianPred: return "gaussian-pred";
        case SimDesign::PoissonPred: return "poisson-pred";
    }
    return "";
}

Family design_family(SimDesign design) {
    switch (design) {
        case SimDesign::BinomialInverse:
        case SimDesign::BinomialPred:
            return Family::binomial();
        case SimDesign::GaussianForward:
        case SimDesign::GaussianPred:
            return Family::gaussian(0.09);
        case SimDesign::PoissonForward:
        case SimDesign::PoissonPred:
            return Family::poisson();
    }
    return Family::gaussian();
}

Eigen::VectorXd design_beta() {
    Eigen::VectorXd beta(6);
    beta << -1.0, 1.0, -1.0, 2.0, -2.0, 2.0;
    return beta / std::sqrt(15.0);
}

double gaussian_design_mean(double t) {
    return std::exp(1.8 * t) / (1.0 + std::exp(5.0 * t * t));
}

namespace {

// Mixed predictor vector of the Gaussian design: Bernoulli(0.7),
// Binomial(5, 0.8), Exp(3), Exp(3), Unif(-2, 2), Gamma(5, 10).
Eigen::VectorXd gaussian_design_predictors(Rng& rng) {
    Eigen::VectorXd x(6);
    x(0) = rng.bernoulli(0.7) ? 1.0 : 0.0;
    x(1) = rng.binomial(5.0, 0.8);
    x(2) = rng.exponential(3.0);
    x(3) = rng.exponential(3.0);
    x(4) = rng.uniform(-2.0, 2.0);
    x(5) = rng.gamma(5.0, 10.0);
    return x;
}

}  // namespace

Dataset generate(SimDesign design, int n, Rng& rng) {
    const Eigen::VectorXd beta = design_beta();
    Dataset data;
    data.X.resize(n, 6);
    data.y.resize(n);

    switch (design) {
        case SimDesign::BinomialInverse:
        case SimDesign::BinomialPred: {
            const double prob =
                design == SimDesign::BinomialInverse ? 0.7 : 0.52;
            for (int i = 0; i < n; ++i) {
                data.y(i) = rng.bernoulli(prob) ? 1.0 : 0.0;
                for (int j = 0; j < 6; ++j)
                    data.X(i, j) = beta(j) * data.y(i) + 0.5 * rng.normal();
            }
            break;
        }
        case SimDesign::GaussianForward:
        case SimDesign::GaussianPred: {
            for (int i = 0; i < n; ++i) {
                const Eigen::VectorXd x = gaussian_design_predictors(rng);
                data.X.row(i) = x.transpose();
                data.y(i) = rng.normal(gaussian_design_mean(beta.dot(x)), 0.3);
            }
            data.dispersion = 0.09;
            break;
        }
        case SimDesign::PoissonForward:
        case SimDesign::PoissonPred: {
            const double lo = design == SimDesign::PoissonForward ? 0.0 : -1.0;
            const double hi = design == SimDesign::PoissonForward ? 3.0 : 2.0;
            const double scale = design == SimDesign::PoissonForward ? 3.5 : 4.0;
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < 6; ++j) data.X(i, j) = rng.uniform(lo, hi);
                const double t = beta.dot(data.X.row(i));
                data.y(i) = rng.poisson(scale * std::exp(std::sin(M_PI * t / 2.0)));
            }
            break;
        }
    }
    return data;
}

std::vector<DistanceRow> run_distance_experiment(SimDesign design,
                                                 const std::vector<int>& n_grid,
                                                 int replicates,
                                                 const MadeConfig& config,
                                                 std::uint64_t seed,
                                                 int threads) {
    if (replicates < 1) throw ConfigError("replicates must be >= 1");
    const Family family = design_family(design);
    const Eigen::VectorXd beta = design_beta();

    MadeConfig inner = config;
    inner.d = 1;
    inner.threads = 1;

    std::vector<DistanceRow> rows(n_grid.size() * replicates);
    parallel_for(
        rows.size(),
        [&](std::size_t idx) {
            const int ni = static_cast<int>(idx) / replicates;
            const int rep = static_cast<int>(idx) % replicates;
            DistanceRow& row = rows[idx];
            row.design = design_name(design);
            row.n = n_grid[ni];
            row.replicate = rep;
            Rng rng = Rng::child(seed, idx);
            try {
                Dataset data = generate(design, row.n, rng);
                const MadeFit f = fit(family, data, inner);
                row.rho = subspace_distance(beta, f.B);
            } catch (const std::exception& e) {
                row.ok = false;
                row.note = e.what();
            }
        },
        threads);
    return rows;
}

std::vector<PredictionRow> run_prediction_experiment(SimDesign design, int n,
                                                     int n_e, int replicates,
                                                     const MadeConfig& config,
                                                     std::uint64_t seed,
                                                     int threads) {
    if (replicates < 1) throw ConfigError("replicates must be >= 1");
    std::vector<PredictionRow> rows;
    if (n_e == 0) return rows;

    const Family family = design_family(design);
    const bool binary = design == SimDesign::BinomialInverse ||
                        design == SimDesign::BinomialPred;
    const ErrorMetric metric =
        binary ? ErrorMetric::Misclass : ErrorMetric::ScaledMse;

    MadeConfig inner = config;
    inner.d = 1;
    inner.threads = 1;

    const std::vector<std::pair<PredictorKind, std::string>> predictors = {
        {PredictorKind::NW, "nw"},
        {PredictorKind::LL1, "ll1"},
        {PredictorKind::LL2, "ll2"},
    };

    rows.resize(static_cast<std::size_t>(replicates) * predictors.size());
    parallel_for(
        static_cast<std::size_t>(replicates),
        [&](std::size_t rep) {
            Rng rng = Rng::child(seed, rep);
            Dataset train = generate(design, n, rng);
            Dataset test = generate(design, n_e, rng);
            bool fit_ok = true;
            std::string note;
            MadeFit f;
            try {
                f = fit(family, train, inner);
            } catch (const std::exception& e) {
                fit_ok = false;
                note = e.what();
            }
            for (std::size_t pi = 0; pi < predictors.size(); ++pi) {
                PredictionRow& row = rows[rep * predictors.size() + pi];
                row.design = design_name(design);
                row.n = n;
                row.replicate = static_cast<int>(rep);
                row.predictor = predictors[pi].second;
                if (!fit_ok) {
                    row.ok = false;
                    row.note = note;
                    continue;
                }
                try {
                    const Predictor pred(family, train, f);
                    const Eigen::VectorXd yhat =
                        pred.predict_batch(test.X, predictors[pi].first);
                    row.error = prediction_error(test.y, yhat, metric);
                } catch (const std::exception& e) {
                    row.ok = false;
                    row.note = e.what();
                }
            }
        },
        threads);
    return rows;
}

}  // namespace made
