#include "made/kernel.hpp"

#include <cmath>

#include "made/errors.hpp"

namespace made {

Bandwidth bandwidth_from_rule(double c, int n, int d) {
    if (!(c > 0.0)) throw ConfigError("bandwidth multiplier c must be positive");
    if (n < 1) throw ConfigError("bandwidth rule requires n >= 1");
    if (d < 1) throw ConfigError("bandwidth rule requires d >= 1");
    return Bandwidth{c, c * std::pow(static_cast<double>(n), -1.0 / (d + 4.0))};
}

double gaussian_kernel(const Eigen::VectorXd& u) {
    const double dim = static_cast<double>(u.size());
    return std::pow(2.0 * M_PI, -0.5 * dim) * std::exp(-0.5 * u.squaredNorm());
}

namespace {

std::vector<int> all_indices(int n) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

}  // namespace

WeightMatrix kernel_weights(const Eigen::MatrixXd& coords, double h,
                            const std::vector<int>& eval_points,
                            const std::vector<int>& train_points) {
    if (!(h > 0.0)) throw ConfigError("kernel bandwidth h must be positive");
    const int n = static_cast<int>(coords.rows());
    const std::vector<int> evals = eval_points.empty() ? all_indices(n) : eval_points;
    const std::vector<int> trains = train_points.empty() ? all_indices(n) : train_points;

    WeightMatrix result;
    result.w.resize(static_cast<int>(evals.size()), static_cast<int>(trains.size()));
    const double inv2h2 = 1.0 / (2.0 * h * h);
    for (std::size_t je = 0; je < evals.size(); ++je) {
        const auto uj = coords.row(evals[je]);
        for (std::size_t it = 0; it < trains.size(); ++it) {
            const double d2 = (coords.row(trains[it]) - uj).squaredNorm();
            result.w(je, it) = std::exp(-d2 * inv2h2);
        }
        const double total = result.w.row(je).sum();
        if (total > 0.0) {
            result.w.row(je) /= total;
        } else {
            result.w.row(je).setConstant(1.0 / static_cast<double>(trains.size()));
            result.uniform_rows.push_back(static_cast<int>(je));
        }
    }
    return result;
}

WeightMatrix raw_weights(const Eigen::MatrixXd& X, const Bandwidth& bw,
                         const std::vector<int>& eval_points,
                         const std::vector<int>& train_points) {
    if (X.rows() < 2) throw DataError("raw_weights: need at least two observations");
    return kernel_weights(X, bw.h, eval_points, train_points);
}

WeightMatrix refined_weights(const Eigen::MatrixXd& X, const Eigen::MatrixXd& B,
                             const Bandwidth& bw,
                             const std::vector<int>& eval_points,
                             const std::vector<int>& train_points) {
    if (B.rows() != X.cols())
        throw DataError("refined_weights: basis row count must match predictor count");
    return kernel_weights(X * B, bw.h, eval_points, train_points);
}

Eigen::VectorXd point_weights(const Eigen::MatrixXd& reduced_train,
                              const Eigen::VectorXd& reduced_point, double h,
                              bool* uniform_fallback) {
    const int n = static_cast<int>(reduced_train.rows());
    Eigen::VectorXd w(n);
    const double inv2h2 = 1.0 / (2.0 * h * h);
    for (int i = 0; i < n; ++i) {
        const double d2 = (reduced_train.row(i).transpose() - reduced_point).squaredNorm();
        w(i) = std::exp(-d2 * inv2h2);
    }
    const double total = w.sum();
    if (total > 0.0) {
        w /= total;
        if (uniform_fallback) *uniform_fallback = false;
    } else {
        w.setConstant(1.0 / n);
        if (uniform_fallback) *uniform_fallback = true;
    }
    return w;
}

}  // namespace made
