#pragma once

#include <Eigen/Core>
#include <vector>

namespace made {

// Bandwidth rule h = c n^(-1/(d+4)); the matrix bandwidth is h I_d for
// reduced coordinates (h I_p for raw weights).
struct Bandwidth {
    double c = 1.0;
    double h = 1.0;
};

Bandwidth bandwidth_from_rule(double c, int n, int d);

// (2 pi)^(-dim/2) exp(-u'u / 2).
double gaussian_kernel(const Eigen::VectorXd& u);

// Row-stochastic kernel weight matrix: rows indexed by evaluation points,
// columns by training points. Rows whose kernel mass underflowed to zero are
// replaced by uniform weights and listed in uniform_rows.
struct WeightMatrix {
    Eigen::MatrixXd w;
    std::vector<int> uniform_rows;
    bool any_uniform() const { return !uniform_rows.empty(); }
};

// Weights on given coordinates (raw X or reduced X B): entry (j, i) is
// K_h(U_i - U_j) normalized over the training points i. Empty index sets mean
// "all rows".
WeightMatrix kernel_weights(const Eigen::MatrixXd& coords, double h,
                            const std::vector<int>& eval_points = {},
                            const std::vector<int>& train_points = {});

WeightMatrix raw_weights(const Eigen::MatrixXd& X, const Bandwidth& bw,
                         const std::vector<int>& eval_points = {},
                         const std::vector<int>& train_points = {});

// Eq.-style refinement: weights computed on the reduced data X B.
WeightMatrix refined_weights(const Eigen::MatrixXd& X, const Eigen::MatrixXd& B,
                             const Bandwidth& bw,
                             const std::vector<int>& eval_points = {},
                             const std::vector<int>& train_points = {});

// Weight row for a single out-of-sample point: K_h(B'(X_i - x*)) normalized
// over training rows of the reduced coordinates.
Eigen::VectorXd point_weights(const Eigen::MatrixXd& reduced_train,
                              const Eigen::VectorXd& reduced_point, double h,
                              bool* uniform_fallback = nullptr);

}  // namespace made
