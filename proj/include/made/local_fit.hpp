#pragma once

#include <Eigen/Core>

#include "made/family.hpp"

namespace made {

// Design for one evaluation point X: rows Z_i = (1, (X_i - X)'B), diagonal
// kernel weights, responses on the model scale and the per-observation
// dispersion factors 1/a_i(phi).
struct LocalDesign {
    Eigen::MatrixXd Z;        // n x (d+1), first column all ones
    Eigen::VectorXd w;        // kernel weights, nonnegative, sum 1
    Eigen::VectorXd ym;       // model-scale responses
    Eigen::VectorXd inv_a;    // 1 / a_i(phi)
    Eigen::VectorXd offset;   // added to Z_i' xi
    double wlogf0 = 0.0;      // sum_i w_i log f0(y_i, phi)
};

struct NewtonOptions {
    double tol = 1e-8;
    int max_iter = 50;
    int max_halvings = 30;
};

struct LocalFit {
    Eigen::VectorXd xi;   // (alpha, gamma)
    bool converged = false;
    int iterations = 0;
    double final_step_norm = 0.0;
    double loglik = 0.0;
    bool ridged = false;
    bool domain_clamped = false;
};

// theta_i = Z_i' xi + offset_i, clamped into the open natural-parameter
// domain; sets *clamped when any entry needed pulling back.
Eigen::ArrayXd local_theta(const Family& family, const LocalDesign& design,
                           const Eigen::VectorXd& xi, bool* clamped = nullptr);

// Weighted local log-likelihood sum_i w_i [ (ym_i theta_i - b(theta_i)) / a_i
// + log f0 ]; -inf when b overflows.
double local_loglik(const Family& family, const LocalDesign& design,
                    const Eigen::VectorXd& xi);

// Z' W H(xi) with H_i = (ym_i - b'(theta_i)) / a_i.
Eigen::VectorXd local_score(const Family& family, const LocalDesign& design,
                            const Eigen::VectorXd& xi);

// Z' W J_H(xi), symmetric negative semi-definite.
Eigen::MatrixXd local_jacobian(const Family& family, const LocalDesign& design,
                               const Eigen::VectorXd& xi);

// Newton-Raphson ascent with step halving; ridge fallback on a numerically
// singular Hessian. Accepted steps never decrease the local log-likelihood.
LocalFit newton_fit(const Family& family, const LocalDesign& design,
                    const Eigen::VectorXd& xi0, const NewtonOptions& options = {});

}  // namespace made
