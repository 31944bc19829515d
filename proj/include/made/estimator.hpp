#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "made/dataset.hpp"
#include "made/family.hpp"
#include "made/kernel.hpp"
#include "made/local_fit.hpp"
#include "made/stiefel.hpp"

namespace made {

enum class WeightMode { Raw, Refined };
enum class InitMode { Pfc, Random, User };
enum class DispersionMode { Known, Estimate };

struct MadeConfig {
    int d = 1;
    double bandwidth_c = 1.0;
    std::optional<double> bandwidth_h;  // explicit h wins over the rule
    WeightMode weight_mode = WeightMode::Refined;
    InitMode init = InitMode::Pfc;
    Eigen::MatrixXd user_init;
    double outer_tol = 1e-4;
    int outer_max_iter = 100;
    DispersionMode dispersion_mode = DispersionMode::Known;
    NewtonOptions newton;
    stiefel::CgOptions cg;
    int threads = 0;
    std::uint64_t seed = 0;  // random initialization stream

    // h = c n^(-1/(d+4)) unless overridden.
    double resolve_bandwidth(int n) const;
    void validate(int p) const;
};

struct OuterTraceRow {
    int iteration;
    char phase;  // 'x' after the coefficient step, 'B' after the B step
    double objective;
    double subspace_delta;
};

struct MadeFit {
    Eigen::MatrixXd B;      // p x d
    Eigen::VectorXd alpha;  // per evaluation point
    Eigen::MatrixXd gamma;  // n_eval x d
    std::vector<LocalFit> local;
    WeightMatrix weights;   // final weights (n_eval x n_train)
    double bandwidth_h = 0.0;
    double dispersion = 1.0;
    double objective = 0.0;
    bool converged = false;
    int outer_iterations = 0;
    std::vector<OuterTraceRow> trace;
    std::vector<int> eval_points;
    std::vector<int> train_points;

    // Fitted canonical parameter alpha_j + offset_j at evaluation point j.
    Eigen::VectorXd fitted_theta(const Dataset& data) const;
    Eigen::VectorXd fitted_means(const Family& family, const Dataset& data) const;
};

// Full local log-likelihood, Eq.-(4)-style double sum over eval x train with
// the supplied weights; -inf when any linear predictor leaves the domain.
double objective_q(const Family& family, const Dataset& data,
                   const Eigen::VectorXd& alphas, const Eigen::MatrixXd& gammas,
                   const Eigen::MatrixXd& B, const WeightMatrix& weights);

// d(objective)/dB with the weights treated as constants.
Eigen::MatrixXd gradient_q_wrt_b(const Family& family, const Dataset& data,
                                 const Eigen::VectorXd& alphas,
                                 const Eigen::MatrixXd& gammas,
                                 const Eigen::MatrixXd& B,
                                 const WeightMatrix& weights);

struct PfcInit {
    Eigen::MatrixXd B;
    bool degenerate = false;  // rank-deficient moment matrix path
};

// First d eigenvectors of the fitted covariance X'F(F'F)^-1 F'X / n with
// F_i = (Y_i, ..., Y_i^d) and X centered.
PfcInit init_pfc(const Dataset& data, int d);

// rho(S_B, S_Bhat) = ||(I - Bhat Bhat') B||_F.
double subspace_distance(const Eigen::MatrixXd& B_true,
                         const Eigen::MatrixXd& B_hat);

// Gaussian: mean squared residual; other families: 1-D maximization of the
// objective over the dispersion with everything else held fixed.
double estimate_dispersion(const Family& family, const Dataset& data,
                           const Eigen::VectorXd& alphas,
                           const Eigen::MatrixXd& gammas,
                           const Eigen::MatrixXd& B, const WeightMatrix& weights);

// Optional warm start for the local coefficients (used by nested-model fits).
struct WarmStart {
    Eigen::VectorXd alpha;
    Eigen::MatrixXd gamma;
};

MadeFit fit(const Family& family, const Dataset& data, const MadeConfig& config,
            const WarmStart* warm = nullptr);

}  // namespace made
