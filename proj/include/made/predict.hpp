#pragma once

#include <Eigen/Core>

#include "made/dataset.hpp"
#include "made/estimator.hpp"
#include "made/family.hpp"

namespace made {

enum class PredictorKind { NW, LL1, LL2 };

enum class ErrorMetric { Misclass, ScaledMse };

struct PredictionDiagnostics {
    int uniform_weight_rows = 0;  // kernel underflow fallbacks
    int nw_fallbacks = 0;         // LL fits replaced by NW
};

// Predicts E(Y | X*) from a fitted reduction. NW averages the (model-scale)
// responses with kernel weights on Bhat'X; LL-I refits the local likelihood
// at X* and returns g^-1(alpha); LL-II additionally averages the fitted
// linear predictor over the training points.
class Predictor {
public:
    Predictor(const Family& family, const Dataset& training, const MadeFit& fit);

    double predict(const Eigen::VectorXd& xstar, PredictorKind kind,
                   double offset_star = 0.0,
                   PredictionDiagnostics* diag = nullptr) const;

    Eigen::VectorXd predict_batch(const Eigen::MatrixXd& Xstar,
                                  PredictorKind kind,
                                  const Eigen::VectorXd& offsets_star = {},
                                  PredictionDiagnostics* diag = nullptr) const;

    const Eigen::MatrixXd& basis() const { return B_; }
    double bandwidth() const { return h_; }

private:
    double predict_nw(const Eigen::VectorXd& weights) const;

    Family family_;
    Eigen::MatrixXd B_;        // p x d
    Eigen::MatrixXd reduced_;  // training rows projected, n x d
    Eigen::VectorXd ym_;       // model-scale training responses
    Eigen::VectorXd inv_a_;
    Eigen::VectorXd offsets_;
    Eigen::VectorXd wlogf0_terms_;
    double h_;
    double phi_;
    NewtonOptions newton_;
};

// Misclassification rate (threshold on the predicted probability) or mean
// squared error scaled by the variance of the observed responses. A zero
// response variance flags and returns the unscaled MSE.
double prediction_error(const Eigen::VectorXd& y_true,
                        const Eigen::VectorXd& y_pred, ErrorMetric metric,
                        double threshold = 0.5, bool* zero_variance = nullptr);

}  // namespace made
