#include "made/predict.hpp"

#include <cmath>

#include "made/errors.hpp"
#include "made/kernel.hpp"
#include "made/local_fit.hpp"

namespace made {

Predictor::Predictor(const Family& family, const Dataset& training,
                     const MadeFit& fit)
    : family_(family),
      B_(fit.B),
      h_(fit.bandwidth_h),
      phi_(fit.dispersion),
      newton_() {
    const std::vector<int> rows = training.train_indices();
    const int n = static_cast<int>(rows.size());
    reduced_.resize(n, B_.cols());
    ym_.resize(n);
    inv_a_.resize(n);
    offsets_.resize(n);
    wlogf0_terms_.resize(n);
    for (int k = 0; k < n; ++k) {
        const int i = rows[k];
        reduced_.row(k) = training.X.row(i) * B_;
        ym_(k) = family.model_response(training.y(i), training.trial(i));
        inv_a_(k) = 1.0 / family.a_scale(phi_, training.trial(i));
        offsets_(k) = training.offset(i);
        wlogf0_terms_(k) = family.log_f0(training.y(i), phi_, training.trial(i));
    }
}

double Predictor::predict_nw(const Eigen::VectorXd& weights) const {
    return weights.dot(ym_);
}

double Predictor::predict(const Eigen::VectorXd& xstar, PredictorKind kind,
                          double offset_star,
                          PredictionDiagnostics* diag) const {
    if (xstar.size() != B_.rows())
        throw DataError("predict: point dimension does not match the fit");
    if (!xstar.allFinite()) throw DataError("predict: non-finite point");

    const Eigen::VectorXd ustar = B_.transpose() * xstar;
    bool uniform = false;
    const Eigen::VectorXd w = point_weights(reduced_, ustar, h_, &uniform);
    if (uniform && diag) ++diag->uniform_weight_rows;

    if (kind == PredictorKind::NW) return predict_nw(w);

    LocalDesign design;
    const int n = static_cast<int>(reduced_.rows());
    const int d = static_cast<int>(B_.cols());
    design.Z.resize(n, d + 1);
    design.Z.col(0).setOnes();
    design.Z.rightCols(d) = reduced_.rowwise() - ustar.transpose();
    design.w = w;
    design.ym = ym_;
    design.inv_a = inv_a_;
    design.offset = offsets_;
    design.wlogf0 = (w.array() * wlogf0_terms_.array()).sum();

    Eigen::VectorXd xi0 = Eigen::VectorXd::Zero(d + 1);
    xi0(0) = family_.link(family_.clamp_mean(w.dot(ym_)));
    const LocalFit lf = newton_fit(family_, design, xi0, newton_);
    if (!lf.converged || !lf.xi.allFinite()) {
        if (diag) ++diag->nw_fallbacks;
        return predict_nw(w);
    }

    double eta;
    if (kind == PredictorKind::LL1) {
        eta = lf.xi(0);
    } else {
        // LL-II: average the fitted linear predictor over the training
        // points with the same kernel weights.
        const Eigen::VectorXd lin = design.Z * lf.xi;
        eta = w.dot(lin);
    }
    eta += offset_star;
    bool clamped = false;
    eta = family_.clamp_theta(eta, &clamped);
    return family_.mean(eta);
}

Eigen::VectorXd Predictor::predict_batch(const Eigen::MatrixXd& Xstar,
                                         PredictorKind kind,
                                         const Eigen::VectorXd& offsets_star,
                                         PredictionDiagnostics* diag) const {
    if (offsets_star.size() && offsets_star.size() != Xstar.rows())
        throw DataError("predict: offsets length does not match points");
    Eigen::VectorXd out(Xstar.rows());
    for (Eigen::Index i = 0; i < Xstar.rows(); ++i) {
        const double off = offsets_star.size() ? offsets_star(i) : 0.0;
        out(i) = predict(Xstar.row(i).transpose(), kind, off, diag);
    }
    return out;
}

double prediction_error(const Eigen::VectorXd& y_true,
                        const Eigen::VectorXd& y_pred, ErrorMetric metric,
                        double threshold, bool* zero_variance) {
    if (y_true.size() != y_pred.size())
        throw DataError("prediction_error: length mismatch");
    if (y_true.size() == 0) throw DataError("prediction_error: empty input");
    const double n = static_cast<double>(y_true.size());

    if (metric == ErrorMetric::Misclass) {
        double wrong = 0.0;
        for (Eigen::Index i = 0; i < y_true.size(); ++i) {
            if (y_true(i) != 0.0 && y_true(i) != 1.0)
                throw DataError("prediction_error: misclassification needs binary truth");
            const double label = y_pred(i) >= threshold ? 1.0 : 0.0;
            if (label != y_true(i)) wrong += 1.0;
        }
        return wrong / n;
    }

    const double mse = (y_true - y_pred).squaredNorm() / n;
    const double mean = y_true.mean();
    const double var = (y_true.array() - mean).square().sum() / n;
    if (var <= 0.0) {
        if (zero_variance) *zero_variance = true;
        return mse;
    }
    if (zero_variance) *zero_variance = false;
    return mse / var;
}

}  // namespace made
