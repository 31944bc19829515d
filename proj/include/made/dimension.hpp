#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "made/dataset.hpp"
#include "made/estimator.hpp"
#include "made/family.hpp"
#include "made/predict.hpp"

namespace made {

enum class DimMethod { Permutation, Bootstrap, CrossValidation };
enum class GammaSummary { Mean, MeanAbs };
enum class CvLoss { Squared, Absolute, Misclass };

struct DimOptions {
    int r_perm = 100;
    int r_boot = 100;
    double level = 0.05;
    int kfolds = 5;
    GammaSummary summary = GammaSummary::Mean;
    PredictorKind cv_predictor = PredictorKind::NW;
    CvLoss cv_loss = CvLoss::Squared;
    std::uint64_t seed = 0;
    int threads = 0;
    // Budget on the number of model fits across a sequential run; exhausted
    // budgets return a partial result.
    long max_fits = 1000000000L;
};

struct DimStep {
    int d0;
    double statistic;   // u-hat, lambda-hat, or the CV loss for d = d0
    double p_value;     // NaN for cross-validation rows
    int replicates_used = 0;
    int replicates_failed = 0;
    bool rejected = false;
};

struct DimTestResult {
    int d_hat = 0;
    DimMethod method = DimMethod::Permutation;
    std::uint64_t seed = 0;
    std::vector<DimStep> steps;
    bool complete = true;
    std::vector<std::string> warnings;
};

struct PermTestOutcome {
    double p_value;
    double statistic;
    int replicates_used;
    int replicates_failed;
    long fits = 0;
};

// Tests H0: d = d0 against d = d0 + 1. For d0 = 0 the alternative is a plain
// one-dimensional fit; for d0 > 0 the extra direction is fit on the unit
// sphere inside the orthogonal complement of the H0 estimate, which is not
// refit. The statistic is a summary of the extra local loadings and the null
// distribution comes from refits on permuted responses.
PermTestOutcome permutation_test(const Family& family, const Dataset& data,
                                 const MadeConfig& config, int d0,
                                 const DimOptions& options);

struct BootTestOutcome {
    double p_value;
    double lambda;
    int replicates_used;
    int replicates_failed;
    long fits = 0;
};

// Likelihood-ratio-style statistic between the fits at d0 and d0 + 1, with
// the null distribution from a parametric bootstrap at the d0 fit.
BootTestOutcome bootstrap_lrt(const Family& family, const Dataset& data,
                              const MadeConfig& config, int d0,
                              const DimOptions& options);

// Sequential testing d0 = 0, 1, ... until the first non-rejection; the
// cross-validation method instead scans all d and minimizes the loss.
DimTestResult sequential_dimension(const Family& family, const Dataset& data,
                                   const MadeConfig& config, DimMethod method,
                                   const DimOptions& options);

// K-fold cross-validated prediction loss per dimension; d_hat minimizes the
// total loss (ties resolved toward the smaller dimension).
DimTestResult cv_dimension(const Family& family, const Dataset& data,
                           const MadeConfig& config, const DimOptions& options);

}  // namespace made
