#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "made/dataset.hpp"
#include "made/estimator.hpp"
#include "made/family.hpp"
#include "made/predict.hpp"
#include "made/rng.hpp"

namespace made {

// The six simulation designs: three subspace-recovery settings and their
// prediction-study variants. All share the fixed unit direction
// beta = (-1, 1, -1, 2, -2, 2)' / sqrt(15) in six predictors.
enum class SimDesign {
    BinomialInverse,
    GaussianForward,
    PoissonForward,
    BinomialPred,
    GaussianPred,
    PoissonPred,
};

SimDesign design_from_name(const std::string& name);
std::string design_name(SimDesign design);

// The response family used to fit each design.
Family design_family(SimDesign design);

Eigen::VectorXd design_beta();

// Mean curve of the Gaussian designs: exp(1.8 t) / (1 + exp(5 t^2)).
double gaussian_design_mean(double t);

Dataset generate(SimDesign design, int n, Rng& rng);

struct DistanceRow {
    std::string design;
    int n = 0;
    int replicate = 0;
    double rho = 0.0;
    bool ok = true;
    std::string note;
};

// Per (n, replicate): generate, fit at the true d = 1, record the subspace
// distance to the generating direction.
std::vector<DistanceRow> run_distance_experiment(SimDesign design,
                                                 const std::vector<int>& n_grid,
                                                 int replicates,
                                                 const MadeConfig& config,
                                                 std::uint64_t seed,
                                                 int threads = 0);

struct PredictionRow {
    std::string design;
    int n = 0;
    int replicate = 0;
    std::string predictor;
    double error = 0.0;
    bool ok = true;
    std::string note;
};

// Per replicate: train on n points, predict n_e fresh points with each of the
// three predictors, record the design's error metric (misclassification for
// the Bernoulli design, variance-scaled MSE otherwise).
std::vector<PredictionRow> run_prediction_experiment(SimDesign design, int n,
                                                     int n_e, int replicates,
                                                     const MadeConfig& config,
                                                     std::uint64_t seed,
                                                     int threads = 0);

}  // namespace made
