#pragma once

#include <optional>
#include <string>
#include <vector>

#include "made/estimator.hpp"
#include "made/family.hpp"

namespace made {

// Versioned on-disk record of a fit: the estimated basis and local
// coefficients plus enough configuration echo to reproduce predictions
// against the original training file.
struct FitDocument {
    int version = 1;

    std::string family;
    std::optional<double> shape;
    double dispersion = 1.0;

    // config echo
    int d = 1;
    double bandwidth_c = 1.0;
    std::optional<double> bandwidth_h_override;
    std::string weight_mode = "refined";
    std::string init = "pfc";
    double outer_tol = 1e-4;
    int outer_max_iter = 100;
    std::uint64_t seed = 0;

    // data echo
    std::string response;
    std::vector<std::string> predictors;
    std::string trials_column;
    std::string offset_column;
    bool standardized = false;
    Eigen::VectorXd centers;
    Eigen::VectorXd scales;

    // results
    double bandwidth_h = 0.0;
    bool converged = false;
    int outer_iterations = 0;
    double objective = 0.0;
    Eigen::MatrixXd B;       // p x d, row-major in the document
    Eigen::VectorXd alpha;
    Eigen::MatrixXd gamma;   // n x d
    std::vector<OuterTraceRow> trace;

    Family make_family() const;
    MadeConfig make_config() const;
};

FitDocument make_document(const Family& family, const MadeConfig& config,
                          const MadeFit& fit);

void save_fit(const std::string& path, const FitDocument& doc);
FitDocument load_fit(const std::string& path);

std::string to_json_string(const FitDocument& doc);
FitDocument from_json_string(const std::string& text);

}  // namespace made
