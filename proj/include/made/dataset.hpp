#pragma once

#include <Eigen/Core>
#include <vector>

#include "made/family.hpp"

namespace made {

// Regression data plus per-observation context. Train (M) and eval (N) index
// sets default to all rows when left empty.
struct Dataset {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    Eigen::VectorXd trials;   // m_i; empty means all ones
    Eigen::VectorXd offsets;  // empty means all zeros
    double dispersion = 1.0;  // phi
    std::vector<int> train;   // M
    std::vector<int> eval;    // N

    int n() const { return static_cast<int>(X.rows()); }
    int p() const { return static_cast<int>(X.cols()); }

    double trial(int i) const { return trials.size() ? trials(i) : 1.0; }
    double offset(int i) const { return offsets.size() ? offsets(i) : 0.0; }

    std::vector<int> train_indices() const;
    std::vector<int> eval_indices() const;

    // Row subset (contexts included; index sets cleared).
    Dataset subset(const std::vector<int>& rows) const;

    // Checks finiteness, support membership and index ranges.
    void validate(const Family& family) const;
};

}  // namespace made
