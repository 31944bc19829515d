#pragma once

// Test-only oracles, independent of the library code paths they check:
// central finite differences, closed-form weighted least squares, and random
// in-domain natural parameters per family.

#include <Eigen/Dense>
#include <functional>

#include "made/family.hpp"
#include "made/rng.hpp"

namespace oracles {

inline double central_diff(const std::function<double(double)>& f, double x,
                           double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Elementwise central finite differences of a matrix-argument scalar function.
inline Eigen::MatrixXd central_diff_matrix(
    const std::function<double(const Eigen::MatrixXd&)>& f,
    const Eigen::MatrixXd& X, double h) {
    Eigen::MatrixXd g(X.rows(), X.cols());
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        for (Eigen::Index c = 0; c < X.cols(); ++c) {
            Eigen::MatrixXd Xp = X, Xm = X;
            Xp(r, c) += h;
            Xm(r, c) -= h;
            g(r, c) = (f(Xp) - f(Xm)) / (2.0 * h);
        }
    }
    return g;
}

// (Z'WZ)^-1 Z'W y.
inline Eigen::VectorXd wls_solution(const Eigen::MatrixXd& Z,
                                    const Eigen::VectorXd& w,
                                    const Eigen::VectorXd& y) {
    const Eigen::MatrixXd ZtW = Z.transpose() * w.asDiagonal();
    return (ZtW * Z).ldlt().solve(ZtW * y);
}

// A random natural parameter well inside the family's domain.
inline double random_theta(const made::Family& family, made::Rng& rng) {
    switch (family.name()) {
        case made::FamilyName::Binomial:
        case made::FamilyName::Gaussian:
            return rng.uniform(-4.0, 4.0);
        case made::FamilyName::Poisson:
            return rng.uniform(-4.0, 3.0);
        case made::FamilyName::Geometric:
        case made::FamilyName::NegBin:
            return rng.uniform(-5.0, -0.05);
        case made::FamilyName::Exponential:
        case made::FamilyName::Gamma:
        case made::FamilyName::InvGaussian:
            return rng.uniform(-8.0, -0.05);
    }
    return -1.0;
}

inline std::vector<made::Family> all_families() {
    return {made::Family::binomial(),
            made::Family::poisson(),
            made::Family::geometric(),
            made::Family::negbin(0.7),
            made::Family::gaussian(1.3),
            made::Family::exponential(),
            made::Family::gamma(2.5),
            made::Family::inverse_gaussian(1.8)};
}

}  // namespace oracles
