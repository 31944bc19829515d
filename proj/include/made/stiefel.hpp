#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "made/rng.hpp"

namespace made::stiefel {

// Objective on St(d, p) supplied as a value function together with the
// p x d matrix of Euclidean partials F_B.
struct Objective {
    std::function<double(const Eigen::MatrixXd&)> value;
    std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)> gradient;
};

// exp(A) by Pade(13) with scaling and squaring.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& A);

// QR-based projection back onto the manifold (R-diagonal signs fixed).
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& B);

Eigen::MatrixXd random_semi_orthogonal(int p, int d, Rng& rng);

// Gradient under the canonical metric: G = F_B - B F_B' B.
Eigen::MatrixXd canonical_gradient(const Eigen::MatrixXd& FB,
                                   const Eigen::MatrixXd& B);

// tr(D1' (I - 1/2 B B') D2).
double canonical_inner(const Eigen::MatrixXd& B, const Eigen::MatrixXd& D1,
                       const Eigen::MatrixXd& D2);

// tr(H'H) - 1/2 tr(A'A) with A = B'H; the convergence statistic.
double tangent_norm_sq(const Eigen::MatrixXd& B, const Eigen::MatrixXd& H);

// Factors of the geodesic through B along H: A = (B'H - H'B)/2 and the thin
// QR of (I - BB')H.
struct Geodesic {
    Eigen::MatrixXd A;  // d x d, skew
    Eigen::MatrixXd Q;  // p x d
    Eigen::MatrixXd R;  // d x d
};

Geodesic make_geodesic(const Eigen::MatrixXd& B, const Eigen::MatrixXd& H);

struct GeodesicPoint {
    Eigen::MatrixXd B;  // B(t)
    Eigen::MatrixXd M;  // M(t)
    Eigen::MatrixXd N;  // N(t)
};

// B(t) = B M(t) + Q N(t) with (M; N) = exp(t [[A, -R'], [R, 0]]) [I; 0].
GeodesicPoint geodesic_step(const Eigen::MatrixXd& B, const Geodesic& geo,
                            double t);

// tau H = H M(t) - B R' N(t), the tangent direction carried to B(t).
Eigen::MatrixXd parallel_transport(const Eigen::MatrixXd& H,
                                   const Eigen::MatrixXd& B, const Geodesic& geo,
                                   const GeodesicPoint& point);

struct LineSearchOptions {
    int iterations = 24;      // golden-section refinements per window
    int max_shrinks = 20;     // geometric window shrinks before stalling
};

struct LineSearchResult {
    double t = 0.0;
    double value = 0.0;  // objective (maximization sense) at t
    bool stalled = false;
    int evaluations = 0;
};

// Maximizes value(B(t)) over t in [0, window], shrinking the window when no
// improvement over value at t=0 is found. Stalls with t=0 after max_shrinks.
LineSearchResult line_search(const std::function<double(double)>& value_at,
                             double f0, double window,
                             const LineSearchOptions& options = {});

struct CgOptions {
    double tol = 1e-8;
    int max_iter = 200;
    // Stop once an accepted step improves the objective by less than
    // min_gain * (1 + |objective|); zero keeps iterating to the gradient
    // tolerance.
    double min_gain = 0.0;
    LineSearchOptions line_search;
};

struct CgTraceRow {
    int iteration;
    double objective;
    double gradient_stat;  // tr(G'G) - 1/2 tr(A'A)
    double step;
    double orth_error;     // ||B'B - I||_F
};

struct CgResult {
    Eigen::MatrixXd B;
    double objective = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<CgTraceRow> trace;
};

// Conjugate gradient ascent of the objective over St(d, p): geodesic line
// searches, parallel transport, Polak-Ribiere-style gamma with tau G_k = G_k,
// and direction resets every d(p-d) + d(d-1)/2 iterations.
CgResult cg_maximize(const Objective& objective, const Eigen::MatrixXd& B0,
                     const CgOptions& options = {});

}  // namespace made::stiefel
