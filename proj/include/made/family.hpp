#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>

#include "made/rng.hpp"

namespace made {

enum class FamilyName {
    Binomial,
    Poisson,
    Geometric,
    NegBin,
    Gaussian,
    Exponential,
    Gamma,
    InvGaussian,
};

// One-parameter exponential family
//   f(y | theta) = f0(y, phi) exp{ [y theta - b(theta)] / a(phi) },
// parameterized by its cumulant function b and canonical link. Binomial
// responses are stored as success counts y with trials m; the model works on
// y/m with a(phi) = 1/m. The dispersion phi enters a(phi) and f0 only
// (sigma^2 for Gaussian, 1/kappa for Gamma and inverse Gaussian, 1 elsewhere).
class Family {
public:
    static Family binomial();
    static Family poisson();
    static Family geometric();
    static Family negbin(double kappa);
    static Family gaussian(double sigma2 = 1.0);
    static Family exponential();
    static Family gamma(double kappa);
    static Family inverse_gaussian(double kappa);

    // CLI/config entry point: lower-case name plus optional shape parameter.
    static Family from_name(const std::string& name,
                            std::optional<double> shape = std::nullopt);

    FamilyName name() const { return name_; }
    const std::string& label() const { return label_; }
    // kappa for NegBin/Gamma/InvGaussian, sigma^2 for Gaussian, unset otherwise.
    std::optional<double> shape() const { return shape_; }
    bool supports_offset() const { return supports_offset_; }

    // Natural-parameter domain is (-inf, theta_sup). theta_sup is 0 for the
    // negative-domain families and +inf otherwise.
    double theta_sup() const { return theta_sup_; }
    bool in_domain(double theta) const { return theta < theta_sup_; }
    void require_domain(double theta) const;
    // Pulls an optimizer proposal back into the open domain (margin 1e-10).
    double clamp_theta(double theta, bool* clamped = nullptr) const;

    double b(double theta) const;
    double mean(double theta) const;            // b'
    double variance_scale(double theta) const;  // b''
    double link(double mu) const;               // canonical link g, inverse of b'
    // Clamp a mean value into the interior of the mean domain so that link()
    // is finite (used for intercept starting values).
    double clamp_mean(double mu) const;

    // Vectorized b and b' over an array of in-domain theta values.
    Eigen::ArrayXd b(const Eigen::ArrayXd& theta) const;
    Eigen::ArrayXd mean(const Eigen::ArrayXd& theta) const;
    // Allocation-free variants for hot loops.
    void b_into(const Eigen::ArrayXd& theta, Eigen::ArrayXd& out) const;
    void mean_into(const Eigen::ArrayXd& theta, Eigen::ArrayXd& out) const;

    double default_dispersion() const { return default_dispersion_; }
    double a_scale(double phi, double trials) const { return phi / trials; }

    bool in_support(double y, double trials) const;
    void require_support(double y, double trials) const;
    // Response on the model scale: y/m for Binomial, y otherwise.
    double model_response(double y, double trials) const;

    double log_f0(double y, double phi, double trials) const;
    double loglik(double y, double theta, double phi, double trials = 1.0) const;
    double saturated_loglik(double y, double phi, double trials = 1.0) const;
    double deviance(double y, double theta, double phi, double trials = 1.0) const;

    // Random draw on the stored response scale (a count for Binomial), with
    // E[y/m] = b'(theta) and Var[y/m] = a(phi) b''(theta).
    double sample(double theta, double phi, double trials, Rng& rng) const;

private:
    Family(FamilyName name, std::string label, std::optional<double> shape,
           bool supports_offset, double theta_sup, double default_dispersion)
        : name_(name),
          label_(std::move(label)),
          shape_(shape),
          supports_offset_(supports_offset),
          theta_sup_(theta_sup),
          default_dispersion_(default_dispersion) {}

    double kappa() const { return *shape_; }

    FamilyName name_;
    std::string label_;
    std::optional<double> shape_;
    bool supports_offset_;
    double theta_sup_;
    double default_dispersion_;
};

}  // namespace made
