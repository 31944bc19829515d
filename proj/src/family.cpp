#include "made/family.hpp"

#include <cmath>
#include <limits>

#include "made/errors.hpp"

namespace made {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kThetaMargin = 1e-10;
constexpr double kMeanMargin = 1e-10;

double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double logistic(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                    : std::exp(x) / (1.0 + std::exp(x));
}

double log_choose(double m, double y) {
    return std::lgamma(m + 1.0) - std::lgamma(y + 1.0) - std::lgamma(m - y + 1.0);
}

bool near_integerish(double y) { return y >= 0.0 && std::isfinite(y); }

}  // namespace

Family Family::binomial() {
    return Family(FamilyName::Binomial, "binomial", std::nullopt, true, kInf, 1.0);
}
Family Family::poisson() {
    return Family(FamilyName::Poisson, "poisson", std::nullopt, true, kInf, 1.0);
}
Family Family::geometric() {
    return Family(FamilyName::Geometric, "geometric", std::nullopt, false, 0.0, 1.0);
}
Family Family::negbin(double kappa) {
    if (!(kappa > 0.0)) throw ConfigError("negbin: shape kappa must be positive");
    return Family(FamilyName::NegBin, "negbin", kappa, false, 0.0, 1.0);
}
Family Family::gaussian(double sigma2) {
    if (!(sigma2 >= 0.0)) throw ConfigError("gaussian: sigma^2 must be nonnegative");
    return Family(FamilyName::Gaussian, "gaussian", sigma2, true, kInf,
                  sigma2 > 0.0 ? sigma2 : 1.0);
}
Family Family::exponential() {
    return Family(FamilyName::Exponential, "exponential", std::nullopt, false, 0.0, 1.0);
}
Family Family::gamma(double kappa) {
    if (!(kappa > 0.0)) throw ConfigError("gamma: shape kappa must be positive");
    return Family(FamilyName::Gamma, "gamma", kappa, false, 0.0, 1.0 / kappa);
}
Family Family::inverse_gaussian(double kappa) {
    if (!(kappa > 0.0)) throw ConfigError("invgaussian: shape kappa must be positive");
    return Family(FamilyName::InvGaussian, "invgaussian", kappa, false, 0.0, 1.0 / kappa);
}

Family Family::from_name(const std::string& name, std::optional<double> shape) {
    if (name == "binomial") return binomial();
    if (name == "poisson") return poisson();
    if (name == "geometric") return geometric();
    if (name == "gaussian") return shape ? gaussian(*shape) : gaussian();
    if (name == "exponential") return exponential();
    if (name == "negbin" || name == "gamma" || name == "invgaussian") {
        if (!shape)
            throw ConfigError("family '" + name + "' requires a shape parameter");
        if (name == "negbin") return negbin(*shape);
        if (name == "gamma") return gamma(*shape);
        return inverse_gaussian(*shape);
    }
    throw ConfigError("unknown family '" + name + "'");
}

void Family::require_domain(double theta) const {
    if (!in_domain(theta))
        throw DomainError(label_ + ": theta=" + std::to_string(theta) +
                          " outside natural-parameter domain (theta < " +
                          std::to_string(theta_sup_) + ")");
}

double Family::clamp_theta(double theta, bool* clamped) const {
    if (theta < theta_sup_ - kThetaMargin) {
        if (clamped) *clamped = false;
        return theta;
    }
    if (clamped) *clamped = true;
    return theta_sup_ - kThetaMargin;
}

double Family::b(double theta) const {
    require_domain(theta);
    switch (name_) {
        case FamilyName::Binomial: return softplus(theta);
        case FamilyName::Poisson: return std::exp(theta);
        case FamilyName::Geometric: return -std::log(-std::expm1(theta));
        case FamilyName::NegBin: return -std::log(-std::expm1(theta)) / kappa();
        case FamilyName::Gaussian: return 0.5 * theta * theta;
        case FamilyName::Exponential: return -std::log(-theta);
        case FamilyName::Gamma: return -std::log(-theta);
        case FamilyName::InvGaussian: return -std::sqrt(-2.0 * theta);
    }
    return 0.0;
}

double Family::mean(double theta) const {
    require_domain(theta);
    switch (name_) {
        case FamilyName::Binomial: return logistic(theta);
        case FamilyName::Poisson: return std::exp(theta);
        case FamilyName::Geometric: return 1.0 / std::expm1(-theta);
        case FamilyName::NegBin: return 1.0 / (kappa() * std::expm1(-theta));
        case FamilyName::Gaussian: return theta;
        case FamilyName::Exponential: return -1.0 / theta;
        case FamilyName::Gamma: return -1.0 / theta;
        case FamilyName::InvGaussian: return 1.0 / std::sqrt(-2.0 * theta);
    }
    return 0.0;
}

double Family::variance_scale(double theta) const {
    require_domain(theta);
    switch (name_) {
        case FamilyName::Binomial: {
            const double p = logistic(theta);
            return p * (1.0 - p);
        }
        case FamilyName::Poisson: return std::exp(theta);
        case FamilyName::Geometric: {
            const double mu = 1.0 / std::expm1(-theta);
            return mu * (1.0 + mu);
        }
        case FamilyName::NegBin: {
            const double mu = 1.0 / (kappa() * std::expm1(-theta));
            return mu * (1.0 + kappa() * mu);
        }
        case FamilyName::Gaussian: return 1.0;
        case FamilyName::Exponential: return 1.0 / (theta * theta);
        case FamilyName::Gamma: return 1.0 / (theta * theta);
        case FamilyName::InvGaussian: return std::pow(-2.0 * theta, -1.5);
    }
    return 0.0;
}

double Family::link(double mu) const {
    switch (name_) {
        case FamilyName::Binomial:
            if (!(mu > 0.0 && mu < 1.0))
                throw DomainError("binomial: mean must lie in (0,1)");
            return std::log(mu / (1.0 - mu));
        case FamilyName::Poisson:
            if (!(mu > 0.0)) throw DomainError("poisson: mean must be positive");
            return std::log(mu);
        case FamilyName::Geometric:
            if (!(mu > 0.0)) throw DomainError("geometric: mean must be positive");
            return std::log(mu / (1.0 + mu));
        case FamilyName::NegBin:
            if (!(mu > 0.0)) throw DomainError("negbin: mean must be positive");
            return std::log(kappa() * mu / (1.0 + kappa() * mu));
        case FamilyName::Gaussian: return mu;
        case FamilyName::Exponential:
            if (!(mu > 0.0)) throw DomainError("exponential: mean must be positive");
            return -1.0 / mu;
        case FamilyName::Gamma:
            if (!(mu > 0.0)) throw DomainError("gamma: mean must be positive");
            return -1.0 / mu;
        case FamilyName::InvGaussian:
            if (!(mu > 0.0)) throw DomainError("invgaussian: mean must be positive");
            return -0.5 / (mu * mu);
    }
    return 0.0;
}

double Family::clamp_mean(double mu) const {
    switch (name_) {
        case FamilyName::Binomial:
            return std::min(1.0 - kMeanMargin, std::max(kMeanMargin, mu));
        case FamilyName::Gaussian:
            return mu;
        default:
            return std::max(kMeanMargin, mu);
    }
}

Eigen::ArrayXd Family::b(const Eigen::ArrayXd& theta) const {
    Eigen::ArrayXd out(theta.size());
    b_into(theta, out);
    return out;
}

Eigen::ArrayXd Family::mean(const Eigen::ArrayXd& theta) const {
    Eigen::ArrayXd out(theta.size());
    mean_into(theta, out);
    return out;
}

void Family::b_into(const Eigen::ArrayXd& theta, Eigen::ArrayXd& out) const {
    switch (name_) {
        case FamilyName::Binomial:
            out = (theta > 0.0)
                .select(theta + (-theta).exp().log1p(), theta.exp().log1p());
            return;
        case FamilyName::Poisson: out = theta.exp(); return;
        case FamilyName::Geometric: out = -(-theta.expm1()).log(); return;
        case FamilyName::NegBin: out = -(-theta.expm1()).log() / kappa(); return;
        case FamilyName::Gaussian: out = 0.5 * theta.square(); return;
        case FamilyName::Exponential: out = -(-theta).log(); return;
        case FamilyName::Gamma: out = -(-theta).log(); return;
        case FamilyName::InvGaussian: out = -(-2.0 * theta).sqrt(); return;
    }
}

void Family::mean_into(const Eigen::ArrayXd& theta, Eigen::ArrayXd& out) const {
    switch (name_) {
        case FamilyName::Binomial:
            out = 0.5 * (0.5 * theta).tanh() + 0.5;
            return;
        case FamilyName::Poisson: out = theta.exp(); return;
        case FamilyName::Geometric: out = (-theta).expm1().inverse(); return;
        case FamilyName::NegBin:
            out = (-theta).expm1().inverse() / kappa();
            return;
        case FamilyName::Gaussian: out = theta; return;
        case FamilyName::Exponential: out = -theta.inverse(); return;
        case FamilyName::Gamma: out = -theta.inverse(); return;
        case FamilyName::InvGaussian: out = (-2.0 * theta).rsqrt(); return;
    }
}

bool Family::in_support(double y, double trials) const {
    if (!std::isfinite(y)) return false;
    switch (name_) {
        case FamilyName::Binomial: return y >= 0.0 && y <= trials;
        case FamilyName::Poisson: return near_integerish(y);
        case FamilyName::Geometric: return near_integerish(y);
        case FamilyName::NegBin: return near_integerish(y);
        case FamilyName::Gaussian: return true;
        case FamilyName::Exponential: return y > 0.0;
        case FamilyName::Gamma: return y > 0.0;
        case FamilyName::InvGaussian: return y > 0.0;
    }
    return false;
}

void Family::require_support(double y, double trials) const {
    if (!in_support(y, trials))
        throw SupportError(label_ + ": response " + std::to_string(y) +
                           " outside the family support");
}

double Family::model_response(double y, double trials) const {
    return name_ == FamilyName::Binomial ? y / trials : y;
}

double Family::log_f0(double y, double phi, double trials) const {
    switch (name_) {
        case FamilyName::Binomial: return log_choose(trials, y);
        case FamilyName::Poisson: return -std::lgamma(y + 1.0);
        case FamilyName::Geometric: return 0.0;
        case FamilyName::NegBin: {
            const double r = 1.0 / kappa();
            return std::lgamma(y + r) - std::lgamma(y + 1.0) - std::lgamma(r);
        }
        case FamilyName::Gaussian:
            return -0.5 * y * y / phi - 0.5 * std::log(2.0 * M_PI * phi);
        case FamilyName::Exponential: return 0.0;
        case FamilyName::Gamma: {
            const double k = 1.0 / phi;
            return (k - 1.0) * std::log(y) - std::lgamma(k) + k * std::log(k);
        }
        case FamilyName::InvGaussian: {
            const double k = 1.0 / phi;
            return 0.5 * std::log(k / (2.0 * M_PI * y * y * y)) - 0.5 * k / y;
        }
    }
    return 0.0;
}

double Family::loglik(double y, double theta, double phi, double trials) const {
    require_support(y, trials);
    require_domain(theta);
    const double ym = model_response(y, trials);
    return (ym * theta - b(theta)) / a_scale(phi, trials) + log_f0(y, phi, trials);
}

double Family::saturated_loglik(double y, double phi, double trials) const {
    require_support(y, trials);
    const double ym = model_response(y, trials);
    switch (name_) {
        case FamilyName::Binomial:
            if (ym <= 0.0 || ym >= 1.0) return log_f0(y, phi, trials);
            break;
        case FamilyName::Poisson:
        case FamilyName::Geometric:
        case FamilyName::NegBin:
            if (ym <= 0.0) return log_f0(y, phi, trials);
            break;
        default: break;
    }
    return loglik(y, link(ym), phi, trials);
}

double Family::deviance(double y, double theta, double phi, double trials) const {
    return 2.0 * (saturated_loglik(y, phi, trials) - loglik(y, theta, phi, trials));
}

double Family::sample(double theta, double phi, double trials, Rng& rng) const {
    require_domain(theta);
    switch (name_) {
        case FamilyName::Binomial: return rng.binomial(trials, mean(theta));
        case FamilyName::Poisson: return rng.poisson(std::exp(theta));
        case FamilyName::Geometric: return rng.geometric(-std::expm1(theta));
        case FamilyName::NegBin: return rng.negbin(mean(theta), kappa());
        case FamilyName::Gaussian:
            return phi > 0.0 ? rng.normal(theta, std::sqrt(phi)) : theta;
        case FamilyName::Exponential: return rng.exponential(-theta);
        case FamilyName::Gamma: {
            const double k = 1.0 / phi;
            return rng.gamma(k, k * (-theta));
        }
        case FamilyName::InvGaussian:
            return rng.inverse_gaussian(mean(theta), 1.0 / phi);
    }
    return 0.0;
}

}  // namespace made
