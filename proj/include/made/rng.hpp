#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace made {

// Deterministic pseudo-random source. All variate transforms are implemented
// on top of raw 64-bit draws so that a given seed produces the same stream on
// every standard library / platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Derive an independent child stream (replicate r of a seeded experiment).
    static Rng child(std::uint64_t master_seed, std::uint64_t stream) {
        return Rng(splitmix(master_seed + 0x9e3779b97f4a7c15ULL * (stream + 1)));
    }

    std::uint64_t raw() { return engine_(); }

    // Uniform on (0,1); never returns 0 or 1.
    double uniform() {
        const double u = (raw() >> 11) * 0x1.0p-53;
        return u > 0.0 ? (u < 1.0 ? u : std::nextafter(1.0, 0.0)) : 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Marsaglia polar method; caches the spare deviate.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    bool bernoulli(double p) { return uniform() < p; }

    // Marsaglia-Tsang; shape boost for shape < 1.
    double gamma(double shape, double rate) {
        if (shape < 1.0) {
            const double u = uniform();
            return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
        }
    }

    double poisson(double mean) {
        if (mean <= 0.0) return 0.0;
        if (mean < 30.0) {
            // Knuth product-of-uniforms.
            const double limit = std::exp(-mean);
            double prod = uniform();
            double k = 0.0;
            while (prod > limit) {
                prod *= uniform();
                k += 1.0;
            }
            return k;
        }
        return poisson_ptrs(mean);
    }

    double binomial(double trials, double p) {
        double k = 0.0;
        for (double i = 0; i < trials; ++i)
            if (bernoulli(p)) k += 1.0;
        return k;
    }

    // Failures before the first success, P(Y=y) = p (1-p)^y.
    double geometric(double p) {
        if (p >= 1.0) return 0.0;
        return std::floor(std::log(uniform()) / std::log1p(-p));
    }

    // Gamma-Poisson mixture: mean mu, variance mu + kappa mu^2.
    double negbin(double mu, double kappa) {
        const double lambda = gamma(1.0 / kappa, 1.0 / (kappa * mu));
        return poisson(lambda);
    }

    // Michael-Schucany-Haas; mean mu, variance mu^3 / lambda.
    double inverse_gaussian(double mu, double lambda) {
        const double nu = normal();
        const double y = nu * nu;
        const double x = mu + mu * mu * y / (2.0 * lambda) -
                         mu / (2.0 * lambda) *
                             std::sqrt(4.0 * mu * lambda * y + mu * mu * y * y);
        if (uniform() <= mu / (mu + x)) return x;
        return mu * mu / x;
    }

private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // Hormann's PTRS transformed rejection, valid for mean >= 10.
    double poisson_ptrs(double mean) {
        const double slam = std::sqrt(mean);
        const double loglam = std::log(mean);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            const double u = uniform() - 0.5;
            const double v = uniform();
            const double us = 0.5 - std::fabs(u);
            const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= vr) return k;
            if (k < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
                k * loglam - mean - std::lgamma(k + 1.0))
                return k;
        }
    }

    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace made
