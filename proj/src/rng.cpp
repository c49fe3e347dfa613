#include "cct/rng.hpp"

#include <cmath>

namespace cct {

std::int64_t Rng::poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    if (lambda < 30.0) return poisson_knuth(lambda);
    return poisson_ptrd(lambda);
}

std::int64_t Rng::poisson_knuth(double lambda) {
    const double limit = std::exp(-lambda);
    std::int64_t k = 0;
    double prod = uniform();
    while (prod > limit) {
        ++k;
        prod *= uniform();
    }
    return k;
}

// Hormann (1993), "The transformed rejection method for generating Poisson
// random variables", algorithm PTRD. Valid for lambda >= 10; we switch at 30.
std::int64_t Rng::poisson_ptrd(double lambda) {
    const double smu = std::sqrt(lambda);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_lambda = std::log(lambda);

    for (;;) {
        double u = uniform() - 0.5;
        double v = uniform();
        double us = 0.5 - std::fabs(u);
        auto k = std::int64_t(std::floor((2.0 * a / us + b) * u + lambda + 0.43));
        if (us >= 0.07 && v <= v_r) return k;
        if (k < 0 || (us < 0.013 && v > us)) continue;
        double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        double rhs = -lambda + double(k) * log_lambda - std::lgamma(double(k) + 1.0);
        if (lhs <= rhs) return k;
    }
}

}  // namespace cct
