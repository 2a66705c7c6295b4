#ifndef FRACORBIT_MITTAG_LEFFLER_HPP
#define FRACORBIT_MITTAG_LEFFLER_HPP

#include <complex>

#include "fracorbit/frac_order.hpp"

namespace fracorbit {

// Parameters of E_{beta,mu}(z) = sum_l z^l / Gamma(beta*l + mu).
struct MLParams {
    double beta;
    double mu;
    double tol = 1e-10;  // relative accuracy target

    MLParams(double b, double m, double t = 1e-10) : beta(b), mu(m), tol(t) { validate(); }

    void validate() const {
        if (!(beta > 0.0) || beta > 2.0)
            throw std::invalid_argument("MLParams: beta must lie in (0,2]");
        if (!(mu > 0.0))
            throw std::invalid_argument("MLParams: mu must be positive");
        if (!(tol > 0.0) || tol > 1e-6)
            throw std::invalid_argument("MLParams: tol must lie in (0,1e-6]");
    }
};

// Largest |z| the evaluator accepts; beyond it the leading asymptotic
// term is returned (kernel values there are below solver tolerance).
inline constexpr double kMlZMax = 1e8;

// Mittag-Leffler function on and near the negative real axis.
// Supported region: |z| <= kMlZMax with |arg z| > pi*beta/2 for large |z|
// (small |z| is unrestricted). Throws numeric_error when no branch
// reaches the requested tolerance.
std::complex<double> mittag_leffler(const MLParams& params, std::complex<double> z);

// Real-argument convenience overload (z = x <= 0 is the primary path;
// small positive x is accepted while the series converges).
double mittag_leffler(const MLParams& params, double x);

// Relaxation kernel t^{alpha-1} E_{alpha,alpha}(-lambda t^alpha).
// Requires t > 0 and lambda >= 0; reduces to exp(-lambda t) at alpha = 1
// and sin(sqrt(lambda) t)/sqrt(lambda) at alpha = 2.
double relaxation_kernel(const FracOrder& alpha, double lambda, double t);

namespace detail {

struct MlBranchResult {
    std::complex<double> value{0.0, 0.0};
    double error = 0.0;  // absolute error estimate
    bool converged = false;
};

// Individual evaluation branches, exposed for cross-consistency tests.
MlBranchResult ml_series(const MLParams& params, std::complex<double> z, int term_cap = 400);
MlBranchResult ml_asymptotic(const MLParams& params, std::complex<double> z, int term_cap = 80);
MlBranchResult ml_integral(const MLParams& params, std::complex<double> z);  // beta < 1 only

}  // namespace detail

}  // namespace fracorbit

#endif
