#ifndef FRACORBIT_GAMMA_HPP
#define FRACORBIT_GAMMA_HPP

namespace fracorbit {

// Gamma function via the Lanczos approximation (g = 7, 9 coefficients),
// relative error below 1e-13 on the real line away from the poles.
// Arguments at or below 0 are handled by reflection; poles return +/-inf.
double gamma_fn(double x);

// log|Gamma(x)|, same approximation.
double log_abs_gamma(double x);

// 1/Gamma(x). Entire: returns exactly 0 at the poles x = 0, -1, -2, ...
double reciprocal_gamma(double x);

}  // namespace fracorbit

#endif
