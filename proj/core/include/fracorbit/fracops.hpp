#ifndef FRACORBIT_FRACOPS_HPP
#define FRACORBIT_FRACOPS_HPP

#include <memory>
#include <string>
#include <vector>

#include "fracorbit/time_grid.hpp"

namespace fracorbit {

// Riemann-Liouville integral J^beta, beta in [0,1]. Product integration:
// the piecewise-linear interpolant is integrated exactly against the
// weight (t-s)^{beta-1}; order 2-eps for smooth samples. beta = 0 is the
// identity, beta = 1 reduces to the trapezoidal rule.
SampledFunction rl_integral(const SampledFunction& f, double beta);

// Caputo derivative, beta in (0,2]. L1 scheme for beta in (0,1),
// L1-type scheme on second differences for beta in (1,2), plain
// finite differences at beta = 1, 2. Assumes C^2-like sampling for
// beta <= 1 and C^3-like for beta > 1. The value at t_0 comes from the
// empty history (zero for fractional orders) and is low-accuracy.
SampledFunction caputo_derivative(const SampledFunction& f, double beta,
                                  std::string* warning = nullptr);

// Riemann-Liouville derivative, beta in (0,1): centered differences of
// J^{1-beta} f (one-sided at the endpoints). The beta -> 0 limit is the
// identity and is the caller's short-circuit.
SampledFunction rl_derivative(const SampledFunction& f, double beta);

// Moving-average mollifier of half-width w samples (window truncated at
// the ends); w = 0 returns the input unchanged. Applied to measured
// traces before fractional differentiation when data are noisy.
SampledFunction mollify(const SampledFunction& f, int half_width);

namespace detail {

// Product-integration weight tables for the kernel (t-s)^{beta-1} against
// piecewise-linear densities. With p = m - j,
//   A_p = (p^beta - (p-1)^beta) / beta,
//   B_p = p*A_p - (p^{beta+1} - (p-1)^{beta+1}) / (beta+1),
// interval j of J^beta f(t_m) contributes
//   dt^beta/Gamma(beta) * [f_j (A_p - B_p) + f_{j+1} B_p].
// Cached per (beta, n): the O(n^2) history sums dominate runtime and the
// lag structure makes the table O(n).
struct PowerWeights {
    double beta;
    std::vector<double> a;  // a[p], p = 0..n (a[0] unused)
    std::vector<double> b;
};

std::shared_ptr<const PowerWeights> power_weights(double beta, int n);

}  // namespace detail

}  // namespace fracorbit

#endif
