#ifndef FRACORBIT_FORWARD_HPP
#define FRACORBIT_FORWARD_HPP

#include <complex>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "fracorbit/domain.hpp"
#include "fracorbit/frac_order.hpp"
#include "fracorbit/observation.hpp"
#include "fracorbit/orbit.hpp"
#include "fracorbit/profile.hpp"
#include "fracorbit/time_grid.hpp"

namespace fracorbit {

// Antiderivative tables of the relaxation kernel k(tau) = tau^{alpha-1}
// E_{alpha,alpha}(-lambda tau^alpha) at lags p*dt:
//   k1[p] = int_0^{p dt} k,          = tau^alpha E_{alpha,alpha+1}(-lambda tau^alpha)
//   k2[p] = int_0^{p dt} tau k(tau)  = tau k1 - tau^{alpha+1} E_{alpha,alpha+2}(-lambda tau^alpha)
// With these, the weakly singular Duhamel convolution of a piecewise-linear
// density is exact per interval. alpha = 1 and alpha = 2 use exp/sin
// closed forms. Scalar is double (eigenvalue) or complex (Fourier symbol).
template <typename Scalar>
struct KernelMoments {
    std::vector<Scalar> k1;
    std::vector<Scalar> k2;
};

KernelMoments<double> kernel_moments(const FracOrder& alpha, double lambda, const TimeGrid& grid,
                                     double ml_tol = 1e-10);
KernelMoments<std::complex<double>> kernel_moments_symbol(const FracOrder& alpha,
                                                          std::complex<double> symbol,
                                                          const TimeGrid& grid,
                                                          double ml_tol = 1e-10);

// Pointwise antiderivatives behind the tables (tau >= 0).
double kernel_k1(const FracOrder& alpha, double lambda, double tau, double ml_tol = 1e-10);
double kernel_k2(const FracOrder& alpha, double lambda, double tau, double ml_tol = 1e-10);
std::complex<double> kernel_k1_symbol(const FracOrder& alpha, std::complex<double> symbol,
                                      double tau, double ml_tol = 1e-10);
std::complex<double> kernel_k2_symbol(const FracOrder& alpha, std::complex<double> symbol,
                                      double tau, double ml_tol = 1e-10);

// Closed-kernel Duhamel composition for one spectral component:
//   u(t_m) = int_0^{t_m} f(s) k(t_m - s) ds
// with piecewise-linear f. f_history has grid.size() entries; u(0) = 0.
std::vector<double> duhamel_convolve(std::span<const double> f_history,
                                     const KernelMoments<double>& km, const TimeGrid& grid);
std::vector<std::complex<double>> duhamel_convolve(std::span<const std::complex<double>> f_history,
                                                   const KernelMoments<std::complex<double>>& km,
                                                   const TimeGrid& grid);

// Homogeneous propagation on a bounded domain: per-mode multiplication by
// t^{ceil(alpha)-1} E_{alpha,ceil(alpha)}(-lambda_n t^alpha). The input
// coefficients are those of v_0 for alpha <= 1 and v_1 for alpha > 1.
std::vector<double> solve_homogeneous_bounded(const ModalBasis& basis,
                                              std::span<const double> init_coeffs,
                                              const FracOrder& alpha, double t,
                                              double ml_tol = 1e-10);

// Uniform spatial grid paired with a free-space frequency grid: n points
// per axis, spacing pi/xi_max, centered at the origin.
struct SpatialGrid {
    int dim;
    int n_per_axis;
    double h;
    double x0;

    std::size_t size() const;
    Point node(std::size_t flat) const;
};

SpatialGrid free_spatial_grid(const DomainSpec& spec);

// Homogeneous propagation on free space: forward FFT, multiplier
// E_{alpha,ceil(alpha)}(-S(xi) t^alpha) t^{ceil(alpha)-1} (alpha < 2) or
// sin(sqrt(S) t)/sqrt(S) (alpha = 2, removable singularity at S = 0),
// inverse FFT. v_init lives on free_spatial_grid(spec).
std::vector<double> solve_homogeneous_free(const DomainSpec& spec,
                                           std::span<const double> v_init,
                                           const FracOrder& alpha, double t,
                                           double ml_tol = 1e-10);

struct SolverOptions {
    int quad_points = 32;    // Gauss-Legendre points per axis for (g, phi_n)
    int n_threads = 1;
    double ml_tol = 1e-10;
    unsigned noise_seed = 0;
    double noise_level = 0.0;  // std dev relative to max |trace|
};

// Observation traces with provenance.
struct TraceSet {
    std::vector<Point> points;
    std::vector<SampledFunction> traces;  // one per point, shared grid
    double alpha = 0.0;
    double noise_level = 0.0;
    unsigned noise_seed = 0;

    const TimeGrid& grid() const { return traces.front().grid; }
};

// Modal field history u(x,t) = sum_n c_n(t) phi_n(x) on a bounded domain.
class BoundedFieldHistory {
public:
    BoundedFieldHistory(std::shared_ptr<const ModalBasis> basis, TimeGrid grid,
                        std::vector<std::vector<double>> modal);

    const TimeGrid& grid() const { return grid_; }
    const ModalBasis& basis() const { return *basis_; }
    const std::vector<double>& mode_history(int k) const { return modal_[k]; }

    double value(const Point& x, int m) const;
    double elliptic_value(const Point& x, int m) const;  // (L u)(x, t_m)
    SampledFunction trace(const Point& x) const;
    double tail_coefficient() const;  // |c_last(t_end)|, truncation indicator

private:
    std::shared_ptr<const ModalBasis> basis_;
    TimeGrid grid_;
    std::vector<std::vector<double>> modal_;
};

// Band-limited field history on free space, stored per frequency node.
class FreeFieldHistory {
public:
    FreeFieldHistory(std::shared_ptr<const FrequencyGrid> freq, TimeGrid grid,
                     std::vector<std::vector<std::complex<double>>> hat);

    const TimeGrid& grid() const { return grid_; }
    const FrequencyGrid& freq() const { return *freq_; }

    // direct band-limited summation at arbitrary x (no interpolation)
    double value(const Point& x, int m) const;
    double elliptic_value(const Point& x, int m) const;
    SampledFunction trace(const Point& x) const;

private:
    std::shared_ptr<const FrequencyGrid> freq_;
    TimeGrid grid_;
    std::vector<std::vector<std::complex<double>>> hat_;  // hat_[flat][m]
};

using FieldHistory = std::variant<BoundedFieldHistory, FreeFieldHistory>;

struct MovingSourceSolution {
    FieldHistory field;
    TraceSet traces;

    double value(const Point& x, int m) const;
    double elliptic_value(const Point& x, int m) const;
};

// Forward solve of (d_t^alpha + L) u = g(x - gamma(t)) with zero initial
// (and Dirichlet boundary) data, via the closed-kernel Duhamel composition
// per mode / per frequency. Traces are extracted at the observation points.
MovingSourceSolution solve_moving_source(const SourceProfile& g, const Orbit& orbit,
                                         const FracOrder& alpha, const DomainSpec& domain,
                                         const ObservationSet& obs,
                                         const SolverOptions& opts = {});

// Additive white Gaussian noise, std = noise_level * max |trace| over the
// set, deterministic per seed. noise_level = 0 is the identity.
TraceSet observe_and_perturb(const TraceSet& exact, double noise_level, unsigned seed);

}  // namespace fracorbit

#endif
