#ifndef FRACORBIT_PROFILE_HPP
#define FRACORBIT_PROFILE_HPP

#include <complex>
#include <vector>

#include "fracorbit/errors.hpp"
#include "fracorbit/geometry.hpp"

namespace fracorbit {

// Bell-shaped source profile
//   g(x) = C exp(1/(|x|^2 - delta^2))  for |x| < delta,  0 otherwise.
// Smooth, compactly supported in B_delta; gradient and Laplacian come
// from the analytic derivatives of the exponent.
struct SourceProfile {
    double delta;
    double amplitude;
    int dim;

    SourceProfile(double d, double c, int dimension) : delta(d), amplitude(c), dim(dimension) {
        if (!(d > 0.0)) throw std::invalid_argument("SourceProfile: delta must be positive");
        if (dimension < 1 || dimension > kMaxDim)
            throw std::invalid_argument("SourceProfile: dim must be 1, 2, or 3");
    }

    double value(const Point& x) const;
    Point gradient(const Point& x) const;
    double laplacian(const Point& x) const;

    // peak value g(0)
    double peak() const { return amplitude * std::exp(-1.0 / (delta * delta)); }
};

// Tabulated Fourier transform of g on a uniform frequency grid,
// ghat(xi) = (2 pi)^{-d/2} \int g(x) e^{-i x.xi} dx.
struct FourierTable {
    int dim;
    int n_per_axis;          // grid points per axis
    double xi_max;           // grid covers [-xi_max, xi_max)^d
    std::vector<std::complex<double>> values;  // row-major over axes

    double dxi() const { return 2.0 * xi_max / n_per_axis; }
    double xi_node(int i) const { return (-n_per_axis / 2 + i) * dxi(); }
    std::size_t flat_index(const std::array<int, kMaxDim>& idx) const;
};

// FFT tabulation of ghat. The spatial sampling resolves the support with
// at least min_points_across points across 2*delta (default 32); throws
// numeric_error when the required oversampling is infeasible.
FourierTable profile_fourier(const SourceProfile& g, int n_per_axis, double xi_max,
                             int min_points_across = 32);

}  // namespace fracorbit

#endif
