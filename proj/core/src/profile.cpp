#include "fracorbit/profile.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>

namespace fracorbit {

double SourceProfile::value(const Point& x) const {
    double r2 = norm2(x);
    double u = r2 - delta * delta;
    if (u >= 0.0) return 0.0;
    return amplitude * std::exp(1.0 / u);
}

Point SourceProfile::gradient(const Point& x) const {
    double r2 = norm2(x);
    double u = r2 - delta * delta;
    if (u >= 0.0) return {0.0, 0.0, 0.0};
    double g = amplitude * std::exp(1.0 / u);
    return scale(x, -2.0 * g / (u * u));
}

double SourceProfile::laplacian(const Point& x) const {
    double r2 = norm2(x);
    double u = r2 - delta * delta;
    if (u >= 0.0) return 0.0;
    double g = amplitude * std::exp(1.0 / u);
    double u2 = u * u;
    // grad/laplacian of phi = 1/u: |grad phi|^2 = 4 r^2/u^4, lap phi = -2d/u^2 + 8 r^2/u^3
    return g * (4.0 * r2 / (u2 * u2) - 2.0 * dim / u2 + 8.0 * r2 / (u2 * u));
}

std::size_t FourierTable::flat_index(const std::array<int, kMaxDim>& idx) const {
    std::size_t flat = 0;
    for (int a = 0; a < dim; ++a) flat = flat * n_per_axis + idx[a];
    return flat;
}

FourierTable profile_fourier(const SourceProfile& g, int n_per_axis, double xi_max,
                             int min_points_across) {
    if (n_per_axis < 2 || (n_per_axis & (n_per_axis - 1)) != 0)
        throw std::invalid_argument("profile_fourier: n_per_axis must be a power of two");
    if (!(xi_max > 0.0)) throw std::invalid_argument("profile_fourier: xi_max must be positive");

    const int d = g.dim;
    const double dxi = 2.0 * xi_max / n_per_axis;
    const double span = 2.0 * std::numbers::pi / dxi;  // spatial period matching the xi grid

    // Oversample the spatial grid until the support is resolved.
    int oversample = 1;
    while (span / (n_per_axis * oversample) > 2.0 * g.delta / min_points_across) {
        oversample *= 2;
        if (static_cast<long long>(oversample) * n_per_axis > (1 << 22))
            throw numeric_error("profile_fourier: insufficient spatial resolution at feasible grid sizes");
    }
    const int ns = n_per_axis * oversample;
    const double h = span / ns;
    const double x0 = -span / 2.0;

    std::size_t total = 1;
    for (int a = 0; a < d; ++a) total *= ns;
    fftw_complex* buf = fftw_alloc_complex(total);

    // sample g on the spatial grid
    std::array<int, kMaxDim> idx{0, 0, 0};
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (int a = d - 1; a >= 0; --a) {
            idx[a] = static_cast<int>(rem % ns);
            rem /= ns;
        }
        Point x{0.0, 0.0, 0.0};
        for (int a = 0; a < d; ++a) x[a] = x0 + idx[a] * h;
        buf[flat][0] = g.value(x);
        buf[flat][1] = 0.0;
    }

    int dims[kMaxDim] = {ns, ns, ns};
    fftw_plan plan = fftw_plan_dft(d, dims, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    FourierTable table;
    table.dim = d;
    table.n_per_axis = n_per_axis;
    table.xi_max = xi_max;
    table.values.resize([&] {
        std::size_t t = 1;
        for (int a = 0; a < d; ++a) t *= n_per_axis;
        return t;
    }());

    // Pick every oversample-th DFT bin; phase-correct for the grid origin and
    // apply the continuous-transform normalization h^d (2 pi)^{-d/2}.
    const double norm_factor = std::pow(h, d) * std::pow(2.0 * std::numbers::pi, -0.5 * d);
    std::array<int, kMaxDim> out_idx{0, 0, 0};
    std::size_t out_total = table.values.size();
    for (std::size_t flat = 0; flat < out_total; ++flat) {
        std::size_t rem = flat;
        for (int a = d - 1; a >= 0; --a) {
            out_idx[a] = static_cast<int>(rem % n_per_axis);
            rem /= n_per_axis;
        }
        // frequency index m in [-n/2, n/2); DFT bin = m*oversample mod ns
        std::size_t src = 0;
        double phase = 0.0;
        for (int a = 0; a < d; ++a) {
            int m = out_idx[a] - n_per_axis / 2;
            int bin = m * oversample;
            if (bin < 0) bin += ns;
            src = src * ns + bin;
            phase += -x0 * (m * dxi);  // e^{-i x0 xi} correction
        }
        std::complex<double> v(buf[src][0], buf[src][1]);
        table.values[flat] = norm_factor * v * std::exp(std::complex<double>(0.0, phase));
    }
    fftw_free(buf);
    return table;
}

}  // namespace fracorbit
