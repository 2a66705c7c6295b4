#include "fracorbit/forward.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <thread>

#include "fracorbit/errors.hpp"
#include "fracorbit/gamma.hpp"
#include "fracorbit/mittag_leffler.hpp"

namespace fracorbit {

using std::numbers::pi;
using Complex = std::complex<double>;

namespace {

// small-z series fallbacks for the exp/sin antiderivatives
double k1_exp(double lambda, double tau) {
    double lt = lambda * tau;
    if (std::fabs(lt) < 1e-5) return tau * (1.0 - 0.5 * lt + lt * lt / 6.0);
    return (1.0 - std::exp(-lt)) / lambda;
}
double k2_exp(double lambda, double tau) {
    double lt = lambda * tau;
    if (std::fabs(lt) < 1e-5) return tau * tau * (0.5 - lt / 3.0 + lt * lt / 8.0);
    return (1.0 - (1.0 + lt) * std::exp(-lt)) / (lambda * lambda);
}
double k1_wave(double lambda, double tau) {
    if (lambda * tau * tau < 1e-10) return 0.5 * tau * tau;
    return (1.0 - std::cos(std::sqrt(lambda) * tau)) / lambda;
}
double k2_wave(double lambda, double tau) {
    double w = std::sqrt(lambda);
    double wt = w * tau;
    if (wt * wt < 1e-8) return tau * tau * tau / 3.0;
    return (std::sin(wt) - wt * std::cos(wt)) / (lambda * w);
}

Complex k1_exp_c(Complex s, double tau) {
    Complex st = s * tau;
    if (std::abs(st) < 1e-5) return tau * (1.0 - 0.5 * st + st * st / 6.0);
    return (1.0 - std::exp(-st)) / s;
}
Complex k2_exp_c(Complex s, double tau) {
    Complex st = s * tau;
    if (std::abs(st) < 1e-5) return tau * tau * (0.5 - st / 3.0 + st * st / 8.0);
    return (1.0 - (1.0 + st) * std::exp(-st)) / (s * s);
}

template <typename Scalar, typename K1F, typename K2F>
KernelMoments<Scalar> build_moments(const TimeGrid& grid, K1F&& k1f, K2F&& k2f) {
    KernelMoments<Scalar> km;
    const int n = grid.n_steps;
    km.k1.resize(n + 1);
    km.k2.resize(n + 1);
    km.k1[0] = Scalar{};
    km.k2[0] = Scalar{};
    for (int p = 1; p <= n; ++p) {
        double tau = grid.node(p);
        km.k1[p] = k1f(tau);
        km.k2[p] = k2f(tau);
    }
    return km;
}

// generic convolution against piecewise-linear density
template <typename Value, typename Scalar>
std::vector<Value> convolve_impl(std::span<const Value> f, const KernelMoments<Scalar>& km,
                                 const TimeGrid& grid) {
    const int n = grid.n_steps;
    if (static_cast<int>(f.size()) != n + 1)
        throw std::invalid_argument("duhamel_convolve: density length must equal grid size");
    const double dt = grid.dt();
    std::vector<Value> u(n + 1, Value{});
    for (int m = 1; m <= n; ++m) {
        Value acc{};
        const double tm = grid.node(m);
        for (int j = 0; j < m; ++j) {
            const int p = m - j;
            Scalar dk1 = km.k1[p] - km.k1[p - 1];
            Scalar dk2 = km.k2[p] - km.k2[p - 1];
            Value slope = (f[j + 1] - f[j]) * (1.0 / dt);
            acc += f[j] * dk1 + slope * ((tm - grid.node(j)) * dk1 - dk2);
        }
        u[m] = acc;
    }
    return u;
}

}  // namespace

double kernel_k1(const FracOrder& alpha, double lambda, double tau, double ml_tol) {
    if (lambda < 0.0) throw std::invalid_argument("kernel_k1: lambda must be >= 0");
    if (tau == 0.0) return 0.0;
    const double a = alpha.alpha;
    if (a == 1.0) return k1_exp(lambda, tau);
    if (a == 2.0) return k1_wave(lambda, tau);
    MLParams p1(a, a + 1.0, ml_tol);
    return std::pow(tau, a) * mittag_leffler(p1, -lambda * std::pow(tau, a));
}

double kernel_k2(const FracOrder& alpha, double lambda, double tau, double ml_tol) {
    if (lambda < 0.0) throw std::invalid_argument("kernel_k2: lambda must be >= 0");
    if (tau == 0.0) return 0.0;
    const double a = alpha.alpha;
    if (a == 1.0) return k2_exp(lambda, tau);
    if (a == 2.0) return k2_wave(lambda, tau);
    MLParams p1(a, a + 1.0, ml_tol);
    MLParams p2(a, a + 2.0, ml_tol);
    double ta = std::pow(tau, a);
    double k1 = ta * mittag_leffler(p1, -lambda * ta);
    return tau * k1 - tau * ta * mittag_leffler(p2, -lambda * ta);
}

Complex kernel_k1_symbol(const FracOrder& alpha, Complex symbol, double tau, double ml_tol) {
    if (tau == 0.0) return {};
    const double a = alpha.alpha;
    if (a == 1.0) return k1_exp_c(symbol, tau);
    if (a == 2.0) {
        if (symbol.imag() != 0.0 || symbol.real() < 0.0)
            throw std::invalid_argument("kernel_k1_symbol: alpha = 2 needs real S >= 0");
        return Complex(k1_wave(symbol.real(), tau));
    }
    MLParams p1(a, a + 1.0, ml_tol);
    double ta = std::pow(tau, a);
    return ta * mittag_leffler(p1, -symbol * ta);
}

Complex kernel_k2_symbol(const FracOrder& alpha, Complex symbol, double tau, double ml_tol) {
    if (tau == 0.0) return {};
    const double a = alpha.alpha;
    if (a == 1.0) return k2_exp_c(symbol, tau);
    if (a == 2.0) {
        if (symbol.imag() != 0.0 || symbol.real() < 0.0)
            throw std::invalid_argument("kernel_k2_symbol: alpha = 2 needs real S >= 0");
        return Complex(k2_wave(symbol.real(), tau));
    }
    MLParams p1(a, a + 1.0, ml_tol);
    MLParams p2(a, a + 2.0, ml_tol);
    double ta = std::pow(tau, a);
    Complex k1 = ta * mittag_leffler(p1, -symbol * ta);
    return tau * k1 - tau * ta * mittag_leffler(p2, -symbol * ta);
}

KernelMoments<double> kernel_moments(const FracOrder& alpha, double lambda, const TimeGrid& grid,
                                     double ml_tol) {
    return build_moments<double>(
        grid, [&](double t) { return kernel_k1(alpha, lambda, t, ml_tol); },
        [&](double t) { return kernel_k2(alpha, lambda, t, ml_tol); });
}

KernelMoments<Complex> kernel_moments_symbol(const FracOrder& alpha, Complex symbol,
                                             const TimeGrid& grid, double ml_tol) {
    return build_moments<Complex>(
        grid, [&](double t) { return kernel_k1_symbol(alpha, symbol, t, ml_tol); },
        [&](double t) { return kernel_k2_symbol(alpha, symbol, t, ml_tol); });
}

std::vector<double> duhamel_convolve(std::span<const double> f_history,
                                     const KernelMoments<double>& km, const TimeGrid& grid) {
    return convolve_impl<double, double>(f_history, km, grid);
}

std::vector<Complex> duhamel_convolve(std::span<const Complex> f_history,
                                      const KernelMoments<Complex>& km, const TimeGrid& grid) {
    return convolve_impl<Complex, Complex>(f_history, km, grid);
}

// --- homogeneous solvers --------------------------------------------------------

std::vector<double> solve_homogeneous_bounded(const ModalBasis& basis,
                                              std::span<const double> init_coeffs,
                                              const FracOrder& alpha, double t, double ml_tol) {
    if (t < 0.0) throw std::invalid_argument("solve_homogeneous_bounded: t must be >= 0");
    if (static_cast<int>(init_coeffs.size()) != basis.size())
        throw std::invalid_argument("solve_homogeneous_bounded: coefficient count mismatch");
    const double a = alpha.alpha;
    const int lead = alpha.ceil_order() - 1;
    std::vector<double> out(init_coeffs.size());
    for (int k = 0; k < basis.size(); ++k) {
        double lam = basis.lambda(k);
        double factor;
        if (t == 0.0) {
            factor = (lead == 0) ? 1.0 : 0.0;
        } else if (a == 1.0) {
            factor = std::exp(-lam * t);
        } else if (a == 2.0) {
            double w = std::sqrt(lam);
            factor = (w == 0.0) ? t : std::sin(w * t) / w;
        } else {
            MLParams p(a, static_cast<double>(lead + 1), ml_tol);
            factor = std::pow(t, lead) * mittag_leffler(p, -lam * std::pow(t, a));
        }
        out[k] = init_coeffs[k] * factor;
    }
    return out;
}

std::size_t SpatialGrid::size() const {
    std::size_t s = 1;
    for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(n_per_axis);
    return s;
}

Point SpatialGrid::node(std::size_t flat) const {
    Point p{0.0, 0.0, 0.0};
    std::size_t rem = flat;
    for (int a = dim - 1; a >= 0; --a) {
        int i = static_cast<int>(rem % n_per_axis);
        rem /= n_per_axis;
        p[a] = x0 + i * h;
    }
    return p;
}

SpatialGrid free_spatial_grid(const DomainSpec& spec) {
    if (spec.bounded()) throw std::invalid_argument("free_spatial_grid: free-space domain required");
    SpatialGrid g;
    g.dim = spec.dim;
    g.n_per_axis = spec.n_freq;
    g.h = pi / spec.xi_max;
    g.x0 = -0.5 * g.n_per_axis * g.h;
    return g;
}

std::vector<double> solve_homogeneous_free(const DomainSpec& spec, std::span<const double> v_init,
                                           const FracOrder& alpha, double t, double ml_tol) {
    spec.validate_for_alpha(alpha.alpha);
    SpatialGrid sg = free_spatial_grid(spec);
    FrequencyGrid fg(spec);
    const std::size_t total = sg.size();
    if (v_init.size() != total)
        throw std::invalid_argument("solve_homogeneous_free: v_init size mismatch");

    const int d = spec.dim;
    const int n = spec.n_freq;
    fftw_complex* buf = fftw_alloc_complex(total);
    for (std::size_t i = 0; i < total; ++i) {
        buf[i][0] = v_init[i];
        buf[i][1] = 0.0;
    }
    int dims[kMaxDim] = {n, n, n};
    fftw_plan fwd = fftw_plan_dft(d, dims, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(fwd);
    fftw_destroy_plan(fwd);

    // multiplier in the DFT-bin ordering: bin index i <-> frequency (i - n/2)
    // after an fftshift; equivalently bin i corresponds to m = i for i < n/2
    // and m = i - n for i >= n/2.
    const double a = alpha.alpha;
    const int lead = alpha.ceil_order() - 1;
    MLParams p(a == 2.0 ? 1.0 : a, a == 2.0 ? 1.0 : static_cast<double>(lead + 1), ml_tol);
    std::array<int, kMaxDim> idx{0, 0, 0};
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (int ax = d - 1; ax >= 0; --ax) {
            idx[ax] = static_cast<int>(rem % n);
            rem /= n;
        }
        Point xi{0.0, 0.0, 0.0};
        for (int ax = 0; ax < d; ++ax) {
            int m = idx[ax] < n / 2 ? idx[ax] : idx[ax] - n;
            xi[ax] = m * fg.dxi();
        }
        Complex S = spec.symbol(xi);
        Complex mult;
        if (t == 0.0) {
            mult = (lead == 0) ? 1.0 : 0.0;
        } else if (a == 2.0) {
            double lam = S.real();
            double w = std::sqrt(std::max(lam, 0.0));
            mult = (w * t < 1e-8) ? t : std::sin(w * t) / w;
        } else if (a == 1.0) {
            mult = std::exp(-S * t);
        } else {
            mult = std::pow(t, lead) * mittag_leffler(p, -S * std::pow(t, a));
        }
        Complex v(buf[flat][0], buf[flat][1]);
        v *= mult;
        buf[flat][0] = v.real();
        buf[flat][1] = v.imag();
    }

    fftw_plan bwd = fftw_plan_dft(d, dims, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_execute(bwd);
    fftw_destroy_plan(bwd);

    std::vector<double> out(total);
    const double scale = 1.0 / static_cast<double>(total);
    for (std::size_t i = 0; i < total; ++i) out[i] = buf[i][0] * scale;
    fftw_free(buf);
    return out;
}

// --- field histories -------------------------------------------------------------

BoundedFieldHistory::BoundedFieldHistory(std::shared_ptr<const ModalBasis> basis, TimeGrid grid,
                                         std::vector<std::vector<double>> modal)
    : basis_(std::move(basis)), grid_(grid), modal_(std::move(modal)) {}

double BoundedFieldHistory::value(const Point& x, int m) const {
    double acc = 0.0;
    for (int k = 0; k < basis_->size(); ++k) acc += modal_[k][m] * basis_->phi(k, x);
    return acc;
}

double BoundedFieldHistory::elliptic_value(const Point& x, int m) const {
    double acc = 0.0;
    for (int k = 0; k < basis_->size(); ++k)
        acc += basis_->lambda(k) * modal_[k][m] * basis_->phi(k, x);
    return acc;
}

SampledFunction BoundedFieldHistory::trace(const Point& x) const {
    SampledFunction f(grid_);
    std::vector<double> phis(basis_->size());
    for (int k = 0; k < basis_->size(); ++k) phis[k] = basis_->phi(k, x);
    for (int m = 0; m <= grid_.n_steps; ++m) {
        double acc = 0.0;
        for (int k = 0; k < basis_->size(); ++k) acc += modal_[k][m] * phis[k];
        f[m] = acc;
    }
    return f;
}

double BoundedFieldHistory::tail_coefficient() const {
    return std::fabs(modal_.back().back());
}

FreeFieldHistory::FreeFieldHistory(std::shared_ptr<const FrequencyGrid> freq, TimeGrid grid,
                                   std::vector<std::vector<Complex>> hat)
    : freq_(std::move(freq)), grid_(grid), hat_(std::move(hat)) {}

double FreeFieldHistory::value(const Point& x, int m) const {
    const double norm_f = freq_->cell() * std::pow(2.0 * pi, -0.5 * freq_->dim());
    double acc = 0.0;
    for (std::size_t f = 0; f < freq_->size(); ++f) {
        Point xi = freq_->xi(f);
        Complex e = std::exp(Complex(0.0, dot(xi, x)));
        acc += (hat_[f][m] * e).real();
    }
    return acc * norm_f;
}

double FreeFieldHistory::elliptic_value(const Point& x, int m) const {
    const double norm_f = freq_->cell() * std::pow(2.0 * pi, -0.5 * freq_->dim());
    double acc = 0.0;
    for (std::size_t f = 0; f < freq_->size(); ++f) {
        Point xi = freq_->xi(f);
        Complex e = std::exp(Complex(0.0, dot(xi, x)));
        acc += (freq_->symbol(f) * hat_[f][m] * e).real();
    }
    return acc * norm_f;
}

SampledFunction FreeFieldHistory::trace(const Point& x) const {
    SampledFunction f(grid_);
    const double norm_f = freq_->cell() * std::pow(2.0 * pi, -0.5 * freq_->dim());
    for (std::size_t k = 0; k < freq_->size(); ++k) {
        Point xi = freq_->xi(k);
        Complex e = std::exp(Complex(0.0, dot(xi, x)));
        for (int m = 0; m <= grid_.n_steps; ++m) f[m] += (hat_[k][m] * e).real() * norm_f;
    }
    return f;
}

double MovingSourceSolution::value(const Point& x, int m) const {
    return std::visit([&](const auto& h) { return h.value(x, m); }, field);
}

double MovingSourceSolution::elliptic_value(const Point& x, int m) const {
    return std::visit([&](const auto& h) { return h.elliptic_value(x, m); }, field);
}

// --- moving-source solve ----------------------------------------------------------

namespace {

void parallel_for(int count, int n_threads, const std::function<void(int)>& body) {
    if (n_threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    int workers = std::min(n_threads, count);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= count) return;
                body(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

MovingSourceSolution solve_moving_source(const SourceProfile& g, const Orbit& orbit,
                                         const FracOrder& alpha, const DomainSpec& domain,
                                         const ObservationSet& obs, const SolverOptions& opts) {
    domain.validate_for_alpha(alpha.alpha);
    const TimeGrid& grid = obs.grid;
    const int n = grid.n_steps;

    AdmissibilityReport adm = check_admissible(orbit, domain, g);
    if (!adm.pass) throw numeric_error("solve_moving_source: inadmissible orbit: " + adm.first_violation);

    TraceSet traces;
    traces.points = obs.points;
    traces.alpha = alpha.alpha;

    if (domain.bounded()) {
        auto basis = std::make_shared<ModalBasis>(domain, ModalBasis::default_lambda_cut(g.delta));
        const int n_modes = basis->size();

        // source coefficient histories f_n(s_j)
        std::vector<std::vector<double>> fhist(n_modes, std::vector<double>(n + 1));
        for (int j = 0; j <= n; ++j) {
            auto c = basis->source_coefficients(g, orbit.position(grid.node(j)), opts.quad_points);
            for (int k = 0; k < n_modes; ++k) fhist[k][j] = c[k];
        }

        std::vector<std::vector<double>> modal(n_modes);
        parallel_for(n_modes, opts.n_threads, [&](int k) {
            auto km = kernel_moments(alpha, basis->lambda(k), grid, opts.ml_tol);
            modal[k] = duhamel_convolve(std::span<const double>(fhist[k]), km, grid);
        });

        BoundedFieldHistory field(basis, grid, std::move(modal));
        for (const Point& x : obs.points) traces.traces.push_back(field.trace(x));
        return {FieldHistory(std::move(field)), std::move(traces)};
    }

    // free space
    auto freq = std::make_shared<FrequencyGrid>(domain);
    FourierTable ghat = profile_fourier(g, domain.n_freq, domain.xi_max);
    const std::size_t n_f = freq->size();

    // source transform history G(xi, s) = ghat(xi) e^{-i xi . gamma(s)}
    std::vector<Point> gamma_hist(n + 1);
    for (int j = 0; j <= n; ++j) gamma_hist[j] = orbit.position(grid.node(j));

    std::vector<std::vector<Complex>> hat(n_f);
    parallel_for(static_cast<int>(n_f), opts.n_threads, [&](int f) {
        Point xi = freq->xi(f);
        std::vector<Complex> src(n + 1);
        for (int j = 0; j <= n; ++j)
            src[j] = ghat.values[f] * std::exp(Complex(0.0, -dot(xi, gamma_hist[j])));
        auto km = kernel_moments_symbol(alpha, freq->symbol(f), grid, opts.ml_tol);
        hat[f] = duhamel_convolve(std::span<const Complex>(src), km, grid);
    });

    FreeFieldHistory field(freq, grid, std::move(hat));
    for (const Point& x : obs.points) traces.traces.push_back(field.trace(x));
    return {FieldHistory(std::move(field)), std::move(traces)};
}

TraceSet observe_and_perturb(const TraceSet& exact, double noise_level, unsigned seed) {
    if (noise_level < 0.0)
        throw std::invalid_argument("observe_and_perturb: noise_level must be >= 0");
    TraceSet out = exact;
    out.noise_level = noise_level;
    out.noise_seed = seed;
    if (noise_level == 0.0) return out;

    double amp = 0.0;
    for (const auto& tr : exact.traces)
        for (double v : tr.values) amp = std::max(amp, std::fabs(v));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, noise_level * amp);
    for (auto& tr : out.traces)
        for (double& v : tr.values) v += gauss(rng);
    return out;
}

}  // namespace fracorbit
