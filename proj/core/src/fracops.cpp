#include "fracorbit/fracops.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "fracorbit/gamma.hpp"

namespace fracorbit {
namespace detail {

std::shared_ptr<const PowerWeights> power_weights(double beta, int n) {
    static std::mutex mtx;
    static std::map<std::pair<double, int>, std::shared_ptr<const PowerWeights>> cache;

    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.lower_bound({beta, n});
    if (it != cache.end() && it->first.first == beta && it->first.second >= n) return it->second;

    auto w = std::make_shared<PowerWeights>();
    w->beta = beta;
    w->a.resize(n + 1, 0.0);
    w->b.resize(n + 1, 0.0);
    double prev_pb = 0.0;    // (p-1)^beta
    double prev_pb1 = 0.0;   // (p-1)^{beta+1}
    for (int p = 1; p <= n; ++p) {
        double pb = std::pow(static_cast<double>(p), beta);
        double pb1 = pb * p;
        w->a[p] = (pb - prev_pb) / beta;
        w->b[p] = p * w->a[p] - (pb1 - prev_pb1) / (beta + 1.0);
        prev_pb = pb;
        prev_pb1 = pb1;
    }
    cache[{beta, n}] = w;
    return w;
}

namespace {

// First derivative by centered differences, 3-point one-sided at the ends.
std::vector<double> diff1(const SampledFunction& f) {
    const int n = f.grid.n_steps;
    const double dt = f.grid.dt();
    std::vector<double> d(n + 1);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
    for (int m = 1; m < n; ++m) d[m] = (f[m + 1] - f[m - 1]) / (2.0 * dt);
    d[n] = (3.0 * f[n] - 4.0 * f[n - 1] + f[n - 2]) / (2.0 * dt);
    return d;
}

// Second derivative by centered differences, 4-point one-sided at the ends.
std::vector<double> diff2(const SampledFunction& f) {
    const int n = f.grid.n_steps;
    const double dt2 = f.grid.dt() * f.grid.dt();
    std::vector<double> d(n + 1);
    if (n >= 3) {
        d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / dt2;
        d[n] = (2.0 * f[n] - 5.0 * f[n - 1] + 4.0 * f[n - 2] - f[n - 3]) / dt2;
    } else {
        d[0] = (f[0] - 2.0 * f[1] + f[2]) / dt2;
        d[n] = d[0];
    }
    for (int m = 1; m < n; ++m) d[m] = (f[m + 1] - 2.0 * f[m] + f[m - 1]) / dt2;
    return d;
}

}  // namespace
}  // namespace detail

SampledFunction rl_integral(const SampledFunction& f, double beta) {
    if (beta < 0.0 || beta > 1.0)
        throw std::invalid_argument("rl_integral: beta must lie in [0,1]");
    if (beta == 0.0) return f;

    const int n = f.grid.n_steps;
    const double dt = f.grid.dt();
    auto w = detail::power_weights(beta, n);
    const double scale = std::pow(dt, beta) * reciprocal_gamma(beta);

    SampledFunction out(f.grid);
    for (int m = 1; m <= n; ++m) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j) {
            const int p = m - j;
            acc += f[j] * (w->a[p] - w->b[p]) + f[j + 1] * w->b[p];
        }
        out[m] = scale * acc;
    }
    return out;
}

SampledFunction caputo_derivative(const SampledFunction& f, double beta, std::string* warning) {
    if (!(beta > 0.0) || beta > 2.0)
        throw std::invalid_argument("caputo_derivative: beta must lie in (0,2]");
    if (warning && f.grid.n_steps < 8)
        *warning = "caputo_derivative: grid too coarse (n_steps < 8)";

    const int n = f.grid.n_steps;
    const double dt = f.grid.dt();

    if (beta == 1.0) return {f.grid, detail::diff1(f)};
    if (beta == 2.0) return {f.grid, detail::diff2(f)};

    if (beta < 1.0) {
        // L1: piecewise-linear f makes f' piecewise constant, J^{1-beta} exact.
        const double scale = std::pow(dt, -beta) * reciprocal_gamma(2.0 - beta);
        std::vector<double> c(n + 1);  // c[p] = p^{1-beta} - (p-1)^{1-beta}
        double prev = 0.0;
        for (int p = 1; p <= n; ++p) {
            double cur = std::pow(static_cast<double>(p), 1.0 - beta);
            c[p] = cur - prev;
            prev = cur;
        }
        SampledFunction out(f.grid);
        for (int m = 1; m <= n; ++m) {
            double acc = 0.0;
            for (int j = 0; j < m; ++j) acc += (f[j + 1] - f[j]) * c[m - j];
            out[m] = scale * acc;
        }
        return out;
    }

    // beta in (1,2): J^{2-beta} of discrete second differences.
    SampledFunction d2(f.grid, detail::diff2(f));
    return rl_integral(d2, 2.0 - beta);
}

SampledFunction rl_derivative(const SampledFunction& f, double beta) {
    if (!(beta > 0.0) || beta >= 1.0)
        throw std::invalid_argument("rl_derivative: beta must lie in (0,1)");
    SampledFunction u = rl_integral(f, 1.0 - beta);
    return {f.grid, detail::diff1(u)};
}

SampledFunction mollify(const SampledFunction& f, int half_width) {
    if (half_width < 0) throw std::invalid_argument("mollify: half_width must be >= 0");
    if (half_width == 0) return f;
    const int n = f.grid.n_steps;
    SampledFunction out(f.grid);
    for (int m = 0; m <= n; ++m) {
        int lo = std::max(0, m - half_width);
        int hi = std::min(n, m + half_width);
        double acc = 0.0;
        for (int j = lo; j <= hi; ++j) acc += f[j];
        out[m] = acc / (hi - lo + 1);
    }
    return out;
}

}  // namespace fracorbit
