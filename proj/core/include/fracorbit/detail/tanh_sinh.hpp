#ifndef FRACORBIT_DETAIL_TANH_SINH_HPP
#define FRACORBIT_DETAIL_TANH_SINH_HPP

#include <cmath>
#include <numbers>
#include <type_traits>

namespace fracorbit::detail {

template <typename T>
struct TanhSinhResult {
    T value{};
    double error = 0.0;
    bool converged = false;
};

// Tanh-sinh (double-exponential) quadrature on (a,b). Tolerates integrable
// endpoint singularities. F maps double -> double or std::complex<double>.
template <typename F>
auto tanh_sinh(F&& f, double a, double b, double rel_tol, int max_level = 12)
    -> TanhSinhResult<std::invoke_result_t<F, double>> {
    using T = std::invoke_result_t<F, double>;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    const double t_max = 6.1;  // abscissas indistinguishable from the endpoints beyond this
    const double pi_half = 0.5 * std::numbers::pi;

    auto node = [&](double t, double& x, double& w) {
        double sh = std::sinh(t);
        double ch2 = std::cosh(pi_half * sh);
        x = mid + half * std::tanh(pi_half * sh);
        w = half * pi_half * std::cosh(t) / (ch2 * ch2);
    };

    double h = 1.0;
    T sum{};
    {
        double x, w;
        node(0.0, x, w);
        sum = f(x) * w;
    }
    for (int k = 1; static_cast<double>(k) * h <= t_max; ++k) {
        double x, w;
        node(k * h, x, w);
        if (x > a && x < b && w > 0.0) sum += f(x) * w;
        node(-k * h, x, w);
        if (x > a && x < b && w > 0.0) sum += f(x) * w;
    }
    T integral = sum * h;

    TanhSinhResult<T> res;
    T prev = integral;
    for (int level = 1; level <= max_level; ++level) {
        h *= 0.5;
        T add{};
        for (int k = 1; static_cast<double>(k) * h <= t_max; k += 2) {
            double x, w;
            node(k * h, x, w);
            if (x > a && x < b && w > 0.0) add += f(x) * w;
            node(-k * h, x, w);
            if (x > a && x < b && w > 0.0) add += f(x) * w;
        }
        sum += add;
        integral = sum * h;
        double diff = std::abs(integral - prev);
        double scale = std::abs(integral);
        if (level >= 3 && diff <= rel_tol * scale) {
            res.value = integral;
            res.error = diff;
            res.converged = true;
            return res;
        }
        prev = integral;
    }
    res.value = integral;
    res.error = std::abs(integral - prev);
    res.converged = false;
    return res;
}

}  // namespace fracorbit::detail

#endif
