#include "fracorbit/mittag_leffler.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "fracorbit/detail/double_double.hpp"
#include "fracorbit/detail/tanh_sinh.hpp"
#include "fracorbit/errors.hpp"
#include "fracorbit/gamma.hpp"

namespace fracorbit {
namespace detail {
namespace {

using std::numbers::pi;
using Complex = std::complex<double>;

constexpr double kDDEps = 1.3e-32;           // double-double unit roundoff
constexpr double kSeriesBudgetReal = 27.0;   // ln of the tolerated max-term growth
constexpr double kSeriesBudgetComplex = 12.0;

bool nearly_integer(double x) { return std::fabs(x - std::round(x)) < 1e-12; }

// --- reciprocal-gamma tables ------------------------------------------------
//
// The power series cancels its largest terms down by up to e^27, so the
// coefficients 1/Gamma(beta*l + mu) must carry more than double precision.
// They depend only on (beta, mu); build them once with MPFR and cache.

struct TableKey {
    double beta;
    double mu;
    bool operator<(const TableKey& o) const {
        if (beta != o.beta) return beta < o.beta;
        return mu < o.mu;
    }
};

using InvGammaTable = std::vector<DoubleDouble>;

std::shared_ptr<const InvGammaTable> inv_gamma_table(double beta, double mu, int count) {
    static std::mutex mtx;
    static std::map<TableKey, std::shared_ptr<const InvGammaTable>> cache;

    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find({beta, mu});
    if (it != cache.end() && static_cast<int>(it->second->size()) >= count) return it->second;

    auto table = std::make_shared<InvGammaTable>();
    table->reserve(count);
    mpfr_t s, g;
    mpfr_init2(s, 192);
    mpfr_init2(g, 192);
    for (int l = 0; l < count; ++l) {
        mpfr_set_d(s, beta, MPFR_RNDN);
        mpfr_mul_si(s, s, l, MPFR_RNDN);
        mpfr_add_d(s, s, mu, MPFR_RNDN);
        mpfr_gamma(g, s, MPFR_RNDN);
        mpfr_d_div(g, 1.0, g, MPFR_RNDN);
        double hi = mpfr_get_d(g, MPFR_RNDN);
        mpfr_sub_d(g, g, hi, MPFR_RNDN);
        double lo = mpfr_get_d(g, MPFR_RNDN);
        table->push_back({hi, lo});
    }
    mpfr_clear(s);
    mpfr_clear(g);
    cache[{beta, mu}] = table;
    return table;
}

// Largest |z| the series branch accepts: the fixed point of
// x = (budget + ln(1+x))^beta, i.e. max-term magnitude ~ e^budget.
double series_switch_radius(double beta, double budget) {
    double x = std::pow(budget, beta);
    for (int i = 0; i < 4; ++i) x = std::pow(budget + std::log1p(x), beta);
    return x;
}

// --- closed forms -----------------------------------------------------------

bool closed_form(double beta, double mu, Complex z, Complex& out) {
    if (beta == 1.0 && nearly_integer(mu) && mu <= 3.0) {
        int m = static_cast<int>(std::round(mu));
        if (m == 1) {
            out = std::exp(z);
            return true;
        }
        if (std::abs(z) < 1e-8) return false;  // series is exact and cheap there
        if (m == 2) {
            out = (std::exp(z) - 1.0) / z;
            return true;
        }
        out = (std::exp(z) - 1.0 - z) / (z * z);  // mu = 3
        return true;
    }
    if (beta == 2.0 && nearly_integer(mu) && mu <= 4.0) {
        int m = static_cast<int>(std::round(mu));
        Complex w = std::sqrt(z);
        if (m == 1) {
            out = std::cosh(w);
            return true;
        }
        if (std::abs(z) < 1e-8) return false;
        if (m == 2) {
            out = std::sinh(w) / w;
            return true;
        }
        if (m == 3) {
            out = (std::cosh(w) - 1.0) / z;
            return true;
        }
        out = (std::sinh(w) - w) / (z * w);  // mu = 4
        return true;
    }
    return false;
}

}  // namespace

// --- series branch ----------------------------------------------------------

MlBranchResult ml_series(const MLParams& params, Complex z, int term_cap) {
    MlBranchResult res;
    const double ax = std::abs(z);

    if (ax == 0.0) {
        res.value = reciprocal_gamma(params.mu);
        res.error = 0.0;
        res.converged = true;
        return res;
    }

    if (z.imag() == 0.0) {
        // double-double path
        auto table = inv_gamma_table(params.beta, params.mu, term_cap + 1);
        const double x = z.real();
        DoubleDouble sum = (*table)[0];
        DoubleDouble zpow(1.0);
        double max_term = std::fabs(sum.value());
        double last = max_term;
        int decreasing = 0;
        for (int l = 1; l <= term_cap; ++l) {
            zpow = dd_mul(zpow, x);
            if (!std::isfinite(zpow.hi)) break;
            DoubleDouble term = dd_mul(zpow, (*table)[l]);
            sum = dd_add(sum, term);
            double at = dd_abs(term);
            max_term = std::max(max_term, at);
            decreasing = (at < last) ? decreasing + 1 : 0;
            last = at;
            double floor = kDDEps * max_term;
            if (decreasing >= 3 && at <= std::max(floor, 0.05 * params.tol * dd_abs(sum))) {
                res.value = sum.value();
                res.error = std::max(floor, at);
                res.converged = true;
                return res;
            }
        }
        res.value = sum.value();
        res.error = std::max(last, kDDEps * max_term);
        res.converged = false;
        return res;
    }

    // complex path in plain double
    std::vector<double> rg(term_cap + 1);
    {
        auto table = inv_gamma_table(params.beta, params.mu, term_cap + 1);
        for (int l = 0; l <= term_cap; ++l) rg[l] = (*table)[l].value();
    }
    Complex sum = rg[0];
    Complex zpow = 1.0;
    double max_term = std::abs(sum);
    double last = max_term;
    int decreasing = 0;
    for (int l = 1; l <= term_cap; ++l) {
        zpow *= z;
        if (!std::isfinite(std::abs(zpow))) break;
        Complex term = zpow * rg[l];
        sum += term;
        double at = std::abs(term);
        max_term = std::max(max_term, at);
        decreasing = (at < last) ? decreasing + 1 : 0;
        last = at;
        double floor = 2.3e-16 * max_term;
        if (decreasing >= 3 && at <= std::max(floor, 0.05 * params.tol * std::abs(sum))) {
            res.value = sum;
            res.error = std::max(floor, at);
            res.converged = true;
            return res;
        }
    }
    res.value = sum;
    res.error = std::max(last, 2.3e-16 * max_term);
    res.converged = false;
    return res;
}

// --- asymptotic branch -------------------------------------------------------
//
// For |arg z| > pi*beta/2 (sector around the negative axis):
//   E(z) ~ [pole term]  -  sum_{l>=1} z^{-l} / Gamma(mu - beta l),
// truncated at the smallest term. The pole term (1/beta) Z^{1-mu} e^Z with
// Z = z^{1/beta} is present when |arg z| <= pi*beta; on the negative real
// axis with beta in (1,2) the conjugate pair combines to a real oscillation
// that dominates until x^{1/beta} |cos(pi/beta)| grows large (exactly
// cos(sqrt(x)) in the wave limit beta -> 2).

MlBranchResult ml_asymptotic(const MLParams& params, Complex z, int term_cap) {
    MlBranchResult res;
    const double beta = params.beta;
    const double mu = params.mu;
    const double ax = std::abs(z);
    const double aarg = std::fabs(std::arg(z));

    if (ax == 0.0 || aarg <= 0.5 * pi * beta + 1e-12) {
        res.converged = false;
        return res;
    }

    Complex zinv = 1.0 / z;
    Complex p = 1.0;
    Complex alg = 0.0;
    double min_term = std::numeric_limits<double>::infinity();
    double err = std::numeric_limits<double>::infinity();
    for (int l = 1; l <= term_cap; ++l) {
        p *= zinv;
        double rg = reciprocal_gamma(mu - beta * l);
        Complex term = -p * rg;
        double at = std::abs(term);
        if (at >= min_term && at > 0.0) {
            err = at;  // optimal truncation: stop before terms regrow
            break;
        }
        alg += term;
        if (at > 0.0) min_term = std::min(min_term, at);
        err = at;
    }

    Complex value = alg;
    if (aarg <= pi * beta + 1e-12) {
        if (z.imag() == 0.0 && z.real() < 0.0) {
            const double x = -z.real();
            if (beta == 1.0) {
                if (!nearly_integer(mu)) {
                    res.converged = false;  // complex branch point; unsupported corner
                    return res;
                }
                int m = static_cast<int>(std::round(mu));
                double sign = (((1 - m) % 2) == 0) ? 1.0 : -1.0;
                value += sign * std::pow(x, 1.0 - mu) * std::exp(-x);
            } else {
                // conjugate pole pair
                double r = std::pow(x, 1.0 / beta);
                Complex w = r * std::exp(Complex(0.0, pi / beta));
                Complex contrib = std::pow(w, 1.0 - mu) * std::exp(w);
                value += (2.0 / beta) * contrib.real();
            }
        } else {
            Complex w = std::exp(std::log(z) / beta);
            value += (1.0 / beta) * std::pow(w, 1.0 - mu) * std::exp(w);
        }
    }

    res.value = value;
    res.error = std::min(err, min_term) + 1e-15 * std::abs(value);
    res.converged = std::isfinite(res.error);
    return res;
}

// --- integral branch (Gorenflo-Loverro-Luchko), beta < 1 ---------------------

namespace {

// Complete E_{beta,mu}(z) for beta in (0,1), mu in (0, 1+beta), via the
// spectral integral over the Hankel contour collapsed onto the positive axis,
// plus the pole contribution when pi*beta/2 < |arg z| <= pi*beta.
MlBranchResult gll_core(double beta, double mu, Complex z, double tol) {
    MlBranchResult res;
    const double aarg = std::fabs(std::arg(z));
    if (aarg <= 0.5 * pi * beta + 1e-12) {
        res.converged = false;
        return res;
    }

    const double s1 = std::sin(pi * (1.0 - mu));
    const double s2 = std::sin(pi * (1.0 - mu + beta));
    const double c = std::cos(pi * beta);
    const double pref = 1.0 / (pi * beta);
    const double p_exp = (1.0 - mu) / beta;

    auto kernel = [&](double r) -> Complex {
        double rpow = (p_exp == 0.0) ? 1.0 : std::pow(r, p_exp);
        double decay = std::exp(-std::pow(r, 1.0 / beta));
        Complex num = r * s1 - z * s2;
        Complex den = (r * r - 2.0 * r * z * c) + z * z;
        return pref * rpow * decay * num / den;
    };

    const double r_max = std::max({1.0, 2.0 * std::abs(z), std::pow(38.0, beta)});
    auto quad = tanh_sinh(kernel, 0.0, r_max, std::min(tol * 0.1, 1e-13));

    Complex value = quad.value;
    if (aarg <= pi * beta + 1e-12) {
        Complex w = std::exp(std::log(z) / beta);
        value += (1.0 / beta) * std::pow(w, 1.0 - mu) * std::exp(w);
    }
    res.value = value;
    res.error = quad.error + 1e-15 * std::abs(value);
    res.converged = quad.converged;
    return res;
}

}  // namespace

MlBranchResult ml_integral(const MLParams& params, Complex z) {
    const double beta = params.beta;
    if (beta >= 1.0) {
        MlBranchResult res;
        res.converged = false;
        return res;
    }
    // Reduce mu below 1+beta so the r->0 endpoint stays integrable:
    // E_{b,m}(z) = (E_{b,m-b}(z) - 1/Gamma(m-b)) / z.
    double mu_r = params.mu;
    int steps = 0;
    while (mu_r >= 1.0 + beta - 1e-9) {
        mu_r -= beta;
        ++steps;
    }
    MlBranchResult res = gll_core(beta, mu_r, z, params.tol);
    if (!res.converged) return res;
    for (int i = 0; i < steps; ++i) {
        double m_low = mu_r + beta * i;
        res.value = (res.value - reciprocal_gamma(m_low)) / z;
        res.error = res.error / std::abs(z) + 1e-16;
    }
    return res;
}

}  // namespace detail

// --- dispatcher ---------------------------------------------------------------

std::complex<double> mittag_leffler(const MLParams& params, std::complex<double> z) {
    params.validate();
    using namespace detail;

    const double ax = std::abs(z);
    if (ax == 0.0) return reciprocal_gamma(params.mu);

    std::complex<double> cf;
    if (closed_form(params.beta, params.mu, z, cf)) return cf;

    if (ax > kMlZMax) {
        // leading asymptotic term only, by design
        auto res = ml_asymptotic(params, z, 2);
        return res.value;
    }

    const bool real_axis = (z.imag() == 0.0);
    const double budget = real_axis ? kSeriesBudgetReal : kSeriesBudgetComplex;
    const double x_switch = series_switch_radius(params.beta, budget);

    if (ax <= x_switch) {
        auto res = ml_series(params, z);
        if (res.converged) return res.value;
        // small-beta series can exhaust the term cap; fall through
    }

    auto scale = [&](const MlBranchResult& r) {
        return params.tol * std::max(std::abs(r.value), 0.01 / (1.0 + ax));
    };

    auto asym = ml_asymptotic(params, z);
    if (asym.converged && asym.error <= scale(asym)) return asym.value;

    if (params.beta < 1.0) {
        auto integ = ml_integral(params, z);
        if (integ.converged && integ.error <= scale(integ)) return integ.value;
    }

    if (asym.converged) return asym.value;  // best effort before giving up entirely
    throw numeric_error("mittag_leffler: no branch reached the requested tolerance (beta=" +
                        std::to_string(params.beta) + ", mu=" + std::to_string(params.mu) +
                        ", |z|=" + std::to_string(ax) + ")");
}

double mittag_leffler(const MLParams& params, double x) {
    return mittag_leffler(params, std::complex<double>(x, 0.0)).real();
}

double relaxation_kernel(const FracOrder& alpha, double lambda, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("relaxation_kernel: t must be positive");
    if (lambda < 0.0) throw std::invalid_argument("relaxation_kernel: lambda must be >= 0");
    const double a = alpha.alpha;
    if (a == 1.0) return std::exp(-lambda * t);
    if (a == 2.0) {
        if (lambda == 0.0) return t;
        double w = std::sqrt(lambda);
        return std::sin(w * t) / w;
    }
    MLParams p(a, a);
    return std::pow(t, a - 1.0) * mittag_leffler(p, -lambda * std::pow(t, a));
}

}  // namespace fracorbit
