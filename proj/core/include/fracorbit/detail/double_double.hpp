#ifndef FRACORBIT_DETAIL_DOUBLE_DOUBLE_HPP
#define FRACORBIT_DETAIL_DOUBLE_DOUBLE_HPP

#include <cmath>

namespace fracorbit::detail {

// Unevaluated double-double value hi + lo with |lo| <= ulp(hi)/2.
// Gives ~32 significant digits; used where alternating series cancel
// far below the size of their largest terms.
struct DoubleDouble {
    double hi = 0.0;
    double lo = 0.0;

    constexpr DoubleDouble() = default;
    constexpr DoubleDouble(double h) : hi(h), lo(0.0) {}
    constexpr DoubleDouble(double h, double l) : hi(h), lo(l) {}

    double value() const { return hi + lo; }
};

// Knuth two-sum: s + err == a + b exactly.
inline DoubleDouble two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

// Fast two-sum, requires |a| >= |b|.
inline DoubleDouble quick_two_sum(double a, double b) {
    double s = a + b;
    return {s, b - (s - a)};
}

// Exact product via FMA.
inline DoubleDouble two_prod(double a, double b) {
    double p = a * b;
    double err = std::fma(a, b, -p);
    return {p, err};
}

inline DoubleDouble dd_add(const DoubleDouble& a, const DoubleDouble& b) {
    DoubleDouble s = two_sum(a.hi, b.hi);
    double lo = s.lo + a.lo + b.lo;
    return quick_two_sum(s.hi, lo);
}

inline DoubleDouble dd_sub(const DoubleDouble& a, const DoubleDouble& b) {
    return dd_add(a, {-b.hi, -b.lo});
}

inline DoubleDouble dd_mul(const DoubleDouble& a, const DoubleDouble& b) {
    DoubleDouble p = two_prod(a.hi, b.hi);
    double lo = p.lo + a.hi * b.lo + a.lo * b.hi;
    return quick_two_sum(p.hi, lo);
}

inline DoubleDouble dd_mul(const DoubleDouble& a, double b) {
    DoubleDouble p = two_prod(a.hi, b);
    double lo = p.lo + a.lo * b;
    return quick_two_sum(p.hi, lo);
}

inline DoubleDouble dd_div(const DoubleDouble& a, const DoubleDouble& b) {
    double q1 = a.hi / b.hi;
    DoubleDouble r = dd_sub(a, dd_mul(b, q1));
    double q2 = r.hi / b.hi;
    r = dd_sub(r, dd_mul(b, q2));
    double q3 = r.hi / b.hi;
    DoubleDouble q = quick_two_sum(q1, q2);
    return dd_add(q, DoubleDouble(q3));
}

inline double dd_abs(const DoubleDouble& a) { return std::fabs(a.value()); }

}  // namespace fracorbit::detail

#endif
