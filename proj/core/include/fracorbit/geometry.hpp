#ifndef FRACORBIT_GEOMETRY_HPP
#define FRACORBIT_GEOMETRY_HPP

#include <array>
#include <cmath>

namespace fracorbit {

inline constexpr int kMaxDim = 3;

// Point in R^d, d <= 3; entries beyond the active dimension stay zero.
using Point = std::array<double, kMaxDim>;

inline Point point1(double x) { return {x, 0.0, 0.0}; }
inline Point point2(double x, double y) { return {x, y, 0.0}; }

inline Point add(const Point& a, const Point& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Point sub(const Point& a, const Point& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Point scale(const Point& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
inline double dot(const Point& a, const Point& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm2(const Point& a) { return dot(a, a); }
inline double norm(const Point& a) { return std::sqrt(norm2(a)); }

}  // namespace fracorbit

#endif
