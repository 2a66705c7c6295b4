#ifndef FRACORBIT_ORBIT_HPP
#define FRACORBIT_ORBIT_HPP

#include <optional>
#include <string>
#include <vector>

#include "fracorbit/geometry.hpp"
#include "fracorbit/time_grid.hpp"

namespace fracorbit {

// Source orbit gamma: [0,T] -> R^d with gamma(0) = 0 and |gamma'| <= K.
// Either closed-form (zero / linear / sine / circle) or sampled per
// component with linear interpolation.
class Orbit {
public:
    enum class Kind { Zero, Linear, Sine, Circle, Sampled };

    static Orbit zero(int dim, double horizon, double velocity_bound);
    // gamma(t) = v t
    static Orbit linear(int dim, double horizon, double velocity_bound, const Point& velocity);
    // gamma_i(t) = amplitude_i sin(2 pi frequency t)
    static Orbit sine(int dim, double horizon, double velocity_bound, const Point& amplitude,
                      double frequency);
    // gamma(t) = radius (sin(omega t), 1 - cos(omega t)), dim >= 2
    static Orbit circle(int dim, double horizon, double velocity_bound, double radius,
                        double omega);
    // one SampledFunction per component; all on the same grid
    static Orbit sampled(double velocity_bound, std::vector<SampledFunction> components);

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    double horizon() const { return horizon_; }
    double velocity_bound() const { return velocity_bound_; }

    Point position(double t) const;

    // finite-difference velocity magnitude (centered, h relative to horizon)
    double speed_fd(double t, double h = 1e-6) const;

    std::string describe() const;

private:
    Orbit(Kind k, int dim, double horizon, double velocity_bound)
        : kind_(k), dim_(dim), horizon_(horizon), velocity_bound_(velocity_bound) {}

    Kind kind_;
    int dim_;
    double horizon_;
    double velocity_bound_;
    Point velocity_{0, 0, 0};
    Point amplitude_{0, 0, 0};
    double frequency_ = 0.0;
    double radius_ = 0.0;
    double omega_ = 0.0;
    std::vector<SampledFunction> samples_;
};

}  // namespace fracorbit

#endif
