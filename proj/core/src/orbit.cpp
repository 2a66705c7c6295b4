#include "fracorbit/orbit.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace fracorbit {

Orbit Orbit::zero(int dim, double horizon, double velocity_bound) {
    return Orbit(Kind::Zero, dim, horizon, velocity_bound);
}

Orbit Orbit::linear(int dim, double horizon, double velocity_bound, const Point& velocity) {
    Orbit o(Kind::Linear, dim, horizon, velocity_bound);
    o.velocity_ = velocity;
    return o;
}

Orbit Orbit::sine(int dim, double horizon, double velocity_bound, const Point& amplitude,
                  double frequency) {
    Orbit o(Kind::Sine, dim, horizon, velocity_bound);
    o.amplitude_ = amplitude;
    o.frequency_ = frequency;
    return o;
}

Orbit Orbit::circle(int dim, double horizon, double velocity_bound, double radius, double omega) {
    if (dim < 2) throw std::invalid_argument("Orbit::circle requires dim >= 2");
    Orbit o(Kind::Circle, dim, horizon, velocity_bound);
    o.radius_ = radius;
    o.omega_ = omega;
    return o;
}

Orbit Orbit::sampled(double velocity_bound, std::vector<SampledFunction> components) {
    if (components.empty() || components.size() > kMaxDim)
        throw std::invalid_argument("Orbit::sampled: need 1..3 components");
    for (const auto& c : components)
        if (!(c.grid == components[0].grid))
            throw std::invalid_argument("Orbit::sampled: components must share one grid");
    Orbit o(Kind::Sampled, static_cast<int>(components.size()),
            components[0].grid.t_end, velocity_bound);
    o.samples_ = std::move(components);
    return o;
}

Point Orbit::position(double t) const {
    switch (kind_) {
        case Kind::Zero:
            return {0.0, 0.0, 0.0};
        case Kind::Linear:
            return scale(velocity_, t);
        case Kind::Sine: {
            double s = std::sin(2.0 * std::numbers::pi * frequency_ * t);
            return scale(amplitude_, s);
        }
        case Kind::Circle: {
            double w = omega_ * t;
            return {radius_ * std::sin(w), radius_ * (1.0 - std::cos(w)), 0.0};
        }
        case Kind::Sampled: {
            const TimeGrid& g = samples_[0].grid;
            double pos = std::clamp(t, 0.0, g.t_end) / g.dt();
            int j = std::min(static_cast<int>(pos), g.n_steps - 1);
            double theta = pos - j;
            Point p{0.0, 0.0, 0.0};
            for (int a = 0; a < dim_; ++a)
                p[a] = (1.0 - theta) * samples_[a][j] + theta * samples_[a][j + 1];
            return p;
        }
    }
    return {0.0, 0.0, 0.0};
}

double Orbit::speed_fd(double t, double h) const {
    double lo = std::max(0.0, t - h);
    double hi = std::min(horizon_, t + h);
    Point d = sub(position(hi), position(lo));
    return norm(d) / (hi - lo);
}

std::string Orbit::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::Zero: os << "zero"; break;
        case Kind::Linear: os << "linear v=(" << velocity_[0] << "," << velocity_[1] << "," << velocity_[2] << ")"; break;
        case Kind::Sine: os << "sine amp=(" << amplitude_[0] << "," << amplitude_[1] << "," << amplitude_[2] << ") f=" << frequency_; break;
        case Kind::Circle: os << "circle r=" << radius_ << " omega=" << omega_; break;
        case Kind::Sampled: os << "sampled n=" << samples_[0].grid.n_steps; break;
    }
    return os.str();
}

}  // namespace fracorbit
