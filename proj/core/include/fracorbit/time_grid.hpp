#ifndef FRACORBIT_TIME_GRID_HPP
#define FRACORBIT_TIME_GRID_HPP

#include <vector>

#include "fracorbit/errors.hpp"

namespace fracorbit {

// Uniform time grid t_m = m * dt, m = 0..n_steps, on [0, t_end].
struct TimeGrid {
    double t_end;
    int n_steps;

    TimeGrid(double end, int steps) : t_end(end), n_steps(steps) {
        if (!(end > 0.0)) throw std::invalid_argument("TimeGrid: t_end must be positive");
        if (steps < 2) throw std::invalid_argument("TimeGrid: n_steps must be >= 2");
    }

    double dt() const { return t_end / n_steps; }
    double node(int m) const { return t_end * m / n_steps; }
    int size() const { return n_steps + 1; }

    bool operator==(const TimeGrid& o) const {
        return t_end == o.t_end && n_steps == o.n_steps;
    }
};

// Scalar function sampled on a uniform grid.
struct SampledFunction {
    TimeGrid grid;
    std::vector<double> values;

    SampledFunction(TimeGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (static_cast<int>(values.size()) != grid.size())
            throw std::invalid_argument("SampledFunction: values.length must equal n_steps + 1");
    }

    explicit SampledFunction(TimeGrid g) : grid(g), values(g.size(), 0.0) {}

    template <typename F>
    static SampledFunction sample(TimeGrid g, F&& f) {
        SampledFunction s(g);
        for (int m = 0; m < g.size(); ++m) s.values[m] = f(g.node(m));
        return s;
    }

    double operator[](int m) const { return values[m]; }
    double& operator[](int m) { return values[m]; }
};

}  // namespace fracorbit

#endif
