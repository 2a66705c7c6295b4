#ifndef FRACORBIT_FRAC_ORDER_HPP
#define FRACORBIT_FRAC_ORDER_HPP

#include <cmath>

#include "fracorbit/errors.hpp"

namespace fracorbit {

// Fractional order alpha in (0,2] with its integer ceil/floor.
// alpha <= 1 gives the diffusion regime, alpha in (1,2] diffusion-wave.
struct FracOrder {
    double alpha;

    explicit FracOrder(double a) : alpha(a) {
        if (!(a > 0.0) || a > 2.0)
            throw std::invalid_argument("FracOrder: alpha must lie in (0,2]");
    }

    int ceil_order() const { return static_cast<int>(std::ceil(alpha)); }
    int floor_order() const { return static_cast<int>(std::floor(alpha)); }

    bool is_integer() const { return alpha == 1.0 || alpha == 2.0; }
};

}  // namespace fracorbit

#endif
