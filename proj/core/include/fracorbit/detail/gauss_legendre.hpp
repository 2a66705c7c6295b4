#ifndef FRACORBIT_DETAIL_GAUSS_LEGENDRE_HPP
#define FRACORBIT_DETAIL_GAUSS_LEGENDRE_HPP

#include <cmath>
#include <numbers>
#include <vector>

namespace fracorbit::detail {

struct GaussRule {
    std::vector<double> nodes;    // on (-1,1)
    std::vector<double> weights;
};

// Gauss-Legendre rule by Newton iteration on the Legendre polynomial roots.
inline GaussRule gauss_legendre(int n) {
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    return r;
}

}  // namespace fracorbit::detail

#endif
