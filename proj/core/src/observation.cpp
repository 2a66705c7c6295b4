#include "fracorbit/observation.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace fracorbit {

AdmissibilityReport check_admissible(const Orbit& orbit, const DomainSpec& domain,
                                     const SourceProfile& g,
                                     std::optional<LocalizedOrbitBound> eps, int n_samples,
                                     double velocity_tol) {
    AdmissibilityReport rep;
    auto fail = [&](const std::string& why) {
        rep.pass = false;
        rep.first_violation = why;
        return rep;
    };

    if (norm(orbit.position(0.0)) > 1e-12) return fail("gamma(0) != 0");

    const double T = orbit.horizon();
    const double K = orbit.velocity_bound();
    for (int i = 0; i <= n_samples; ++i) {
        double t = T * i / n_samples;
        double v = orbit.speed_fd(t);
        if (v > K * (1.0 + velocity_tol)) {
            std::ostringstream os;
            os << "velocity bound violated at t=" << t << " (|gamma'|=" << v << " > K=" << K << ")";
            return fail(os.str());
        }
        Point p = orbit.position(t);
        if (domain.bounded()) {
            // support containment: the delta-cube around gamma(t) must stay inside
            if (!domain.contains(p, g.delta)) {
                std::ostringstream os;
                os << "support leaves the domain at t=" << t;
                return fail(os.str());
            }
        }
        if (eps && norm(p) > eps->epsilon + 1e-12) {
            std::ostringstream os;
            os << "orbit leaves B_eps at t=" << t << " (|gamma|=" << norm(p) << ")";
            return fail(os.str());
        }
    }
    return rep;
}

ObservabilityResult observability_bound_on_samples(const SourceProfile& g,
                                                   std::span<const Point> points,
                                                   std::span<const Point> offsets) {
    const int d = g.dim;
    ObservabilityResult res;
    if (static_cast<int>(points.size()) != d) {
        res.message = "observability: need exactly d observation points";
        return res;
    }
    const std::size_t tuples = offsets.size() / d;
    double worst = 0.0;
    Eigen::MatrixXd M(d, d);
    for (std::size_t s = 0; s < tuples; ++s) {
        for (int j = 0; j < d; ++j) {
            Point y = add(points[j], offsets[s * d + j]);
            Point grad = g.gradient(y);
            for (int a = 0; a < d; ++a) M(a, j) = grad[a];
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
        double smax = svd.singularValues()(0);
        double smin = svd.singularValues()(d - 1);
        if (!(smin > 0.0) || smax / smin > 1e12) {
            std::ostringstream os;
            os << "singular gradient matrix at sample tuple " << s << " (y^1=(";
            Point y0 = add(points[0], offsets[s * d]);
            os << y0[0] << "," << y0[1] << "," << y0[2] << "))";
            res.message = os.str();
            res.ok = false;
            return res;
        }
        worst = std::max(worst, 1.0 / smin);
    }
    res.ok = true;
    res.bound = worst;
    return res;
}

ObservabilityResult observability_condition(const SourceProfile& g,
                                            std::span<const Point> points, double eps,
                                            int n_samples, unsigned seed) {
    const int d = g.dim;
    if (static_cast<int>(points.size()) != d)
        throw std::invalid_argument("observability_condition: need exactly d points");
    if (!(eps > 0.0)) throw std::invalid_argument("observability_condition: eps must be positive");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto ball_sample = [&]() {
        Point p{0.0, 0.0, 0.0};
        for (;;) {
            double r2 = 0.0;
            for (int a = 0; a < d; ++a) {
                p[a] = u(rng);
                r2 += p[a] * p[a];
            }
            if (r2 <= 1.0) return scale(p, eps);
        }
    };

    std::vector<Point> offsets;
    offsets.reserve(static_cast<std::size_t>(n_samples + 1) * d);
    for (int j = 0; j < d; ++j) offsets.push_back({0.0, 0.0, 0.0});  // ball centers first
    for (int s = 0; s < n_samples; ++s)
        for (int j = 0; j < d; ++j) offsets.push_back(ball_sample());

    return observability_bound_on_samples(g, points, offsets);
}

ObservationSelection select_observation_points(const SourceProfile& g, double K, double T,
                                               bool allow_heuristic) {
    ObservationSelection sel;
    const double delta = g.delta;
    if (g.dim == 1) {
        sel.eps = delta / 9.0;
        int count = static_cast<int>(std::ceil(4.0 * (K * T + delta) / delta));
        sel.points.reserve(count);
        for (int j = 1; j <= count; ++j) {
            double sign = (j % 2 == 0) ? 1.0 : -1.0;
            sel.points.push_back(point1(sign * (j / 2) * delta / 4.0));
        }
        return sel;
    }
    if (!allow_heuristic)
        throw std::invalid_argument(
            "select_observation_points: closed-form construction is 1-d only "
            "(heuristic placement must be requested explicitly)");
    // heuristic: ring/sphere of radius delta/2 around the orbit start
    sel.eps = delta / 9.0;
    sel.heuristic = true;
    int count = std::max(4 * g.dim, static_cast<int>(std::ceil(4.0 * (K * T + delta) / delta)));
    for (int j = 0; j < count; ++j) {
        double phi = 2.0 * std::numbers::pi * j / count;
        if (g.dim == 2) {
            sel.points.push_back(point2(0.5 * delta * std::cos(phi), 0.5 * delta * std::sin(phi)));
        } else {
            double z = 2.0 * (j + 0.5) / count - 1.0;
            double rxy = std::sqrt(std::max(0.0, 1.0 - z * z));
            double golden = std::numbers::pi * (3.0 - std::sqrt(5.0)) * j;
            sel.points.push_back({0.5 * delta * rxy * std::cos(golden),
                                  0.5 * delta * rxy * std::sin(golden), 0.5 * delta * z});
        }
    }
    return sel;
}

}  // namespace fracorbit
