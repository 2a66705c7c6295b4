#ifndef FRACORBIT_OBSERVATION_HPP
#define FRACORBIT_OBSERVATION_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracorbit/domain.hpp"
#include "fracorbit/orbit.hpp"
#include "fracorbit/profile.hpp"
#include "fracorbit/time_grid.hpp"

namespace fracorbit {

// Observation geometry: interior points x^j and the sampling grid.
struct ObservationSet {
    std::vector<Point> points;
    TimeGrid grid;
};

// Orbit localization bound: members of the restricted admissible class
// stay inside B_epsilon for all t.
struct LocalizedOrbitBound {
    double epsilon;
};

struct AdmissibilityReport {
    bool pass = true;
    std::string first_violation;  // empty when pass
};

// Checks gamma(0) = 0, the finite-difference velocity bound, support
// containment gamma(t) + supp g in Omega, and (optionally) the
// localization max|gamma| <= epsilon, all on a sampling grid.
AdmissibilityReport check_admissible(const Orbit& orbit, const DomainSpec& domain,
                                     const SourceProfile& g,
                                     std::optional<LocalizedOrbitBound> eps = std::nullopt,
                                     int n_samples = 64, double velocity_tol = 1e-3);

struct ObservabilityResult {
    bool ok = false;
    double bound = 0.0;   // max over samples of |(grad g(y^1) ... grad g(y^d))^{-1}|_2
    std::string message;  // failure description, identifies the offending sample
};

// Estimates the observability constant sup |(grad g(y^1)...grad g(y^d))^{-1}|
// over y^j in B_eps(x^j) by randomized product sampling (n_samples tuples,
// plus the tuple of ball centers). Fails when a sampled gradient matrix is
// singular beyond condition number 1e12.
ObservabilityResult observability_condition(const SourceProfile& g,
                                            std::span<const Point> points, double eps,
                                            int n_samples = 512, unsigned seed = 20240901);

// Same estimate on caller-provided offset tuples (offsets[s*d + j] is added
// to points[j] for sample tuple s); the primitive behind the sampled sup,
// also used to verify monotonicity on nested sample sets.
ObservabilityResult observability_bound_on_samples(const SourceProfile& g,
                                                   std::span<const Point> points,
                                                   std::span<const Point> offsets);

struct ObservationSelection {
    double eps = 0.0;
    std::vector<Point> points;
    bool heuristic = false;  // true for dim > 1 (no closed-form construction)
};

// d = 1: the closed-form construction eps = delta/9,
// x^j = (-1)^j floor(j/2) delta / 4, N = ceil(4 (K T + delta)/delta).
// d > 1 is rejected unless allow_heuristic, in which case points are laid
// on a sphere of radius delta/2 around the orbit start.
ObservationSelection select_observation_points(const SourceProfile& g, double K, double T,
                                               bool allow_heuristic = false);

}  // namespace fracorbit

#endif
