#ifndef FRACORBIT_INVERSE_HPP
#define FRACORBIT_INVERSE_HPP

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fracorbit/forward.hpp"

namespace fracorbit {

struct ReconstructionConfig {
    double newton_tol = 1e-10;
    int newton_max_iter = 50;
    int mollifier_half_width = 0;  // pre-smoothing of measured traces
    int quad_points = 32;          // memory-term source quadrature
    int corrector_sweeps = 1;      // refinements of the last-interval density
    double ml_tol = 1e-10;
    std::optional<double> observability_eps;  // run the precheck when set
    int observability_samples = 256;
    unsigned observability_seed = 20240901;
};

struct StepDiagnostics {
    double t = 0.0;
    double newton_residual = 0.0;
    double jacobian_cond = 0.0;
    int newton_iterations = 0;
    bool halved_step = false;  // local dt bisection fallback was used
};

struct IntervalLog {
    int index = 0;
    double t_begin = 0.0;
    double t_end = 0.0;
    std::vector<int> point_ids;  // indices into the data point set
    double observability_bound = 0.0;
};

struct ReconstructionResult {
    TimeGrid grid;
    std::vector<Point> gamma;  // recovered orbit samples, gamma[0] = 0
    std::vector<StepDiagnostics> diagnostics;
    std::vector<IntervalLog> intervals;
    double t_covered = 0.0;  // data may end before the horizon

    Orbit to_orbit(int dim, double velocity_bound) const;
};

// Memory term: the d-vector (L u(x^1,t_m), ..., L u(x^d,t_m)) for the
// source moving along the known prefix gamma_prefix[0..m] (piecewise
// linear), by product integration of the per-mode (or per-frequency)
// relaxation kernels over the history.
std::vector<double> memory_term(const SourceProfile& g, std::span<const Point> gamma_prefix,
                                int m, const FracOrder& alpha, const DomainSpec& domain,
                                std::span<const Point> points, const TimeGrid& grid,
                                const ReconstructionConfig& cfg = {});

// Time-marching recovery of gamma from traces at exactly d points:
// at each node solve g(x^j - gamma) = d_t^alpha u(x^j,t) + L u(x^j,t)
// by Newton's method with Jacobian rows -grad g(x^j - gamma)^T, the
// memory term supplied causally from the already-recovered prefix.
ReconstructionResult reconstruct_orbit_local(const TraceSet& data, const SourceProfile& g,
                                             const FracOrder& alpha, const DomainSpec& domain,
                                             const ReconstructionConfig& cfg = {});

// Interval-by-interval global scheme: on [T_{l-1}, T_l] with T_l = l*eps/K,
// re-selects the d observation points of X within B_delta of the current
// orbit estimate minimizing the sampled observability bound, and carries
// the memory term across intervals.
ReconstructionResult reconstruct_orbit_global(const TraceSet& data, const SourceProfile& g,
                                              const FracOrder& alpha, const DomainSpec& domain,
                                              double velocity_bound, double eps,
                                              const ReconstructionConfig& cfg = {});

// Linear Volterra system of the second kind
//   P(t) rho(t) = rhs(t) + int_0^t Q(t,s) rho(s) ds,
// Q(t,s) = Q_density(t_m, t_j) * (t-s)^{alpha-1}, solved by
// product-integration forward substitution in time.
struct DifferenceSystem {
    int dim = 1;
    double alpha = 1.0;
    std::function<Eigen::MatrixXd(int)> P;
    std::function<Eigen::MatrixXd(int, int)> Q_density;
    std::vector<Eigen::VectorXd> rhs;
    double conditioning_threshold = 1e12;
};

std::vector<Eigen::VectorXd> volterra_difference_solve(const DifferenceSystem& sys,
                                                       const TimeGrid& grid);

// Assembles the difference system linking two orbits: P from grad g at the
// midpoint surrogate of the mean-value point, Q from the modal kernel, rhs
// from d_t^alpha of the trace differences.
DifferenceSystem build_difference_system(const SourceProfile& g, std::span<const Point> points,
                                         const Orbit& orbit1, const Orbit& orbit2,
                                         const FracOrder& alpha, const DomainSpec& domain,
                                         const TraceSet& traces1, const TraceSet& traces2,
                                         const ReconstructionConfig& cfg = {});

struct StabilityRow {
    int pair_id = 0;
    double alpha = 0.0;
    double c_norm_diff = 0.0;   // ||gamma_1 - gamma_2||_{C[0,T]}
    double trace_norm = 0.0;    // sum_j ||d_t^alpha (u_1-u_2)(x^j,.)||_{C[0,T]}
    double ratio = 0.0;
};

struct StabilityTable {
    std::vector<StabilityRow> rows;
    double max_ratio = 0.0;
};

// Empirical Lipschitz-stability harness: for each orbit pair and order,
// two forward solves, fractional differentiation of the trace differences,
// and the ratio of sup norms.
StabilityTable stability_experiment(std::span<const std::pair<Orbit, Orbit>> pairs,
                                    const SourceProfile& g, std::span<const double> alphas,
                                    const DomainSpec& domain, std::span<const Point> points,
                                    const TimeGrid& grid, const SolverOptions& fwd_opts = {},
                                    int mollifier_half_width = 0);

// Random pairs of distinct localized orbits (sine profiles inside B_eps
// with the velocity bound respected), deterministic per seed.
std::vector<std::pair<Orbit, Orbit>> random_localized_orbit_pairs(int count, int dim, double T,
                                                                  double K, double eps,
                                                                  unsigned seed);

// Keep every `ratio`-th sample (grids must divide evenly); the synthetic
// data pipeline generates on a finer grid than it inverts on.
TraceSet downsample(const TraceSet& fine, int ratio);

}  // namespace fracorbit

#endif
