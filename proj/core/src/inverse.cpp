#include "fracorbit/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "fracorbit/errors.hpp"
#include "fracorbit/fracops.hpp"
#include "fracorbit/gamma.hpp"
#include "fracorbit/mittag_leffler.hpp"

namespace fracorbit {

using std::numbers::pi;
using Complex = std::complex<double>;

namespace {

// Spectral marching engine shared by the local and global schemes.
// Components are eigenmodes (bounded) or frequency nodes (free space);
// for each, the engine holds the antiderivative tables of its relaxation
// kernel and the source-density history along the recovered orbit.
class MarchEngine {
public:
    MarchEngine(const SourceProfile& g, const FracOrder& alpha, const DomainSpec& domain,
                const TimeGrid& grid, const ReconstructionConfig& cfg)
        : g_(g), alpha_(alpha), domain_(domain), grid_(grid), cfg_(cfg) {
        if (domain.bounded()) {
            basis_ = std::make_shared<ModalBasis>(domain, ModalBasis::default_lambda_cut(g.delta));
            const int nm = basis_->size();
            km_.resize(nm);
            for (int k = 0; k < nm; ++k)
                km_[k] = kernel_moments(alpha, basis_->lambda(k), grid, cfg.ml_tol);
            density_.resize(nm);
        } else {
            freq_ = std::make_shared<FrequencyGrid>(domain);
            ghat_ = profile_fourier(g, domain.n_freq, domain.xi_max);
            const std::size_t nf = freq_->size();
            km_c_.resize(nf);
            for (std::size_t k = 0; k < nf; ++k)
                km_c_[k] = kernel_moments_symbol(alpha, freq_->symbol(k), grid, cfg.ml_tol);
            density_c_.resize(nf);
        }
    }

    int n_nodes_filled() const {
        return domain_.bounded() ? (density_.empty() ? 0 : static_cast<int>(density_[0].size()))
                                 : (density_c_.empty() ? 0 : static_cast<int>(density_c_[0].size()));
    }

    void set_points(std::span<const Point> pts) {
        points_.assign(pts.begin(), pts.end());
        const int d = g_.dim;
        if (static_cast<int>(points_.size()) != d)
            throw std::invalid_argument("reconstruction: need exactly d observation points");
        if (domain_.bounded()) {
            weights_.assign(points_.size(), std::vector<double>(basis_->size()));
            for (std::size_t j = 0; j < points_.size(); ++j)
                for (int k = 0; k < basis_->size(); ++k)
                    weights_[j][k] = basis_->lambda(k) * basis_->phi(k, points_[j]);
        } else {
            const double norm_f = freq_->cell() * std::pow(2.0 * pi, -0.5 * freq_->dim());
            weights_c_.assign(points_.size(), std::vector<Complex>(freq_->size()));
            for (std::size_t j = 0; j < points_.size(); ++j)
                for (std::size_t k = 0; k < freq_->size(); ++k) {
                    Point xi = freq_->xi(k);
                    weights_c_[j][k] = norm_f * freq_->symbol(k) *
                                       std::exp(Complex(0.0, dot(xi, points_[j])));
                }
        }
    }

    // source density of every component for the source centered at gamma
    std::vector<double> density_real(const Point& gamma) const {
        return basis_->source_coefficients(g_, gamma, cfg_.quad_points);
    }
    std::vector<Complex> density_complex(const Point& gamma) const {
        std::vector<Complex> v(freq_->size());
        for (std::size_t k = 0; k < freq_->size(); ++k) {
            Point xi = freq_->xi(k);
            v[k] = ghat_.values[k] * std::exp(Complex(0.0, -dot(xi, gamma)));
        }
        return v;
    }

    void append_gamma(const Point& gamma) {
        if (domain_.bounded()) {
            auto d = density_real(gamma);
            for (std::size_t k = 0; k < density_.size(); ++k) density_[k].push_back(d[k]);
        } else {
            auto d = density_complex(gamma);
            for (std::size_t k = 0; k < density_c_.size(); ++k) density_c_[k].push_back(d[k]);
        }
    }

    // memory vector (L u(x^j, t_m))_j with the density history on nodes
    // 0..m-1 extended by `last` at node m (piecewise linear in between).
    template <typename Scalar>
    std::vector<double> memory_impl(int m, const std::vector<std::vector<Scalar>>& density,
                                    const std::vector<KernelMoments<Scalar>>& km,
                                    const std::vector<std::vector<Scalar>>& weights,
                                    const std::vector<Scalar>& last) const {
        const double dt = grid_.dt();
        const double tm = grid_.node(m);
        const std::size_t nc = density.size();
        std::vector<Scalar> conv(nc, Scalar{});
        for (std::size_t k = 0; k < nc; ++k) {
            const auto& dk = density[k];
            const auto& mk = km[k];
            Scalar acc{};
            for (int j = 0; j < m; ++j) {
                const int p = m - j;
                Scalar f0 = dk[j];
                Scalar f1 = (j + 1 < m) ? dk[j + 1] : last[k];
                Scalar dk1 = mk.k1[p] - mk.k1[p - 1];
                Scalar dk2 = mk.k2[p] - mk.k2[p - 1];
                acc += f0 * dk1 + (f1 - f0) * (1.0 / dt) * ((tm - grid_.node(j)) * dk1 - dk2);
            }
            conv[k] = acc;
        }
        std::vector<double> mem(points_.size(), 0.0);
        for (std::size_t j = 0; j < points_.size(); ++j) {
            Scalar acc{};
            for (std::size_t k = 0; k < nc; ++k) acc += weights[j][k] * conv[k];
            if constexpr (std::is_same_v<Scalar, Complex>)
                mem[j] = acc.real();
            else
                mem[j] = acc;
        }
        return mem;
    }

    std::vector<double> memory_with_last_real(int m, const std::vector<double>& last) const {
        return memory_impl<double>(m, density_, km_, weights_, last);
    }
    std::vector<double> memory_with_last_complex(int m, const std::vector<Complex>& last) const {
        return memory_impl<Complex>(m, density_c_, km_c_, weights_c_, last);
    }

    std::vector<double> memory_for_gamma(int m, const Point& gamma_m) const {
        if (domain_.bounded()) return memory_with_last_real(m, density_real(gamma_m));
        return memory_with_last_complex(m, density_complex(gamma_m));
    }

    // memory evaluated at the half node t_{m-1/2}: history on 0..m-1 plus a
    // constant extension over the trailing half interval (dt-bisection fallback)
    std::vector<double> memory_half(int m) const {
        const double dt = grid_.dt();
        const double th = grid_.node(m) - 0.5 * dt;
        if (domain_.bounded())
            return memory_half_impl<double>(m, th, density_, weights_, [&](int k, double tau) {
                return kernel_k1(alpha_, basis_->lambda(k), tau, cfg_.ml_tol);
            }, [&](int k, double tau) {
                return kernel_k2(alpha_, basis_->lambda(k), tau, cfg_.ml_tol);
            });
        return memory_half_impl<Complex>(m, th, density_c_, weights_c_, [&](int k, double tau) {
            return kernel_k1_symbol(alpha_, freq_->symbol(k), tau, cfg_.ml_tol);
        }, [&](int k, double tau) {
            return kernel_k2_symbol(alpha_, freq_->symbol(k), tau, cfg_.ml_tol);
        });
    }

    template <typename Scalar, typename K1F, typename K2F>
    std::vector<double> memory_half_impl(int m, double th,
                                         const std::vector<std::vector<Scalar>>& density,
                                         const std::vector<std::vector<Scalar>>& weights,
                                         K1F&& k1f, K2F&& k2f) const {
        const double dt = grid_.dt();
        const std::size_t nc = density.size();
        std::vector<Scalar> conv(nc, Scalar{});
        for (std::size_t k = 0; k < nc; ++k) {
            const auto& dk = density[k];
            Scalar acc{};
            for (int j = 0; j + 1 < m; ++j) {
                Scalar k1a = k1f(static_cast<int>(k), th - grid_.node(j));
                Scalar k1b = k1f(static_cast<int>(k), th - grid_.node(j + 1));
                Scalar k2a = k2f(static_cast<int>(k), th - grid_.node(j));
                Scalar k2b = k2f(static_cast<int>(k), th - grid_.node(j + 1));
                Scalar dk1 = k1a - k1b;
                Scalar dk2 = k2a - k2b;
                acc += dk[j] * dk1 +
                       (dk[j + 1] - dk[j]) * (1.0 / dt) * ((th - grid_.node(j)) * dk1 - dk2);
            }
            // trailing half interval with constant density dk[m-1]
            acc += dk[m - 1] * k1f(static_cast<int>(k), 0.5 * dt);
            conv[k] = acc;
        }
        std::vector<double> mem(points_.size(), 0.0);
        for (std::size_t j = 0; j < points_.size(); ++j) {
            Scalar acc{};
            for (std::size_t k = 0; k < nc; ++k) acc += weights[j][k] * conv[k];
            if constexpr (std::is_same_v<Scalar, Complex>)
                mem[j] = acc.real();
            else
                mem[j] = acc;
        }
        return mem;
    }

    const std::vector<Point>& points() const { return points_; }
    const SourceProfile& profile() const { return g_; }
    const TimeGrid& grid() const { return grid_; }
    bool bounded() const { return domain_.bounded(); }

private:
    SourceProfile g_;
    FracOrder alpha_;
    DomainSpec domain_;
    TimeGrid grid_;
    ReconstructionConfig cfg_;

    std::shared_ptr<ModalBasis> basis_;
    std::vector<KernelMoments<double>> km_;
    std::vector<std::vector<double>> density_;
    std::vector<std::vector<double>> weights_;

    std::shared_ptr<FrequencyGrid> freq_;
    FourierTable ghat_;
    std::vector<KernelMoments<Complex>> km_c_;
    std::vector<std::vector<Complex>> density_c_;
    std::vector<std::vector<Complex>> weights_c_;
};

struct NewtonOutcome {
    Point gamma{0.0, 0.0, 0.0};
    double residual = 0.0;
    double jacobian_cond = 0.0;
    int iterations = 0;
    bool ok = false;
};

// Solve g(x^j - gamma) = target_j, j = 1..d, damped Newton.
NewtonOutcome newton_solve(const SourceProfile& g, std::span<const Point> points,
                           std::span<const double> target, const Point& guess, double tol,
                           int max_iter) {
    const int d = g.dim;
    NewtonOutcome out;
    out.gamma = guess;
    Eigen::VectorXd F(d);
    Eigen::MatrixXd J(d, d);

    auto residual = [&](const Point& gamma, Eigen::VectorXd& r) {
        for (int j = 0; j < d; ++j) r(j) = g.value(sub(points[j], gamma)) - target[j];
        return r.lpNorm<Eigen::Infinity>();
    };

    double rn = residual(out.gamma, F);
    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it;
        if (rn <= tol) {
            out.residual = rn;
            out.ok = true;
            return out;
        }
        for (int j = 0; j < d; ++j) {
            Point grad = g.gradient(sub(points[j], out.gamma));
            for (int k = 0; k < d; ++k) J(j, k) = -grad[k];
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
        double smin = svd.singularValues()(d - 1);
        double smax = svd.singularValues()(0);
        if (!(smin > 0.0) || smax / smin > 1e12) {
            out.residual = rn;
            out.jacobian_cond = (smin > 0.0) ? smax / smin : std::numeric_limits<double>::infinity();
            return out;  // observability violated at runtime
        }
        out.jacobian_cond = smax / smin;
        Eigen::VectorXd step = svd.solve(-F);
        double damp = 1.0;
        Eigen::VectorXd Ftry(d);
        for (int half = 0; half < 10; ++half) {
            Point cand = out.gamma;
            for (int k = 0; k < d; ++k) cand[k] += damp * step(k);
            double rtry = residual(cand, Ftry);
            if (rtry < rn || rtry <= tol) {
                out.gamma = cand;
                F = Ftry;
                rn = rtry;
                break;
            }
            damp *= 0.5;
            if (half == 9) {
                out.residual = rn;
                return out;  // stagnated
            }
        }
    }
    out.residual = rn;
    out.ok = rn <= tol;
    return out;
}

std::vector<SampledFunction> differentiate_traces(const TraceSet& data, const FracOrder& alpha,
                                                  int mollifier_half_width) {
    std::vector<SampledFunction> out;
    out.reserve(data.traces.size());
    for (const auto& tr : data.traces) {
        SampledFunction s = mollifier_half_width > 0 ? mollify(tr, mollifier_half_width) : tr;
        out.push_back(caputo_derivative(s, alpha.alpha));
    }
    return out;
}

ReconstructionResult march(MarchEngine& engine, const TraceSet& data,
                           const std::vector<SampledFunction>& dalpha,
                           const std::vector<int>& active_ids_init, const SourceProfile& g,
                           const ReconstructionConfig& cfg, double eps_for_intervals,
                           double velocity_bound, bool global_reselect) {
    const TimeGrid& grid = data.grid();
    const int n = grid.n_steps;
    const int d = g.dim;

    ReconstructionResult res{grid, {}, {}, {}, 0.0};
    res.gamma.assign(n + 1, Point{0.0, 0.0, 0.0});
    res.diagnostics.resize(n + 1);

    std::vector<int> active = active_ids_init;
    auto activate = [&](const std::vector<int>& ids, int interval_idx, double t0, double t1,
                        double bound) {
        active = ids;
        std::vector<Point> pts;
        for (int id : ids) pts.push_back(data.points[id]);
        engine.set_points(pts);
        res.intervals.push_back({interval_idx, t0, t1, ids, bound});
    };

    // interval boundaries for the global scheme
    double interval_len = global_reselect ? eps_for_intervals / velocity_bound
                                          : std::numeric_limits<double>::infinity();
    int current_interval = 0;

    auto select_points = [&](const Point& y, double t0, double t1) {
        // candidates of X within B_delta(y), ranked by the sampled
        // observability bound of the shifted single/multi-point sets
        std::vector<std::pair<double, int>> scored;
        for (std::size_t i = 0; i < data.points.size(); ++i) {
            Point rel = sub(data.points[i], y);
            if (norm(rel) >= g.delta) continue;
            std::vector<Point> single{rel};
            auto obs = observability_condition(g, single, eps_for_intervals,
                                               cfg.observability_samples, cfg.observability_seed);
            if (d == 1) {
                if (obs.ok) scored.push_back({obs.bound, static_cast<int>(i)});
            } else {
                // rank by gradient magnitude; subsets checked jointly below
                double gn = norm(g.gradient(rel));
                if (gn > 0.0) scored.push_back({1.0 / gn, static_cast<int>(i)});
            }
        }
        std::sort(scored.begin(), scored.end());
        if (static_cast<int>(scored.size()) < d) {
            std::ostringstream os;
            os << "reconstruct_orbit_global: no admissible " << d
               << "-subset of X near y=(" << y[0] << "," << y[1] << "," << y[2] << ")";
            throw numeric_error(os.str());
        }
        std::vector<int> ids;
        double bound = 0.0;
        if (d == 1) {
            ids = {scored[0].second};
            bound = scored[0].first;
        } else {
            // joint check over the best candidates, first passing combination
            int limit = std::min<int>(static_cast<int>(scored.size()), 2 * d + 2);
            std::vector<int> comb(d);
            std::function<bool(int, int)> pick = [&](int start, int chosen) {
                if (chosen == d) {
                    std::vector<Point> pts;
                    for (int c = 0; c < d; ++c) pts.push_back(sub(data.points[scored[comb[c]].second], y));
                    auto obs = observability_condition(g, pts, eps_for_intervals,
                                                       cfg.observability_samples,
                                                       cfg.observability_seed);
                    if (obs.ok) {
                        ids.clear();
                        for (int c = 0; c < d; ++c) ids.push_back(scored[comb[c]].second);
                        bound = obs.bound;
                        return true;
                    }
                    return false;
                }
                for (int i = start; i < limit; ++i) {
                    comb[chosen] = i;
                    if (pick(i + 1, chosen + 1)) return true;
                }
                return false;
            };
            if (!pick(0, 0)) {
                std::ostringstream os;
                os << "reconstruct_orbit_global: observability fails for all candidate subsets near y";
                throw numeric_error(os.str());
            }
        }
        activate(ids, current_interval, t0, t1, bound);
    };

    if (global_reselect) {
        current_interval = 1;
        select_points(Point{0.0, 0.0, 0.0}, 0.0, std::min(interval_len, grid.t_end));
    } else {
        std::vector<Point> pts;
        for (int id : active) pts.push_back(data.points[id]);
        engine.set_points(pts);
        res.intervals.push_back({1, 0.0, grid.t_end, active, 0.0});
    }

    engine.append_gamma(Point{0.0, 0.0, 0.0});  // gamma(0) = 0 seeds the march

    for (int m = 1; m <= n; ++m) {
        const double tm = grid.node(m);

        if (global_reselect) {
            int needed = std::min(1 + static_cast<int>(std::ceil(tm / interval_len - 1e-12)),
                                  1 + static_cast<int>(grid.t_end / interval_len));
            if (needed > current_interval) {
                current_interval = needed;
                Point y = res.gamma[m - 1];
                select_points(y, (current_interval - 1) * interval_len,
                              std::min(current_interval * interval_len, grid.t_end));
            }
        }

        // data term at the active points
        std::vector<double> dat(d);
        for (int j = 0; j < d; ++j) dat[j] = dalpha[active[j]][m];

        // predictor: constant extrapolation of the source density
        Point guess = res.gamma[m - 1];
        std::vector<double> mem = engine.memory_for_gamma(m, guess);
        std::vector<double> target(d);
        for (int j = 0; j < d; ++j) target[j] = dat[j] + mem[j];

        NewtonOutcome nres = newton_solve(g, engine.points(), target, guess, cfg.newton_tol,
                                          cfg.newton_max_iter);
        bool halved = false;
        if (!nres.ok) {
            // local dt bisection: solve an auxiliary half step for a better seed
            std::vector<double> mem_h = engine.memory_half(m);
            std::vector<double> target_h(d);
            for (int j = 0; j < d; ++j)
                target_h[j] = 0.5 * (dalpha[active[j]][m - 1] + dat[j]) + mem_h[j];
            NewtonOutcome half = newton_solve(g, engine.points(), target_h, guess,
                                              cfg.newton_tol * 10.0, cfg.newton_max_iter);
            if (half.ok) {
                Point better = sub(scale(half.gamma, 2.0), res.gamma[m - 1]);
                nres = newton_solve(g, engine.points(), target, better, cfg.newton_tol,
                                    cfg.newton_max_iter);
                halved = true;
            }
        }
        if (!nres.ok) {
            std::ostringstream os;
            os << "reconstruction: Newton failed at step " << m << " (t=" << tm
               << ", residual=" << nres.residual << ", cond=" << nres.jacobian_cond << ")";
            throw numeric_error(os.str());
        }

        // corrector sweeps: refresh the last-interval density at the solution
        for (int sweep = 0; sweep < cfg.corrector_sweeps; ++sweep) {
            mem = engine.memory_for_gamma(m, nres.gamma);
            for (int j = 0; j < d; ++j) target[j] = dat[j] + mem[j];
            NewtonOutcome refined = newton_solve(g, engine.points(), target, nres.gamma,
                                                 cfg.newton_tol, cfg.newton_max_iter);
            if (!refined.ok) break;
            nres = refined;
        }

        res.gamma[m] = nres.gamma;
        res.diagnostics[m] = {tm, nres.residual, nres.jacobian_cond, nres.iterations, halved};
        engine.append_gamma(nres.gamma);
        res.t_covered = tm;
    }
    return res;
}

}  // namespace

Orbit ReconstructionResult::to_orbit(int dim, double velocity_bound) const {
    std::vector<SampledFunction> comps;
    for (int a = 0; a < dim; ++a) {
        SampledFunction s(grid);
        for (int m = 0; m <= grid.n_steps; ++m) s[m] = gamma[m][a];
        comps.push_back(std::move(s));
    }
    return Orbit::sampled(velocity_bound, std::move(comps));
}

std::vector<double> memory_term(const SourceProfile& g, std::span<const Point> gamma_prefix,
                                int m, const FracOrder& alpha, const DomainSpec& domain,
                                std::span<const Point> points, const TimeGrid& grid,
                                const ReconstructionConfig& cfg) {
    if (static_cast<int>(gamma_prefix.size()) < m + 1)
        throw std::invalid_argument("memory_term: gamma_prefix must cover nodes 0..m");
    MarchEngine engine(g, alpha, domain, grid, cfg);
    engine.set_points(points);
    for (int j = 0; j < m; ++j) engine.append_gamma(gamma_prefix[j]);
    if (m == 0) return std::vector<double>(points.size(), 0.0);
    return engine.memory_for_gamma(m, gamma_prefix[m]);
}

ReconstructionResult reconstruct_orbit_local(const TraceSet& data, const SourceProfile& g,
                                             const FracOrder& alpha, const DomainSpec& domain,
                                             const ReconstructionConfig& cfg) {
    const int d = g.dim;
    if (static_cast<int>(data.points.size()) != d)
        throw std::invalid_argument("reconstruct_orbit_local: need exactly d traces");
    if (cfg.observability_eps) {
        auto obs = observability_condition(g, data.points, *cfg.observability_eps,
                                           cfg.observability_samples, cfg.observability_seed);
        if (!obs.ok)
            throw numeric_error("reconstruct_orbit_local: observability precheck failed: " +
                                obs.message);
    }
    auto dalpha = differentiate_traces(data, alpha, cfg.mollifier_half_width);
    MarchEngine engine(g, alpha, domain, data.grid(), cfg);
    std::vector<int> ids(d);
    for (int j = 0; j < d; ++j) ids[j] = j;
    return march(engine, data, dalpha, ids, g, cfg, cfg.observability_eps.value_or(g.delta / 9.0),
                 1.0, false);
}

ReconstructionResult reconstruct_orbit_global(const TraceSet& data, const SourceProfile& g,
                                              const FracOrder& alpha, const DomainSpec& domain,
                                              double velocity_bound, double eps,
                                              const ReconstructionConfig& cfg) {
    if (data.points.size() < static_cast<std::size_t>(g.dim))
        throw std::invalid_argument("reconstruct_orbit_global: too few observation points");
    if (!(eps > 0.0) || !(velocity_bound > 0.0))
        throw std::invalid_argument("reconstruct_orbit_global: eps and K must be positive");
    auto dalpha = differentiate_traces(data, alpha, cfg.mollifier_half_width);
    MarchEngine engine(g, alpha, domain, data.grid(), cfg);
    return march(engine, data, dalpha, {}, g, cfg, eps, velocity_bound, true);
}

std::vector<Eigen::VectorXd> volterra_difference_solve(const DifferenceSystem& sys,
                                                       const TimeGrid& grid) {
    const int n = grid.n_steps;
    const int d = sys.dim;
    const double dt = grid.dt();
    const double scale = std::pow(dt, sys.alpha) * reciprocal_gamma(sys.alpha);
    auto w = detail::power_weights(sys.alpha, n);
    // weight of the implicit endpoint node (p = 1 interval, f_{j+1} part)
    const double w_end = scale * w->b[1];

    std::vector<Eigen::VectorXd> rho(n + 1, Eigen::VectorXd::Zero(d));
    for (int m = 0; m <= n; ++m) {
        Eigen::MatrixXd P = sys.P(m);
        Eigen::VectorXd rhs = sys.rhs[m];
        Eigen::MatrixXd lhs = P;
        if (m > 0) {
            // history: product integration of the piecewise-linear density
            // H(s) = D(t_m, s) rho(s); the unknown rho_m enters through the
            // final interval and moves to the left-hand side.
            Eigen::VectorXd hist = Eigen::VectorXd::Zero(d);
            std::vector<Eigen::VectorXd> H(m);
            for (int j = 0; j < m; ++j) H[j] = sys.Q_density(m, j) * rho[j];
            for (int j = 0; j < m; ++j) {
                const int p = m - j;
                const Eigen::VectorXd& h0 = H[j];
                if (j + 1 < m) {
                    hist += scale * ((w->a[p] - w->b[p]) * h0 + w->b[p] * H[j + 1]);
                } else {
                    hist += scale * (w->a[p] - w->b[p]) * h0;
                }
            }
            rhs += hist;
            lhs -= w_end * sys.Q_density(m, m);
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(lhs, Eigen::ComputeThinU | Eigen::ComputeThinV);
        double smin = svd.singularValues()(d - 1);
        double smax = svd.singularValues()(0);
        if (!(smin > 0.0) || smax / smin > sys.conditioning_threshold) {
            std::ostringstream os;
            os << "volterra_difference_solve: P(t_m) singular at m=" << m
               << " (cond=" << (smin > 0 ? smax / smin : std::numeric_limits<double>::infinity())
               << ")";
            throw numeric_error(os.str());
        }
        rho[m] = svd.solve(rhs);
    }
    return rho;
}

DifferenceSystem build_difference_system(const SourceProfile& g, std::span<const Point> points,
                                         const Orbit& orbit1, const Orbit& orbit2,
                                         const FracOrder& alpha, const DomainSpec& domain,
                                         const TraceSet& traces1, const TraceSet& traces2,
                                         const ReconstructionConfig& cfg) {
    if (!domain.bounded())
        throw std::invalid_argument("build_difference_system: bounded domain required");
    const int d = g.dim;
    const TimeGrid grid = traces1.grid();
    const int n = grid.n_steps;

    auto basis = std::make_shared<ModalBasis>(domain, ModalBasis::default_lambda_cut(g.delta));
    const int nm = basis->size();

    // midpoint surrogate of the mean-value point, tabulated per node
    std::vector<Point> mid(n + 1);
    for (int m = 0; m <= n; ++m)
        mid[m] = scale(add(orbit1.position(grid.node(m)), orbit2.position(grid.node(m))), 0.5);

    // relaxation values E_{a,a}(-lambda (p dt)^a) per mode and lag
    std::vector<std::vector<double>> relax(nm, std::vector<double>(n + 1));
    for (int k = 0; k < nm; ++k) {
        relax[k][0] = reciprocal_gamma(alpha.alpha);
        double lam = basis->lambda(k);
        for (int p = 1; p <= n; ++p) {
            double tau = grid.node(p);
            if (alpha.alpha == 1.0) {
                relax[k][p] = std::exp(-lam * tau);
            } else if (alpha.alpha == 2.0) {
                double w = std::sqrt(lam);
                relax[k][p] = (w == 0.0) ? 1.0 : std::sin(w * tau) / (w * tau);
            } else {
                relax[k][p] = mittag_leffler(MLParams(alpha.alpha, alpha.alpha, cfg.ml_tol),
                                             -lam * std::pow(tau, alpha.alpha));
            }
        }
    }

    // gradient coefficients (d_k g(. - mid(s_j)), phi_n) per node and axis
    std::vector<std::vector<std::vector<double>>> gc(n + 1);
    for (int j = 0; j <= n; ++j) {
        gc[j].resize(d);
        for (int a = 0; a < d; ++a)
            gc[j][a] = basis->gradient_coefficients(g, mid[j], cfg.quad_points, a);
    }

    std::vector<std::vector<double>> phis(points.size(), std::vector<double>(nm));
    for (std::size_t j = 0; j < points.size(); ++j)
        for (int k = 0; k < nm; ++k) phis[j][k] = basis->phi(k, points[j]);

    DifferenceSystem sys;
    sys.dim = d;
    sys.alpha = alpha.alpha;
    std::vector<Point> pts(points.begin(), points.end());

    sys.P = [g, pts, mid, d](int m) {
        Eigen::MatrixXd P(d, d);
        for (int j = 0; j < d; ++j) {
            Point grad = g.gradient(sub(pts[j], mid[m]));
            for (int k = 0; k < d; ++k) P(j, k) = grad[k];
        }
        return P;
    };

    sys.Q_density = [phis, gc, relax, nm, d](int m, int j) {
        // minus sign: moving L w to the right-hand side of P rho = d^a h + int Q rho
        Eigen::MatrixXd D(d, d);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) {
                double acc = 0.0;
                for (int k = 0; k < nm; ++k) acc += gc[j][c][k] * phis[r][k] * relax[k][m - j];
                D(r, c) = -acc;
            }
        return D;
    };

    // rhs: d_t^alpha of the trace differences h = (u1 - u2)(x^j, .)
    sys.rhs.assign(n + 1, Eigen::VectorXd::Zero(d));
    for (int j = 0; j < d; ++j) {
        SampledFunction diff(grid);
        for (int m = 0; m <= n; ++m) diff[m] = traces1.traces[j][m] - traces2.traces[j][m];
        SampledFunction da = caputo_derivative(diff, alpha.alpha);
        for (int m = 0; m <= n; ++m) sys.rhs[m](j) = da[m];
    }
    return sys;
}

StabilityTable stability_experiment(std::span<const std::pair<Orbit, Orbit>> pairs,
                                    const SourceProfile& g, std::span<const double> alphas,
                                    const DomainSpec& domain, std::span<const Point> points,
                                    const TimeGrid& grid, const SolverOptions& fwd_opts,
                                    int mollifier_half_width) {
    StabilityTable table;
    ObservationSet obs{std::vector<Point>(points.begin(), points.end()), grid};

    int pair_id = 0;
    for (const auto& [o1, o2] : pairs) {
        // precondition: distinct orbits
        double cdiff = 0.0;
        for (int m = 0; m <= grid.n_steps; ++m) {
            double t = grid.node(m);
            cdiff = std::max(cdiff, norm(sub(o1.position(t), o2.position(t))));
        }
        if (!(cdiff > 0.0))
            throw std::invalid_argument("stability_experiment: orbit pair " +
                                        std::to_string(pair_id) + " is identical");
        for (double a : alphas) {
            FracOrder order(a);
            auto s1 = solve_moving_source(g, o1, order, domain, obs, fwd_opts);
            auto s2 = solve_moving_source(g, o2, order, domain, obs, fwd_opts);
            double tnorm = 0.0;
            for (std::size_t j = 0; j < points.size(); ++j) {
                SampledFunction diff(grid);
                for (int m = 0; m <= grid.n_steps; ++m)
                    diff[m] = s1.traces.traces[j][m] - s2.traces.traces[j][m];
                if (mollifier_half_width > 0) diff = mollify(diff, mollifier_half_width);
                SampledFunction da = caputo_derivative(diff, a);
                double sup = 0.0;
                for (int m = 0; m <= grid.n_steps; ++m) sup = std::max(sup, std::fabs(da[m]));
                tnorm += sup;
            }
            StabilityRow row{pair_id, a, cdiff, tnorm, cdiff / tnorm};
            table.rows.push_back(row);
            table.max_ratio = std::max(table.max_ratio, row.ratio);
        }
        ++pair_id;
    }
    return table;
}

std::vector<std::pair<Orbit, Orbit>> random_localized_orbit_pairs(int count, int dim, double T,
                                                                  double K, double eps,
                                                                  unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uamp(0.2, 0.9);
    std::uniform_real_distribution<double> ufreq(0.4, 1.2);
    std::uniform_real_distribution<double> usign(-1.0, 1.0);

    auto make = [&]() {
        // sine orbit inside B_eps with |gamma'| <= K:
        // amplitude a_eff <= eps/sqrt(d), 2 pi f a_eff <= K/sqrt(d)
        Point amp{0.0, 0.0, 0.0};
        double f = ufreq(rng);
        for (int a = 0; a < dim; ++a) {
            double cap = std::min(eps, K / (2.0 * pi * f)) / std::sqrt(static_cast<double>(dim));
            amp[a] = uamp(rng) * cap * (usign(rng) >= 0 ? 1.0 : -1.0);
        }
        return Orbit::sine(dim, T, K, amp, f);
    };

    std::vector<std::pair<Orbit, Orbit>> pairs;
    pairs.reserve(count);
    while (static_cast<int>(pairs.size()) < count) {
        Orbit a = make();
        Orbit b = make();
        double diff = 0.0;
        for (int i = 0; i <= 32; ++i) {
            double t = T * i / 32.0;
            diff = std::max(diff, norm(sub(a.position(t), b.position(t))));
        }
        if (diff > 1e-6) pairs.emplace_back(std::move(a), std::move(b));
    }
    return pairs;
}

TraceSet downsample(const TraceSet& fine, int ratio) {
    if (ratio < 1) throw std::invalid_argument("downsample: ratio must be >= 1");
    if (ratio == 1) return fine;
    const TimeGrid& fg = fine.grid();
    if (fg.n_steps % ratio != 0)
        throw std::invalid_argument("downsample: ratio must divide n_steps");
    TimeGrid coarse(fg.t_end, fg.n_steps / ratio);
    TraceSet out;
    out.points = fine.points;
    out.alpha = fine.alpha;
    out.noise_level = fine.noise_level;
    out.noise_seed = fine.noise_seed;
    for (const auto& tr : fine.traces) {
        SampledFunction s(coarse);
        for (int m = 0; m <= coarse.n_steps; ++m) s[m] = tr[m * ratio];
        out.traces.push_back(std::move(s));
    }
    return out;
}

}  // namespace fracorbit
