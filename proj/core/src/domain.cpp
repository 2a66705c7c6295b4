#include "fracorbit/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fracorbit/detail/gauss_legendre.hpp"
#include "fracorbit/errors.hpp"

namespace fracorbit {

using std::numbers::pi;

DomainSpec DomainSpec::interval(double length, int mode_cap) {
    return box(1, {length, 0.0, 0.0}, mode_cap);
}

DomainSpec DomainSpec::box(int dim, const Point& lengths, int mode_cap) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("DomainSpec: dim must be 1..3");
    for (int a = 0; a < dim; ++a)
        if (!(lengths[a] > 0.0))
            throw std::invalid_argument("DomainSpec: side lengths must be positive");
    DomainSpec s;
    s.kind = Kind::Bounded;
    s.dim = dim;
    s.lengths = lengths;
    s.mode_cap = mode_cap;
    return s;
}

DomainSpec DomainSpec::free_space(int dim, double xi_max, int n_freq) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("DomainSpec: dim must be 1..3");
    if (!(xi_max > 0.0)) throw std::invalid_argument("DomainSpec: xi_max must be positive");
    if (n_freq < 2 || (n_freq & (n_freq - 1)) != 0)
        throw std::invalid_argument("DomainSpec: n_freq must be a power of two");
    DomainSpec s;
    s.kind = Kind::FreeSpace;
    s.dim = dim;
    s.xi_max = xi_max;
    s.n_freq = n_freq;
    return s;
}

bool DomainSpec::contains(const Point& x, double margin) const {
    if (kind != Kind::Bounded) return true;
    for (int a = 0; a < dim; ++a)
        if (std::fabs(x[a]) > 0.5 * lengths[a] - margin) return false;
    return true;
}

std::complex<double> DomainSpec::symbol(const Point& xi) const {
    double quad = 0.0;
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) quad += diffusion[a][b] * xi[a] * xi[b];
    return {quad + reaction, dot(drift, xi)};
}

void DomainSpec::validate_for_alpha(double alpha) const {
    if (kind == Kind::FreeSpace && alpha == 2.0) {
        if (norm(drift) != 0.0 || reaction < 0.0)
            throw std::invalid_argument(
                "DomainSpec: alpha = 2 on free space requires b = 0 and c >= 0");
    }
}

// --- ModalBasis ---------------------------------------------------------------

double ModalBasis::default_lambda_cut(double delta) {
    double k = pi / (delta / 4.0);
    return k * k;
}

ModalBasis::ModalBasis(const DomainSpec& spec, double lambda_cut) : spec_(spec) {
    if (!spec.bounded()) throw std::invalid_argument("ModalBasis: domain must be bounded");
    std::array<int, kMaxDim> n_max{1, 1, 1};
    for (int a = 0; a < spec.dim; ++a) {
        n_max[a] = static_cast<int>(std::ceil(spec.lengths[a] * std::sqrt(lambda_cut) / pi));
        n_max[a] = std::max(n_max[a], 1);
    }
    std::array<int, kMaxDim> idx{1, 1, 1};
    while (true) {
        double lam = 0.0;
        for (int a = 0; a < spec.dim; ++a) {
            double k = idx[a] * pi / spec.lengths[a];
            lam += k * k;
        }
        if (lam <= lambda_cut) modes_.push_back({idx, lam});
        int a = 0;
        for (; a < spec.dim; ++a) {
            if (++idx[a] <= n_max[a]) break;
            idx[a] = 1;
        }
        if (a == spec.dim) break;
    }
    std::sort(modes_.begin(), modes_.end(),
              [](const Mode& x, const Mode& y) { return x.lambda < y.lambda; });
    if (static_cast<int>(modes_.size()) > spec.mode_cap) modes_.resize(spec.mode_cap);
    if (modes_.empty())
        throw numeric_error("ModalBasis: no modes below the eigenvalue cut; enlarge the domain");
}

double ModalBasis::phi(int k, const Point& x) const {
    const Mode& m = modes_[k];
    double v = 1.0;
    for (int a = 0; a < spec_.dim; ++a) {
        double L = spec_.lengths[a];
        v *= std::sqrt(2.0 / L) * std::sin(m.n[a] * pi * (x[a] + 0.5 * L) / L);
    }
    return v;
}

namespace {

template <typename F>
std::vector<double> project_on_modes(const DomainSpec& spec,
                                     const std::vector<std::array<int, kMaxDim>>& mode_indices,
                                     const SourceProfile& g, const Point& center, int quad_points,
                                     F&& density) {
    const int d = spec.dim;
    const auto rule = detail::gauss_legendre(quad_points);

    std::array<std::vector<double>, kMaxDim> coord;
    std::array<std::vector<double>, kMaxDim> wt;
    std::array<int, kMaxDim> n_axis_max{0, 0, 0};
    for (const auto& n : mode_indices)
        for (int a = 0; a < d; ++a) n_axis_max[a] = std::max(n_axis_max[a], n[a]);

    std::array<std::vector<double>, kMaxDim> sines;
    for (int a = 0; a < d; ++a) {
        coord[a].resize(quad_points);
        wt[a].resize(quad_points);
        double lo = center[a] - g.delta;
        double hi = center[a] + g.delta;
        for (int i = 0; i < quad_points; ++i) {
            coord[a][i] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * rule.nodes[i];
            wt[a][i] = 0.5 * (hi - lo) * rule.weights[i];
        }
        double L = spec.lengths[a];
        sines[a].resize(static_cast<std::size_t>(n_axis_max[a]) * quad_points);
        for (int n = 1; n <= n_axis_max[a]; ++n)
            for (int i = 0; i < quad_points; ++i)
                sines[a][(n - 1) * quad_points + i] =
                    std::sqrt(2.0 / L) * std::sin(n * pi * (coord[a][i] + 0.5 * L) / L);
    }

    std::vector<double> coeff(mode_indices.size(), 0.0);
    std::array<int, kMaxDim> iq{0, 0, 0};
    while (true) {
        Point x{0.0, 0.0, 0.0};
        double w = 1.0;
        for (int a = 0; a < d; ++a) {
            x[a] = coord[a][iq[a]];
            w *= wt[a][iq[a]];
        }
        double gv = density(sub(x, center));
        if (gv != 0.0) {
            double gw = gv * w;
            for (std::size_t k = 0; k < mode_indices.size(); ++k) {
                double p = 1.0;
                for (int a = 0; a < d; ++a)
                    p *= sines[a][(mode_indices[k][a] - 1) * quad_points + iq[a]];
                coeff[k] += gw * p;
            }
        }
        int a = 0;
        for (; a < d; ++a) {
            if (++iq[a] < quad_points) break;
            iq[a] = 0;
        }
        if (a == d) break;
    }
    return coeff;
}

}  // namespace

std::vector<double> ModalBasis::source_coefficients(const SourceProfile& g, const Point& center,
                                                    int quad_points) const {
    std::vector<std::array<int, kMaxDim>> idx;
    idx.reserve(modes_.size());
    for (const Mode& m : modes_) idx.push_back(m.n);
    return project_on_modes(spec_, idx, g, center, quad_points,
                            [&](const Point& rel) { return g.value(rel); });
}

std::vector<double> ModalBasis::gradient_coefficients(const SourceProfile& g, const Point& center,
                                                      int quad_points, int axis) const {
    std::vector<std::array<int, kMaxDim>> idx;
    idx.reserve(modes_.size());
    for (const Mode& m : modes_) idx.push_back(m.n);
    return project_on_modes(spec_, idx, g, center, quad_points,
                            [&](const Point& rel) { return g.gradient(rel)[axis]; });
}


// --- FrequencyGrid --------------------------------------------------------------

FrequencyGrid::FrequencyGrid(const DomainSpec& spec) : spec_(spec) {
    if (spec.bounded()) throw std::invalid_argument("FrequencyGrid: domain must be free space");
    dim_ = spec.dim;
    n_ = spec.n_freq;
    dxi_ = 2.0 * spec.xi_max / n_;
    total_ = 1;
    for (int a = 0; a < dim_; ++a) total_ *= static_cast<std::size_t>(n_);
    symbols_.resize(total_);
    for (std::size_t f = 0; f < total_; ++f) symbols_[f] = spec.symbol(xi(f));
}

Point FrequencyGrid::xi(std::size_t flat) const {
    Point p{0.0, 0.0, 0.0};
    std::size_t rem = flat;
    for (int a = dim_ - 1; a >= 0; --a) {
        int i = static_cast<int>(rem % n_);
        rem /= n_;
        p[a] = (i - n_ / 2) * dxi_;
    }
    return p;
}

double FrequencyGrid::cell() const {
    double c = 1.0;
    for (int a = 0; a < dim_; ++a) c *= dxi_;
    return c;
}

}  // namespace fracorbit
