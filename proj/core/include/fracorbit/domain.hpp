#ifndef FRACORBIT_DOMAIN_HPP
#define FRACORBIT_DOMAIN_HPP

#include <complex>
#include <vector>

#include "fracorbit/geometry.hpp"
#include "fracorbit/profile.hpp"

namespace fracorbit {

// Spatial problem setting: either a bounded hyperrectangle with the
// Dirichlet Laplacian (coordinates centered so the orbit start sits at
// the domain center, giving closed-form eigenpairs), or free space with
// the constant-coefficient operator -div(A grad) + b.grad + c whose
// Fourier symbol is S(xi) = A xi.xi + i b.xi + c.
struct DomainSpec {
    enum class Kind { Bounded, FreeSpace };

    Kind kind;
    int dim;

    // bounded: box (-lengths[a]/2, lengths[a]/2)^d
    Point lengths{0.0, 0.0, 0.0};
    int mode_cap = 4096;

    // free space
    std::array<Point, kMaxDim> diffusion{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};  // A, symmetric pd
    Point drift{0.0, 0.0, 0.0};                                               // b
    double reaction = 0.0;                                                    // c
    double xi_max = 0.0;
    int n_freq = 0;

    static DomainSpec interval(double length, int mode_cap = 4096);
    static DomainSpec box(int dim, const Point& lengths, int mode_cap = 4096);
    static DomainSpec free_space(int dim, double xi_max, int n_freq);

    bool bounded() const { return kind == Kind::Bounded; }

    // bounded box membership with margin
    bool contains(const Point& x, double margin = 0.0) const;

    std::complex<double> symbol(const Point& xi) const;

    // alpha = 2 on free space requires b = 0 and c >= 0
    void validate_for_alpha(double alpha) const;
};

// Dirichlet eigenpairs of the Laplacian on the centered box: per axis
//   phi_n(x) = sqrt(2/L) sin(n pi (x + L/2)/L),  lambda_n = (n pi / L)^2,
// tensorized over axes and sorted by eigenvalue.
class ModalBasis {
public:
    // Retain every mode with lambda <= lambda_cut, capped at spec.mode_cap.
    ModalBasis(const DomainSpec& spec, double lambda_cut);

    // Default cut for a given source scale: lambda_cut = (pi/(delta/4))^2,
    // so the basis resolves features four times finer than the bump.
    static double default_lambda_cut(double delta);

    int size() const { return static_cast<int>(modes_.size()); }
    double lambda(int k) const { return modes_[k].lambda; }
    double phi(int k, const Point& x) const;

    // L2 coefficients (g(. - center), phi_n) for all modes by tensorized
    // Gauss-Legendre over the translated support cube.
    std::vector<double> source_coefficients(const SourceProfile& g, const Point& center,
                                            int quad_points) const;

    // Same quadrature for the gradient component (d_k g(. - center), phi_n).
    std::vector<double> gradient_coefficients(const SourceProfile& g, const Point& center,
                                              int quad_points, int axis) const;

    const DomainSpec& spec() const { return spec_; }

private:
    struct Mode {
        std::array<int, kMaxDim> n;
        double lambda;
    };
    DomainSpec spec_;
    std::vector<Mode> modes_;
};

// Uniform frequency grid [-xi_max, xi_max)^d for the free-space solver.
class FrequencyGrid {
public:
    explicit FrequencyGrid(const DomainSpec& spec);

    int dim() const { return dim_; }
    int n_per_axis() const { return n_; }
    double dxi() const { return dxi_; }
    std::size_t size() const { return total_; }

    Point xi(std::size_t flat) const;
    std::complex<double> symbol(std::size_t flat) const { return symbols_[flat]; }

    // cell volume for the band-limited inverse transform Riemann sum
    double cell() const;

private:
    DomainSpec spec_;
    int dim_;
    int n_;
    double dxi_;
    std::size_t total_;
    std::vector<std::complex<double>> symbols_;
};

}  // namespace fracorbit

#endif
