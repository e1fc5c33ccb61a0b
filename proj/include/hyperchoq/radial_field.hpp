#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "hyperchoq/green_kernel.hpp"

namespace hyperchoq {

/// Radial discretization of hyperbolic space. Nodes are strictly increasing
/// in (0, r_max); every profile carries an implicit Dirichlet zero at r_max.
/// weights[i] is the hyperbolic volume of the cell around node i (cell edges
/// at node midpoints, 0 and r_max at the ends), so the weights sum to the
/// volume of the geodesic ball of radius r_max.
class RadialGrid {
  public:
    /// Log-spaced nodes on [5e-4, 1], uniform spacing from 1 to r_max.
    static RadialGrid make_default(int dim, double r_max = 40.0, std::size_t count = 1000);
    static RadialGrid make_uniform(int dim, double r_max, std::size_t count);
    RadialGrid(int dim, double r_max, std::vector<double> nodes);

    int dim() const { return dim_; }
    double r_max() const { return r_max_; }
    std::size_t size() const { return nodes_.size(); }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }
    double volume() const { return volume_; }

    /// Three-point first derivative at the nodes (one-sided at the first
    /// node, ghost zero at r_max for the last). Diagnostic quality only; the
    /// energy below does not use it.
    std::vector<double> derivative(const std::vector<double>& u) const;

    /// Discrete Dirichlet energy from staggered edge differences: each edge
    /// between consecutive nodes (plus the ghost edge to r_max, where profiles
    /// vanish) contributes its exact volume times the squared slope. Centered
    /// nodal differences would decouple the even and odd sublattices and admit
    /// a spurious zero-energy mode, so the quadratic form lives on edges.
    double dirichlet_energy(const std::vector<double>& u) const;

    /// S u for the tridiagonal stiffness matrix of dirichlet_energy:
    /// u . S u == dirichlet_energy(u). (S u)_i / w_i approximates the radial
    /// Laplace-Beltrami operator applied to -u at node i.
    std::vector<double> apply_stiffness(const std::vector<double>& u) const;

    /// Symmetric band storage of S + shift * W, bandwidth 1:
    /// band[d][j] = A(j+d, j) for d = 0, 1.
    std::vector<std::vector<double>> stiffness_band(double shift) const;

  private:
    int dim_ = 0;
    double r_max_ = 0.0;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    double volume_ = 0.0;
    // Stencil row i has entries (lo, mid, hi) on columns col_[i] + {0,1,2};
    // the last row's hi column is the ghost node and is dropped.
    std::vector<double> st_lo_, st_mid_, st_hi_;
    std::vector<std::size_t> col_;
    // Edge i joins node i to node i+1 (the last edge reaches the ghost node
    // at r_max); edge_w_ holds the hyperbolic volume of the edge interval.
    std::vector<double> edge_w_, edge_h_;
    void build_weights();
    void build_stencil();
};

struct RadialProfile {
    std::vector<double> values;
};

double lq_norm(const RadialGrid& grid, const RadialProfile& u, double q);

/// sqrt( dirichlet_energy(u) - lambda * ||u||_2^2 ). lambda must stay below
/// (N-1)^2/4, the bottom of the spectrum, or the expression stops being a
/// norm and the call is rejected.
double h1_lambda_norm(const RadialGrid& grid, const RadialProfile& u, double lambda);

double rayleigh_quotient(const RadialGrid& grid, const RadialProfile& u);

double spectral_bottom(int dim);

/// Angular average of a radial kernel over a sphere:
/// A(r, s) = omega_{N-2} int_0^pi k(d(r, s, theta)) sin^{N-2}(theta) dtheta,
/// where d is the geodesic side of the hyperbolic triangle. Exactly
/// symmetric in (r, s). The near-diagonal part (d below 0.1) is integrated
/// in the variable sqrt(d - |r-s|); on the diagonal itself it diverges when
/// alpha <= 1 and the call is rejected.
double sphere_average_kernel(const KernelTable& kernel, double r, double s);

/// Radial kernel abstraction for convolution assembly. value(d) for d > 0,
/// with value ~ c d^{-singular_power} as d -> 0 (0 <= singular_power < N).
struct RadialKernelFn {
    std::function<double(double)> value;
    double singular_power = 0.0;
};

/// Dense matrix realization of u |-> k * u on radial profiles. Rows combine
/// an angular average over far pairs with a ball integral around each node
/// covering kernel distances below 0.1; the assembled weighted matrix is
/// symmetrized, so bilinear() is exactly symmetric and apply() is
/// self-adjoint in the weighted inner product.
class ConvolutionOperator {
  public:
    ConvolutionOperator(const RadialGrid& grid, const KernelTable& kernel);
    ConvolutionOperator(const RadialGrid& grid, const RadialKernelFn& kernel);

    RadialProfile apply(const RadialProfile& u) const;
    /// <k * u, v> in the weighted inner product: sum_i w_i (k*u)_i v_i.
    double bilinear(const RadialProfile& u, const RadialProfile& v) const;
    /// Crude upper estimate of the neglected mass beyond r_max, based on an
    /// exponential extension of u past the last node.
    double truncation_estimate(const RadialProfile& u) const;
    const RadialGrid& grid() const { return grid_; }

  private:
    void assemble(const std::function<double(double)>& kernel, double singular_power);
    const RadialGrid& grid_;
    std::function<double(double)> kernel_;
    std::vector<double> matrix_;  // row-major n x n
};

struct ConvolutionResult {
    RadialProfile profile;
    double tail_estimate = 0.0;
};

/// (-Laplace)^{-alpha/2} u on a radial grid. Convenience wrapper that builds
/// the kernel table and the convolution operator on every call; hold a
/// ConvolutionOperator instead when applying repeatedly.
ConvolutionResult inverse_frac_laplacian(const RadialGrid& grid, const KernelSpec& spec,
                                         const RadialProfile& u,
                                         const HeatEvalOptions& opts = {});

}  // namespace hyperchoq
