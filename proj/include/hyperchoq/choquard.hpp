#pragma once

#include "hyperchoq/radial_field.hpp"

namespace hyperchoq {

/// Parameters of the nonlocal ground-state problem
///   -Laplace(u) - lambda u = ((-Laplace)^{-alpha/2}|u|^p) |u|^{p-2} u
/// on hyperbolic space of dimension dim.
struct ProblemSpec {
    int dim = 3;
    double alpha = 2.0;
    double p = 2.0;
    double lambda = 0.0;
};

enum class ExponentClass { subcritical, critical, invalid };

/// Admissible window (N+alpha)/N < p < (N+alpha)/(N-2); the upper endpoint
/// is critical, everything else out of range (or dim < 3, alpha outside
/// (0, N), lambda at or above (N-1)^2/4) is invalid.
ExponentClass validate_exponents(const ProblemSpec& spec);

/// Energy machinery for one grid and one problem. Construction builds the
/// kernel table and the convolution matrix, so it is expensive; hold on to
/// the object when evaluating repeatedly.
class ChoquardEnergy {
  public:
    ChoquardEnergy(const RadialGrid& grid, const ProblemSpec& spec,
                   const HeatEvalOptions& opts = {});

    const RadialGrid& grid() const { return grid_; }
    const ProblemSpec& spec() const { return spec_; }
    const ConvolutionOperator& convolution() const { return conv_; }

    /// ||u||_lambda^2 = dirichlet_energy(u) - lambda ||u||_2^2.
    double norm_lambda_sq(const RadialProfile& u) const;
    /// J(u) = <k * |u|^p, |u|^p> in the weighted inner product.
    double nonlocal_term(const RadialProfile& u) const;
    /// I(u) = ||u||_lambda^2 / J(u)^{1/p}, invariant under scaling.
    double energy_quotient(const RadialProfile& u) const;
    /// t*(u) = (||u||_lambda^2 / J(u))^{1/(2p-2)}; t* u lies on the Nehari
    /// manifold ||v||_lambda^2 = J(v).
    double nehari_scale(const RadialProfile& u) const;
    /// Gradient of I in the weighted inner product: <grad, v>_W matches the
    /// directional derivative of energy_quotient. Orthogonal to u exactly.
    RadialProfile quotient_gradient(const RadialProfile& u) const;
    /// Relative Euler-Lagrange residual of the equation at u, measured in
    /// the weighted norm against the size of its two sides.
    double el_residual(const RadialProfile& u) const;

  private:
    const RadialGrid& grid_;
    ProblemSpec spec_;
    ConvolutionOperator conv_;
};

/// One-shot wrappers; each call rebuilds the kernel machinery.
double nonlocal_term(const RadialGrid& grid, const ProblemSpec& spec, const RadialProfile& u,
                     const HeatEvalOptions& opts = {});
double energy_quotient(const RadialGrid& grid, const ProblemSpec& spec, const RadialProfile& u,
                       const HeatEvalOptions& opts = {});
double nehari_scale(const RadialGrid& grid, const ProblemSpec& spec, const RadialProfile& u,
                    const HeatEvalOptions& opts = {});
RadialProfile quotient_gradient(const RadialGrid& grid, const ProblemSpec& spec,
                                const RadialProfile& u, const HeatEvalOptions& opts = {});
double el_residual(const RadialGrid& grid, const ProblemSpec& spec, const RadialProfile& u,
                   const HeatEvalOptions& opts = {});

/// Hardy-Littlewood-Sobolev constant on hyperbolic space for the bound
/// <k * g, g> <= C ||g||_s^2, derived from the heat-kernel sup constant
/// heat_diag_c (see heat_diag_constant). Valid for 1 < s < dim/alpha:
///   C = (s/(s-1))^{1-alpha/N} 2N heat_diag_c^{alpha/N}
///       / (alpha (N - s alpha) Gamma(alpha/2)).
double hls_constant(int dim, double alpha, double s, double heat_diag_c);

/// Sharp Euclidean Hardy-Littlewood-Sobolev constant for the diagonal case,
/// exponent lambda_exp in (0, N):
///   pi^{lambda/2} Gamma(N/2 - lambda/2) / Gamma(N - lambda/2)
///   * (Gamma(N/2) / Gamma(N))^{-1 + lambda/N}.
double sharp_hls_constant(int dim, double lambda_exp);

}  // namespace hyperchoq
