#pragma once

#include <cmath>
#include <vector>

#include "hyperchoq/heat_kernel.hpp"

namespace hyperchoq {

/// Parameters of the fractional resolvent kernel: the convolution kernel of
/// (-Laplace)^{-alpha/2} on hyperbolic space of dimension dim.
struct KernelSpec {
    int dim = 3;
    double alpha = 2.0;  // 0 < alpha < dim
};

void validate(const KernelSpec& spec);

struct GreenEvalResult {
    double value = 0.0;
    double err_small_t = 0.0;  // error estimate carried by the t < 1 part
    double err_large_t = 0.0;  // error estimate carried by the t >= 1 part
};

/// k_{alpha,N}(rho) = Gamma(alpha/2)^{-1} int_0^inf p_{t,N}(rho) t^{alpha/2-1} dt,
/// integrated on the log-time axis. rho must be strictly positive.
GreenEvalResult green_eval_full(const KernelSpec& spec, double rho,
                                const HeatEvalOptions& opts = {});
double green_eval(const KernelSpec& spec, double rho, const HeatEvalOptions& opts = {});

/// d/drho of the kernel. Odd dimensions use the exact identity
///   k'_{alpha,N}(rho) = -(2 pi sinh rho / Gamma(alpha/2))
///                       int_0^inf e^{N t} p_{t,N+2}(rho) t^{alpha/2-1} dt;
/// even dimensions fall back to fourth-order central differences.
double green_derivative(const KernelSpec& spec, double rho, const HeatEvalOptions& opts = {});

/// Upper bound C (sinh rho0)^{-(N-alpha)} valid on [rho0, inf), with C fitted
/// on a sample of the kernel and inflated by a safety factor. Requires
/// rho0 >= 1 and alpha >= 1; smaller alpha is refused (the sinh power no
/// longer dominates the tail).
double green_tail_bound(const KernelSpec& spec, double rho0, const HeatEvalOptions& opts = {});

/// Limit constant of k_{alpha,N}(rho) rho^{N-alpha} as rho -> 0:
/// Gamma((N-alpha)/2) / (Gamma(alpha/2) pi^{N/2} 2^alpha).
double riesz_limit_constant(const KernelSpec& spec);

/// Memoized kernel: cubic Hermite interpolation of log k against log rho,
/// refined until the midpoint interpolation error is below tol. Outside the
/// table the small-rho power law / large-rho exponential asymptotes extend
/// the evaluation.
class KernelTable {
  public:
    KernelTable(KernelSpec spec, double rho_min, double rho_max, double tol = 1e-8,
                const HeatEvalOptions& opts = {});

    double operator()(double rho) const;
    const KernelSpec& spec() const { return spec_; }
    double rho_min() const { return std::exp(x_.front()); }
    double rho_max() const { return std::exp(x_.back()); }
    std::size_t size() const { return x_.size(); }
    double achieved_tolerance() const { return achieved_; }

  private:
    KernelSpec spec_;
    std::vector<double> x_;  // log rho, uniform spacing
    std::vector<double> y_;  // log k
    std::vector<double> slope_;
    double x0_ = 0.0, inv_h_ = 0.0;
    double head_slope_ = 0.0;  // d log k / d log rho at the left end
    double tail_rate_ = 0.0;   // d log k / d rho at the right end
    double achieved_ = 0.0;
    void finalize();
};

}  // namespace hyperchoq
