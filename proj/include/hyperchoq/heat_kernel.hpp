#pragma once

#include <utility>
#include <vector>

#include "hyperchoq/quadrature.hpp"

namespace hyperchoq {

struct HeatEvalOptions {
    double quad_tolerance = 1e-10;  // relative; must lie in (0, 1e-2]
    int max_subdivisions = 4000;
};

void validate(const HeatEvalOptions& opts);

/// Odd-dimensional hyperbolic heat kernel in closed form:
///
///   p_{t,N}(rho) = 2^{-m-1} pi^{-m-1/2} t^{-1/2}
///                  exp(-m^2 t - rho^2/(4t)) P_m(rho, 1/t, coth rho, csch rho)
///
/// with N = 2m+1. P_m is produced by applying -(1/sinh rho) d/drho to the
/// Gaussian m times and commuting the exponential through each step:
/// P_0 = 1 and P_{k+1} = -csch(rho) dP_k/drho + (rho/(2t)) csch(rho) P_k.
/// Coefficients are carried as exact rationals during construction. Below
/// rho_switch the sparse form cancels catastrophically, so evaluation swaps
/// to a power series in rho^2 derived from the same exact arithmetic.
class OddKernelPolynomial {
  public:
    struct Term {
        double coeff;
        int rho_pow;
        int invt_pow;
        int coth_pow;
        int csch_pow;
    };

    explicit OddKernelPolynomial(int dim);

    /// Cached instance per odd dimension (dim >= 1).
    static const OddKernelPolynomial& get(int dim);

    int dim() const { return dim_; }
    int steps() const { return (dim_ - 1) / 2; }
    const std::vector<Term>& terms() const { return terms_; }

    /// Series coefficients of P_m in rho^2 for a given power of 1/t
    /// (row b holds the coefficients of (1/t)^b).
    const std::vector<std::vector<double>>& series_table() const { return series_; }

    static constexpr double rho_switch = 0.5;

    /// P_m(rho, 1/t) with automatic small-rho series switchover.
    double polynomial_value(double rho, double inv_t) const;

    /// log p_{t,dim}(rho); -HUGE_VAL when the value underflows.
    double log_value(double t, double rho) const;
    double value(double t, double rho) const;

  private:
    int dim_;
    std::vector<Term> terms_;
    std::vector<std::vector<double>> series_;  // series_[b][k] multiplies (1/t)^b rho^{2k}
};

/// Heat kernel p_{t,N}(rho) for N >= 2. Odd N evaluates the closed form;
/// even N integrates the (N+1)-dimensional kernel across the interlacing
/// identity with the endpoint singularity removed by r = rho + xi^2.
double heat_eval(int dim, double t, double rho, const HeatEvalOptions& opts = {});

/// log p_{t,N}(rho), usable where the kernel underflows.
double heat_eval_log(int dim, double t, double rho, const HeatEvalOptions& opts = {});

/// On-diagonal value p_{t,N}(0).
double heat_diag(int dim, double t, const HeatEvalOptions& opts = {});

/// Two-sided envelope profile
///   h_N(t,r) = (4 pi t)^{-N/2} e^{-(N-1)^2 t/4 - (N-1) r/2 - r^2/(4t)}
///              (1 + r + t)^{(N-3)/2} (1 + r).
/// The kernel is bounded between positive multiples of h_N.
double heat_envelope(int dim, double t, double r);

/// Empirical envelope ratio bounds {min, max} of p / h over a scan grid.
std::pair<double, double> envelope_ratio_bounds(int dim, const HeatEvalOptions& opts = {});

/// Empirical diagonal constant: sup over a log-spaced t scan of
/// p_{t,N}(0) t^{N/2}.
double heat_diag_constant(int dim, const HeatEvalOptions& opts = {});

class RadialGrid;  // defined in radial_field.hpp

/// Relative semigroup defect at the origin:
///   | p_{2t}(0) - int_0^inf p_t(s)^2 dV(s) | / p_{2t}(0)
/// integrated adaptively over the grid's domain. The grid must resolve the
/// Gaussian width sqrt(2t) near the integrand peak and reach far enough that
/// the truncated tail is negligible; violations throw with a diagnostic.
double semigroup_defect(int dim, double t, const RadialGrid& grid,
                        const HeatEvalOptions& opts = {});

}  // namespace hyperchoq
