#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyperchoq {

/// Thrown when an adaptive rule cannot reach the requested tolerance.
/// Carries the tolerance that was actually achieved.
class QuadratureError : public std::runtime_error {
  public:
    QuadratureError(const std::string& what, double achieved)
        : std::runtime_error(what + " (achieved tolerance " + std::to_string(achieved) + ")"),
          achieved_tolerance(achieved) {}
    double achieved_tolerance;
};

/// Kahan compensated accumulator; the total is independent of favorable
/// cancellation order and keeps long reductions near round-off.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        double y = x - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

/// Gauss-Legendre rule on [-1, 1]; nodes ascending. Cached per order.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussRule& gauss_legendre(int order);

/// Integrates f over [a, b] with one Gauss-Legendre rule of given order.
double gauss_segment(const std::function<double(double)>& f, double a, double b, int order);

struct AdaptiveResult {
    double value = 0.0;
    double error = 0.0;  // estimated absolute error
};

/// Adaptive Gauss-Kronrod 15(7) with bisection. Tolerance is relative to the
/// accumulated |integral| (plus an absolute floor). Throws QuadratureError if
/// the interval budget is exhausted before the tolerance is met.
AdaptiveResult adaptive_gauss_kronrod(const std::function<double(double)>& f, double a, double b,
                                      double rel_tol, int max_subdivisions);

/// Integral of f(u) over the whole real axis for integrands that decay at
/// least double-exponentially in both directions (trapezoid rule with step
/// refinement; bounds grow until the integrand is below `floor` times the
/// peak). Returns the two half-axis pieces split at u = u_split so callers
/// can report where the error lives.
struct SplitAxisResult {
    double below = 0.0;  // integral over u < u_split
    double above = 0.0;  // integral over u >= u_split
    double error = 0.0;  // estimated absolute error of the total
    double value() const { return below + above; }
};

SplitAxisResult trapezoid_real_axis(const std::function<double(double)>& f, double u_seed,
                                    double u_split, double rel_tol, double floor = 1e-300);

}  // namespace hyperchoq
