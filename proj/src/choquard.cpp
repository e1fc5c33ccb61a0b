#include "hyperchoq/choquard.hpp"

#include <cmath>
#include <stdexcept>

#include "hyperchoq/quadrature.hpp"

namespace hyperchoq {

ExponentClass validate_exponents(const ProblemSpec& spec) {
    if (spec.dim < 3) return ExponentClass::invalid;
    if (!(spec.alpha > 0.0) || !(spec.alpha < spec.dim)) return ExponentClass::invalid;
    if (!(spec.lambda < spectral_bottom(spec.dim))) return ExponentClass::invalid;
    double n = spec.dim;
    double lower = (n + spec.alpha) / n;
    double upper = (n + spec.alpha) / (n - 2.0);
    if (!(spec.p > lower) || spec.p > upper) return ExponentClass::invalid;
    return spec.p == upper ? ExponentClass::critical : ExponentClass::subcritical;
}

namespace {

KernelTable make_table(const RadialGrid& grid, const ProblemSpec& spec,
                       const HeatEvalOptions& opts) {
    KernelSpec ks{spec.dim, spec.alpha};
    return KernelTable(ks, 5e-5, 2.0 * grid.r_max() + 10.0, 1e-8, opts);
}

std::vector<double> abs_power(const std::vector<double>& u, double p) {
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::pow(std::abs(u[i]), p);
    return out;
}

}  // namespace

ChoquardEnergy::ChoquardEnergy(const RadialGrid& grid, const ProblemSpec& spec,
                               const HeatEvalOptions& opts)
    : grid_(grid), spec_(spec), conv_(grid, make_table(grid, spec, opts)) {
    if (validate_exponents(spec) == ExponentClass::invalid)
        throw std::domain_error("problem parameters outside the admissible range");
    if (grid.dim() != spec.dim)
        throw std::invalid_argument("grid dimension does not match the problem");
}

double ChoquardEnergy::norm_lambda_sq(const RadialProfile& u) const {
    double energy = grid_.dirichlet_energy(u.values);
    KahanSum mass;
    for (std::size_t i = 0; i < u.values.size(); ++i)
        mass.add(grid_.weights()[i] * u.values[i] * u.values[i]);
    return energy - spec_.lambda * mass.value();
}

double ChoquardEnergy::nonlocal_term(const RadialProfile& u) const {
    RadialProfile up{abs_power(u.values, spec_.p)};
    return conv_.bilinear(up, up);
}

double ChoquardEnergy::energy_quotient(const RadialProfile& u) const {
    double j = nonlocal_term(u);
    if (!(j > 0.0)) throw std::domain_error("energy quotient needs a nonzero profile");
    return norm_lambda_sq(u) / std::pow(j, 1.0 / spec_.p);
}

double ChoquardEnergy::nehari_scale(const RadialProfile& u) const {
    double j = nonlocal_term(u);
    if (!(j > 0.0)) throw std::domain_error("Nehari scale needs a nonzero profile");
    double q = norm_lambda_sq(u);
    if (!(q > 0.0)) throw std::domain_error("Nehari scale needs positive lambda-norm");
    return std::pow(q / j, 1.0 / (2.0 * spec_.p - 2.0));
}

RadialProfile ChoquardEnergy::quotient_gradient(const RadialProfile& u) const {
    const std::size_t n = u.values.size();
    RadialProfile up{abs_power(u.values, spec_.p)};
    RadialProfile ku = conv_.apply(up);
    KahanSum jsum;
    for (std::size_t i = 0; i < n; ++i)
        jsum.add(grid_.weights()[i] * ku.values[i] * up.values[i]);
    double j = jsum.value();
    if (!(j > 0.0)) throw std::domain_error("quotient gradient needs a nonzero profile");
    double q = norm_lambda_sq(u);
    double pref = 2.0 / std::pow(j, 1.0 / spec_.p);
    double ratio = q / j;
    std::vector<double> su = grid_.apply_stiffness(u.values);
    RadialProfile g;
    g.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double ui = u.values[i];
        double force = std::copysign(std::pow(std::abs(ui), spec_.p - 1.0), ui);
        g.values[i] = pref * (su[i] / grid_.weights()[i] - spec_.lambda * ui -
                              ratio * ku.values[i] * force);
    }
    return g;
}

double ChoquardEnergy::el_residual(const RadialProfile& u) const {
    const std::size_t n = u.values.size();
    RadialProfile up{abs_power(u.values, spec_.p)};
    RadialProfile ku = conv_.apply(up);
    std::vector<double> su = grid_.apply_stiffness(u.values);
    KahanSum num, scale;
    for (std::size_t i = 0; i < n; ++i) {
        double ui = u.values[i];
        double linear = su[i] / grid_.weights()[i] - spec_.lambda * ui;
        double force = ku.values[i] * std::copysign(std::pow(std::abs(ui), spec_.p - 1.0), ui);
        double r = linear - force;
        double w = grid_.weights()[i];
        num.add(w * r * r);
        double size = std::abs(linear) + std::abs(force);
        scale.add(w * size * size);
    }
    if (!(scale.value() > 0.0)) throw std::domain_error("residual of the zero profile");
    return std::sqrt(num.value() / scale.value());
}

double nonlocal_term(const RadialGrid& grid, const ProblemSpec& spec, const RadialProfile& u,
                     const HeatEvalOptions& opts) {
    return ChoquardEnergy(grid, spec, opts).nonlocal_term(u);
}

double energy_quotient(const RadialGrid& grid, const ProblemSpec& spec, const RadialProfile& u,
                       const HeatEvalOptions& opts) {
    return ChoquardEnergy(grid, spec, opts).energy_quotient(u);
}

double nehari_scale(const RadialGrid& grid, const ProblemSpec& spec, const RadialProfile& u,
                    const HeatEvalOptions& opts) {
    return ChoquardEnergy(grid, spec, opts).nehari_scale(u);
}

RadialProfile quotient_gradient(const RadialGrid& grid, const ProblemSpec& spec,
                                const RadialProfile& u, const HeatEvalOptions& opts) {
    return ChoquardEnergy(grid, spec, opts).quotient_gradient(u);
}

double el_residual(const RadialGrid& grid, const ProblemSpec& spec, const RadialProfile& u,
                   const HeatEvalOptions& opts) {
    return ChoquardEnergy(grid, spec, opts).el_residual(u);
}

double hls_constant(int dim, double alpha, double s, double heat_diag_c) {
    if (dim < 2) throw std::domain_error("hls_constant needs dim >= 2");
    if (!(alpha > 0.0) || !(alpha < dim)) throw std::domain_error("hls_constant needs 0 < alpha < dim");
    if (!(s > 1.0) || !(s < dim / alpha))
        throw std::domain_error("hls_constant needs 1 < s < dim/alpha");
    if (!(heat_diag_c > 0.0)) throw std::domain_error("hls_constant needs a positive sup constant");
    double n = dim;
    return std::pow(s / (s - 1.0), 1.0 - alpha / n) * 2.0 * n *
           std::pow(heat_diag_c, alpha / n) /
           (alpha * (n - s * alpha) * std::tgamma(0.5 * alpha));
}

double sharp_hls_constant(int dim, double lambda_exp) {
    if (dim < 1) throw std::domain_error("sharp_hls_constant needs dim >= 1");
    if (!(lambda_exp > 0.0) || !(lambda_exp < dim))
        throw std::domain_error("sharp_hls_constant needs 0 < lambda < dim");
    double n = dim, l = lambda_exp;
    double lg = 0.5 * l * std::log(M_PI) + std::lgamma(0.5 * (n - l)) - std::lgamma(n - 0.5 * l) +
                (l / n - 1.0) * (std::lgamma(0.5 * n) - std::lgamma(n));
    return std::exp(lg);
}

}  // namespace hyperchoq
