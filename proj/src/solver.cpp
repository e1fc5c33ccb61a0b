#include "hyperchoq/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hyperchoq/banded.hpp"
#include "hyperchoq/geometry.hpp"
#include "hyperchoq/quadrature.hpp"

namespace hyperchoq {

void validate(const SolverConfig& config) {
    if (config.max_iterations == 0) throw std::domain_error("solver needs max_iterations > 0");
    if (!(config.grad_tolerance > 0.0)) throw std::domain_error("solver needs a positive tolerance");
    if (!(config.backtrack > 0.0) || !(config.backtrack < 1.0))
        throw std::domain_error("solver backtrack factor must lie in (0, 1)");
    if (!(config.armijo_slope > 0.0) || !(config.armijo_slope < 0.5))
        throw std::domain_error("solver armijo slope must lie in (0, 0.5)");
    if (config.max_backtracks < 1 || config.stagnation_window < 1)
        throw std::domain_error("solver needs positive backtrack and stagnation windows");
}

namespace {

struct EnergyState {
    std::vector<double> pw;  // |u|^p
    std::vector<double> ku;  // k * |u|^p
    double j = 0.0;          // <k*|u|^p, |u|^p>
    double q = 0.0;          // ||u||_lambda^2
    double quotient = 0.0;   // q / j^{1/p}
};

bool evaluate(const ChoquardEnergy& energy, const std::vector<double>& u, EnergyState& st) {
    const auto& grid = energy.grid();
    const auto& w = grid.weights();
    const std::size_t n = u.size();
    const double p = energy.spec().p;
    st.pw.resize(n);
    for (std::size_t i = 0; i < n; ++i) st.pw[i] = std::pow(std::abs(u[i]), p);
    RadialProfile kup = energy.convolution().apply(RadialProfile{st.pw});
    st.ku = std::move(kup.values);
    KahanSum jsum, mass;
    for (std::size_t i = 0; i < n; ++i) {
        jsum.add(w[i] * st.ku[i] * st.pw[i]);
        mass.add(w[i] * u[i] * u[i]);
    }
    st.j = jsum.value();
    if (!(st.j > 0.0)) return false;
    st.q = grid.dirichlet_energy(u) - energy.spec().lambda * mass.value();
    if (!(st.q > 0.0)) return false;
    st.quotient = st.q / std::pow(st.j, 1.0 / p);
    return true;
}

double fit_decay_slope(const RadialGrid& grid, const std::vector<double>& u) {
    const auto& rho = grid.nodes();
    double lo = 0.5 * grid.r_max(), hi = 0.75 * grid.r_max();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (rho[i] < lo || rho[i] > hi || !(u[i] > 0.0)) continue;
        double x = rho[i], y = std::log(u[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 4) return 0.0;
    double denom = m * sxx - sx * sx;
    return denom > 0.0 ? (m * sxy - sx * sy) / denom : 0.0;
}

}  // namespace

GroundStateReport solve_ground_state(const ChoquardEnergy& energy, const SolverConfig& config) {
    validate(config);
    if (validate_exponents(energy.spec()) != ExponentClass::subcritical)
        throw std::domain_error("ground-state solver needs strictly subcritical exponents");

    const auto& grid = energy.grid();
    const auto& rho = grid.nodes();
    const auto& w = grid.weights();
    const std::size_t n = grid.size();
    const double p = energy.spec().p;
    const double lambda = energy.spec().lambda;

    // Preconditioner S + (eps - lambda) W: positive definite for every
    // admissible lambda and close to the quadratic part of the Hessian.
    double eps = 0.02 * spectral_bottom(grid.dim());
    BandedSPD precond(grid.stiffness_band(eps - lambda));
    precond.cholesky();

    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i)
        u[i] = std::exp(-rho[i] * rho[i]) + 1e-8 * std::exp(-rho[i]);

    EnergyState st;
    if (!evaluate(energy, u, st)) throw std::runtime_error("seed profile has no energy");

    GroundStateReport report;
    double beta = 1.0;
    double crit = HUGE_VAL;
    int stagnant = 0;
    std::vector<double> g(n), d(n), trial(n);

    std::size_t it = 0;
    for (; it < config.max_iterations; ++it) {
        // Keep the iterate on the Nehari manifold; the quotient is scaling
        // invariant, so this only normalizes the numbers.
        double scale = std::pow(st.q / st.j, 1.0 / (2.0 * p - 2.0));
        if (std::abs(scale - 1.0) > 1e-15) {
            for (std::size_t i = 0; i < n; ++i) u[i] *= scale;
            if (!evaluate(energy, u, st))
                throw std::runtime_error("iterate lost its energy during normalization");
        }

        std::vector<double> su = grid.apply_stiffness(u);
        double pref = 2.0 / std::pow(st.j, 1.0 / p);
        double ratio = st.q / st.j;
        KahanSum gnorm_sq;
        for (std::size_t i = 0; i < n; ++i) {
            double force = std::copysign(std::pow(std::abs(u[i]), p - 1.0), u[i]);
            g[i] = pref * (su[i] / w[i] - lambda * u[i] - ratio * st.ku[i] * force);
            gnorm_sq.add(w[i] * g[i] * g[i]);
        }
        crit = std::sqrt(gnorm_sq.value()) * std::sqrt(st.q) / st.quotient;
        if (crit <= config.grad_tolerance) {
            report.converged = true;
            break;
        }

        std::vector<double> rhs(n);
        for (std::size_t i = 0; i < n; ++i) rhs[i] = -w[i] * g[i];
        d = precond.solve(std::move(rhs));
        KahanSum slope_acc;
        for (std::size_t i = 0; i < n; ++i) slope_acc.add(w[i] * g[i] * d[i]);
        double slope = slope_acc.value();
        if (!(slope < 0.0)) {
            for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
            slope = -gnorm_sq.value();
        }

        double step = std::min(beta * 4.0, 1e3);
        bool accepted = false;
        EnergyState ts;
        for (int bt = 0; bt < config.max_backtracks; ++bt) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = std::max(u[i] + step * d[i], 0.0);
            if (evaluate(energy, trial, ts) &&
                ts.quotient <= st.quotient + config.armijo_slope * step * slope) {
                accepted = true;
                break;
            }
            step *= config.backtrack;
        }
        if (!accepted) {
            // The predicted decrease fell below the resolution of the
            // quotient: numerically stationary.
            report.converged = std::abs(step * slope) <= 1e-12 * st.quotient ||
                               crit <= 100.0 * config.grad_tolerance;
            break;
        }
        double drop = (st.quotient - ts.quotient) / st.quotient;
        u.swap(trial);
        st = std::move(ts);
        beta = step;
        if (drop <= config.stagnation_tolerance) {
            if (++stagnant >= config.stagnation_window) {
                report.converged = crit <= 100.0 * config.grad_tolerance;
                break;
            }
        } else {
            stagnant = 0;
        }
    }
    if (it == config.max_iterations && crit <= config.grad_tolerance) report.converged = true;
    report.iterations = it;
    report.gradient_measure = crit;

    // Final Nehari projection and diagnostics.
    double scale = std::pow(st.q / st.j, 1.0 / (2.0 * p - 2.0));
    for (std::size_t i = 0; i < n; ++i) u[i] *= scale;
    if (!evaluate(energy, u, st)) throw std::runtime_error("projected profile has no energy");
    report.profile.values = u;
    report.quotient = st.quotient;
    report.zeta = 0.5 * (p - 1.0) / p * st.q;
    report.nehari_defect = std::abs(st.q - st.j) / st.q;
    report.el_residual = energy.el_residual(report.profile);

    bool monotone = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(u[i] > 0.0)) monotone = false;
        if (i + 1 < n && u[i + 1] > u[i] * (1.0 + 1e-10) + 1e-300) monotone = false;
    }
    report.monotone = monotone;
    report.decay_slope = fit_decay_slope(grid, u);

    double rate = std::max(-report.decay_slope, 0.5 * (grid.dim() - 1.0) + 1e-3);
    double edge = u[n - 1];
    auto tail_density = [&](double s) {
        double v = edge * std::exp(-rate * (s - rho[n - 1]));
        return unit_sphere_area(grid.dim()) * std::pow(std::sinh(s), grid.dim() - 1) * v * v;
    };
    double tail = gauss_segment(tail_density, grid.r_max(), grid.r_max() + 20.0, 32) +
                  gauss_segment(tail_density, grid.r_max() + 20.0, grid.r_max() + 40.0, 32);
    KahanSum mass;
    for (std::size_t i = 0; i < n; ++i) mass.add(w[i] * u[i] * u[i]);
    report.tail_mass = tail / (mass.value() + tail);
    return report;
}

}  // namespace hyperchoq
