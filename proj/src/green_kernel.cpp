#include "hyperchoq/green_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hyperchoq/parallel.hpp"
#include "hyperchoq/quadrature.hpp"

namespace hyperchoq {

void validate(const KernelSpec& spec) {
    if (spec.dim < 2) throw std::domain_error("kernel dimension must be at least 2");
    if (!(spec.alpha > 0.0) || !(spec.alpha < static_cast<double>(spec.dim)))
        throw std::domain_error("kernel order must satisfy 0 < alpha < dim");
}

namespace {

// log of the integrand of the kernel integral on the log-time axis,
// t = e^u: log( p_t(rho) t^{alpha/2} ) for odd dimensions. Even dimensions
// go through the linear-scale evaluator instead.
double log_time_seed(int dim, double alpha, double rho) {
    // Laplace-point heuristic: the integrand peaks near t ~ rho^2 / (2 N)
    // for small rho and near t ~ rho / (N - 1) for large rho.
    double t_small = rho * rho / (2.0 * dim);
    double t_large = rho / std::max(1.0, dim - 1.0);
    double t_peak = std::max(t_small, std::min(t_large, 1.0 + 0.1 * alpha));
    return std::clamp(std::log(std::max(t_peak, 1e-20)), -55.0, 5.0);
}

}  // namespace

GreenEvalResult green_eval_full(const KernelSpec& spec, double rho, const HeatEvalOptions& opts) {
    validate(spec);
    validate(opts);
    if (!(rho > 0.0)) throw std::domain_error("kernel evaluation needs rho > 0");
    const double half_alpha = 0.5 * spec.alpha;
    const double norm = 1.0 / std::tgamma(half_alpha);
    const bool odd = (spec.dim % 2) == 1;
    const auto& poly = OddKernelPolynomial::get(odd ? spec.dim : spec.dim + 1);

    auto integrand = [&](double u) -> double {
        double t = std::exp(u);
        if (odd) {
            double lp = poly.log_value(t, rho);
            if (lp == -HUGE_VAL) return 0.0;
            return std::exp(lp + half_alpha * u);
        }
        double p = heat_eval(spec.dim, t, rho, opts);
        return p * std::exp(half_alpha * u);
    };

    SplitAxisResult r = trapezoid_real_axis(integrand, log_time_seed(spec.dim, spec.alpha, rho),
                                            0.0, opts.quad_tolerance);
    GreenEvalResult out;
    out.value = norm * r.value();
    out.err_small_t = norm * r.error * std::abs(r.below);
    out.err_large_t = norm * r.error * std::abs(r.above);
    return out;
}

double green_eval(const KernelSpec& spec, double rho, const HeatEvalOptions& opts) {
    return green_eval_full(spec, rho, opts).value;
}

double green_derivative(const KernelSpec& spec, double rho, const HeatEvalOptions& opts) {
    validate(spec);
    validate(opts);
    if (!(rho > 0.0)) throw std::domain_error("kernel derivative needs rho > 0");
    const double half_alpha = 0.5 * spec.alpha;
    if (spec.dim % 2 == 1) {
        // Differentiating the heat kernel in rho lifts it two dimensions:
        // d/drho p_{t,N} = -2 pi sinh(rho) e^{N t} p_{t,N+2}.
        const auto& lifted = OddKernelPolynomial::get(spec.dim + 2);
        auto integrand = [&](double u) -> double {
            double t = std::exp(u);
            double lp = lifted.log_value(t, rho);
            if (lp == -HUGE_VAL) return 0.0;
            return std::exp(lp + spec.dim * t + half_alpha * u);
        };
        SplitAxisResult r = trapezoid_real_axis(
            integrand, log_time_seed(spec.dim + 2, spec.alpha, rho), 0.0, opts.quad_tolerance);
        return -2.0 * M_PI * std::sinh(rho) / std::tgamma(half_alpha) * r.value();
    }
    double h = std::max(1e-4, 1e-3 * rho);
    if (rho - 2.0 * h <= 0.0) h = rho / 4.0;
    double f1 = green_eval(spec, rho - 2.0 * h, opts);
    double f2 = green_eval(spec, rho - h, opts);
    double f3 = green_eval(spec, rho + h, opts);
    double f4 = green_eval(spec, rho + 2.0 * h, opts);
    return (f1 - 8.0 * f2 + 8.0 * f3 - f4) / (12.0 * h);
}

double green_tail_bound(const KernelSpec& spec, double rho0, const HeatEvalOptions& opts) {
    validate(spec);
    if (!(rho0 >= 1.0)) throw std::domain_error("tail bound needs rho0 >= 1");
    if (spec.alpha < 1.0)
        throw std::domain_error("tail bound unsupported for alpha < 1");
    const double power = spec.dim - spec.alpha;
    double sup = 0.0;
    for (int i = 0; i <= 32; ++i) {
        double rho = rho0 + 30.0 * i / 32.0;
        double v = green_eval(spec, rho, opts) * std::pow(std::sinh(rho), power);
        sup = std::max(sup, v);
    }
    return 1.25 * sup * std::pow(std::sinh(rho0), -power);
}

double riesz_limit_constant(const KernelSpec& spec) {
    validate(spec);
    double lg = std::lgamma(0.5 * (spec.dim - spec.alpha)) - std::lgamma(0.5 * spec.alpha) -
                0.5 * spec.dim * std::log(M_PI) - spec.alpha * M_LN2;
    return std::exp(lg);
}

KernelTable::KernelTable(KernelSpec spec, double rho_min, double rho_max, double tol,
                         const HeatEvalOptions& opts)
    : spec_(spec) {
    validate(spec);
    validate(opts);
    if (!(rho_min > 0.0) || !(rho_max > rho_min))
        throw std::domain_error("kernel table needs 0 < rho_min < rho_max");
    if (!(tol > 0.0)) throw std::domain_error("kernel table tolerance must be positive");

    const double xa = std::log(rho_min), xb = std::log(rho_max);
    std::size_t segments = 256;
    const std::size_t max_segments = 1 << 14;

    auto eval_at = [&](const std::vector<double>& xs) {
        std::vector<double> ys(xs.size());
        parallel_for(xs.size(), [&](std::size_t i) {
            double v = green_eval(spec_, std::exp(xs[i]), opts);
            if (!(v > 0.0))
                throw std::runtime_error("kernel underflows inside table range; reduce rho_max");
            ys[i] = std::log(v);
        });
        return ys;
    };

    x_.resize(segments + 1);
    for (std::size_t i = 0; i <= segments; ++i)
        x_[i] = xa + (xb - xa) * static_cast<double>(i) / static_cast<double>(segments);
    y_ = eval_at(x_);

    while (true) {
        // Midpoints double as the refinement nodes, so failed checks cost
        // nothing extra.
        std::vector<double> xm(segments);
        for (std::size_t i = 0; i < segments; ++i) xm[i] = 0.5 * (x_[i] + x_[i + 1]);
        std::vector<double> ym = eval_at(xm);

        finalize();
        double worst = 0.0;
        for (std::size_t i = 0; i < segments; ++i) {
            double approx = (*this)(std::exp(xm[i]));
            double exact = std::exp(ym[i]);
            worst = std::max(worst, std::abs(approx - exact) / std::max(exact, 1e-300));
        }
        achieved_ = worst;
        if (worst <= tol || segments >= max_segments) break;

        std::vector<double> nx(2 * segments + 1), ny(2 * segments + 1);
        for (std::size_t i = 0; i < segments; ++i) {
            nx[2 * i] = x_[i];
            ny[2 * i] = y_[i];
            nx[2 * i + 1] = xm[i];
            ny[2 * i + 1] = ym[i];
        }
        nx.back() = x_.back();
        ny.back() = y_.back();
        x_ = std::move(nx);
        y_ = std::move(ny);
        segments *= 2;
    }
}

void KernelTable::finalize() {
    const std::size_t n = x_.size();
    x0_ = x_.front();
    inv_h_ = static_cast<double>(n - 1) / (x_.back() - x_.front());
    const double h = 1.0 / inv_h_;
    slope_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= 2 && i + 2 < n) {
            slope_[i] = (8.0 * (y_[i + 1] - y_[i - 1]) - (y_[i + 2] - y_[i - 2])) / (12.0 * h);
        } else if (i == 0) {
            slope_[i] = (-3.0 * y_[0] + 4.0 * y_[1] - y_[2]) / (2.0 * h);
        } else if (i == n - 1) {
            slope_[i] = (3.0 * y_[n - 1] - 4.0 * y_[n - 2] + y_[n - 3]) / (2.0 * h);
        } else {
            slope_[i] = (y_[i + 1] - y_[i - 1]) / (2.0 * h);
        }
    }
    head_slope_ = slope_.front();
    // Exponential tail rate in rho itself: d log k / d rho = slope / rho.
    tail_rate_ = slope_.back() / std::exp(x_.back());
}

double KernelTable::operator()(double rho) const {
    if (!(rho > 0.0)) throw std::domain_error("kernel table lookup needs rho > 0");
    double x = std::log(rho);
    if (x <= x_.front()) return std::exp(y_.front() + head_slope_ * (x - x_.front()));
    if (x >= x_.back()) return std::exp(y_.back() + tail_rate_ * (rho - std::exp(x_.back())));
    double s = (x - x0_) * inv_h_;
    std::size_t i = std::min(static_cast<std::size_t>(s), x_.size() - 2);
    double t = s - static_cast<double>(i);
    double h = 1.0 / inv_h_;
    double y0 = y_[i], y1 = y_[i + 1], m0 = slope_[i] * h, m1 = slope_[i + 1] * h;
    double t2 = t * t, t3 = t2 * t;
    double y = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 +
               (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1;
    return std::exp(y);
}

}  // namespace hyperchoq
