#include "hyperchoq/heat_kernel.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "hyperchoq/geometry.hpp"
#include "hyperchoq/parallel.hpp"
#include "hyperchoq/radial_field.hpp"

namespace hyperchoq {

void validate(const HeatEvalOptions& opts) {
    if (!(opts.quad_tolerance > 0.0) || opts.quad_tolerance > 1e-2)
        throw std::domain_error("HeatEvalOptions: quad_tolerance must lie in (0, 1e-2]");
    if (opts.max_subdivisions < 1)
        throw std::domain_error("HeatEvalOptions: max_subdivisions must be positive");
}

namespace {

using Rat = boost::multiprecision::cpp_rational;
using Int = boost::multiprecision::cpp_int;

struct Key {
    int a, b, d, e;  // powers of rho, 1/t, coth, csch
    bool operator<(const Key& o) const {
        if (a != o.a) return a < o.a;
        if (b != o.b) return b < o.b;
        if (d != o.d) return d < o.d;
        return e < o.e;
    }
};

using RatPoly = std::map<Key, Rat>;

void add_term(RatPoly& p, Key k, const Rat& q) {
    auto [it, inserted] = p.emplace(k, q);
    if (!inserted) {
        it->second += q;
        if (it->second == 0) p.erase(it);
    }
}

/// One application of  -csch(rho) d/drho + (rho/(2t)) csch(rho)  acting on a
/// polynomial in (rho, 1/t, coth rho, csch rho); this is the operator left
/// over when -(1/sinh) d/drho crosses the Gaussian exp(-rho^2/4t).
RatPoly recurrence_step(const RatPoly& p) {
    RatPoly next;
    for (const auto& [k, q] : p) {
        if (k.a > 0) add_term(next, {k.a - 1, k.b, k.d, k.e + 1}, -q * k.a);
        if (k.d > 0) add_term(next, {k.a, k.b, k.d - 1, k.e + 3}, q * k.d);
        if (k.e > 0) add_term(next, {k.a, k.b, k.d + 1, k.e + 1}, q * k.e);
        add_term(next, {k.a + 1, k.b + 1, k.d, k.e + 1}, q / 2);
    }
    return next;
}

using RatSeries = std::vector<Rat>;  // coefficients in y = rho^2

RatSeries series_mul(const RatSeries& a, const RatSeries& b, std::size_t len) {
    RatSeries out(len, Rat(0));
    for (std::size_t i = 0; i < a.size() && i < len; ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < b.size() && i + j < len; ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

Int factorial(int n) {
    Int f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

/// rho/sinh(rho) as a series in y = rho^2 (inverse of sinh(rho)/rho).
RatSeries rho_csch_series(std::size_t len) {
    RatSeries s(len), inv(len, Rat(0));
    for (std::size_t k = 0; k < len; ++k) s[k] = Rat(1, factorial(2 * int(k) + 1));
    inv[0] = 1;
    for (std::size_t n = 1; n < len; ++n) {
        Rat acc = 0;
        for (std::size_t j = 1; j <= n; ++j) acc += s[j] * inv[n - j];
        inv[n] = -acc;
    }
    return inv;
}

/// rho*coth(rho) as a series in y = rho^2.
RatSeries rho_coth_series(std::size_t len) {
    RatSeries csch = rho_csch_series(len);
    RatSeries cosh(len);
    for (std::size_t k = 0; k < len; ++k) cosh[k] = Rat(1, factorial(2 * int(k)));
    return series_mul(csch, cosh, len);
}

double log_sinh(double x) {
    if (x < 0.5) return std::log(std::sinh(x));
    return x - M_LN2 + std::log1p(-std::exp(-2.0 * x));
}

}  // namespace

OddKernelPolynomial::OddKernelPolynomial(int dim) : dim_(dim) {
    if (dim < 1 || dim % 2 == 0)
        throw std::domain_error("OddKernelPolynomial: dimension must be odd and positive");
    const int m = steps();

    RatPoly poly;
    poly[{0, 0, 0, 0}] = 1;
    for (int k = 0; k < m; ++k) poly = recurrence_step(poly);

    int max_de = 0;
    for (const auto& [k, q] : poly) max_de = std::max(max_de, k.d + k.e);

    // Small-rho series: substitute coth = (rho coth rho)/rho and
    // csch = (rho csch rho)/rho, expand in y = rho^2 with exact rationals,
    // and check that every negative power of y cancels.
    const int series_order = 14;  // keep y^0 .. y^{series_order}
    const std::size_t len = static_cast<std::size_t>(series_order + max_de / 2 + 2);
    RatSeries coth_s = rho_coth_series(len);
    RatSeries csch_s = rho_csch_series(len);

    std::map<std::pair<int, int>, RatSeries> pow_cache;
    auto powers_of = [&](const RatSeries& base, int p, int tag) -> const RatSeries& {
        auto key = std::make_pair(tag, p);
        auto it = pow_cache.find(key);
        if (it != pow_cache.end()) return it->second;
        RatSeries acc(len, Rat(0));
        acc[0] = 1;
        for (int i = 0; i < p; ++i) acc = series_mul(acc, base, len);
        return pow_cache.emplace(key, std::move(acc)).first->second;
    };

    std::map<int, std::map<int, Rat>> laurent;  // laurent[b][y-order]
    for (const auto& [k, q] : poly) {
        if ((k.a - k.d - k.e) % 2 != 0)
            throw std::logic_error("OddKernelPolynomial: parity violation in recurrence");
        int shift = (k.a - k.d - k.e) / 2;
        RatSeries prod = series_mul(powers_of(coth_s, k.d, 0), powers_of(csch_s, k.e, 1), len);
        auto& bucket = laurent[k.b];
        for (std::size_t j = 0; j < len; ++j) {
            if (prod[j] == 0) continue;
            bucket[shift + static_cast<int>(j)] += q * prod[j];
        }
    }

    int max_b = 0;
    for (const auto& [b, bucket] : laurent) max_b = std::max(max_b, b);
    series_.assign(max_b + 1, std::vector<double>(series_order + 1, 0.0));
    for (const auto& [b, bucket] : laurent) {
        for (const auto& [order, coeff] : bucket) {
            if (order < 0) {
                if (coeff != 0)
                    throw std::logic_error(
                        "OddKernelPolynomial: negative power survived cancellation");
                continue;
            }
            if (order <= series_order)
                series_[b][order] = static_cast<double>(coeff);
        }
    }

    terms_.reserve(poly.size());
    for (const auto& [k, q] : poly)
        terms_.push_back({static_cast<double>(q), k.a, k.b, k.d, k.e});
}

const OddKernelPolynomial& OddKernelPolynomial::get(int dim) {
    static std::map<int, std::unique_ptr<OddKernelPolynomial>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(dim);
    if (it == cache.end())
        it = cache.emplace(dim, std::make_unique<OddKernelPolynomial>(dim)).first;
    return *it->second;
}

double OddKernelPolynomial::polynomial_value(double rho, double inv_t) const {
    if (rho < rho_switch) {
        double y = rho * rho;
        double total = 0.0, tp = 1.0;
        for (std::size_t b = 0; b < series_.size(); ++b) {
            const auto& row = series_[b];
            double acc = 0.0;
            for (std::size_t k = row.size(); k-- > 0;) acc = acc * y + row[k];
            total += acc * tp;
            tp *= inv_t;
        }
        return total;
    }
    double coth = 1.0 / std::tanh(rho);
    double csch = 1.0 / std::sinh(rho);
    KahanSum acc;
    for (const Term& t : terms_) {
        double v = t.coeff;
        for (int i = 0; i < t.rho_pow; ++i) v *= rho;
        for (int i = 0; i < t.invt_pow; ++i) v *= inv_t;
        for (int i = 0; i < t.coth_pow; ++i) v *= coth;
        for (int i = 0; i < t.csch_pow; ++i) v *= csch;
        acc.add(v);
    }
    return acc.value();
}

double OddKernelPolynomial::log_value(double t, double rho) const {
    const int m = steps();
    const double inv_t = 1.0 / t;
    double plog;
    if (inv_t <= 1.0) {
        double p = polynomial_value(rho, inv_t);
        if (!(p > 0.0)) return -HUGE_VAL;
        plog = std::log(p);
    } else {
        // Factor (1/t)^m out of the polynomial: the remaining time powers are
        // t^{m-b} in [0,1], so tiny times cannot overflow the sum before the
        // Gaussian prefactor pulls the product back into range.
        double p;
        if (rho < rho_switch) {
            double y = rho * rho;
            double total = 0.0;
            for (std::size_t b = 0; b < series_.size(); ++b) {
                const auto& row = series_[b];
                double acc = 0.0;
                for (std::size_t k = row.size(); k-- > 0;) acc = acc * y + row[k];
                total += acc * std::pow(t, double(m) - double(b));
            }
            p = total;
        } else {
            double coth = 1.0 / std::tanh(rho);
            double csch = 1.0 / std::sinh(rho);
            KahanSum acc;
            for (const Term& term : terms_) {
                double v = term.coeff * std::pow(t, double(m - term.invt_pow));
                for (int i = 0; i < term.rho_pow; ++i) v *= rho;
                for (int i = 0; i < term.coth_pow; ++i) v *= coth;
                for (int i = 0; i < term.csch_pow; ++i) v *= csch;
                acc.add(v);
            }
            p = acc.value();
        }
        if (!(p > 0.0)) return -HUGE_VAL;
        plog = double(m) * std::log(inv_t) + std::log(p);
    }
    double logpref = -(m + 1) * M_LN2 - (m + 0.5) * std::log(M_PI) - 0.5 * std::log(t) -
                     double(m) * m * t - rho * rho / (4.0 * t);
    return logpref + plog;
}

double OddKernelPolynomial::value(double t, double rho) const {
    return std::exp(log_value(t, rho));
}

namespace {

/// Even-dimensional kernel through the odd one in dimension N+1:
///   p_{t,N}(rho) = sqrt(2) e^{(2N-1)t/4}
///       int_0^inf 2 xi sinh(r) / sqrt(2 sinh(xi^2/2) sinh(rho + xi^2/2))
///                 p_{t,N+1}(r) dxi,   r = rho + xi^2.
double heat_eval_even(int dim, double t, double rho, const HeatEvalOptions& opts) {
    const OddKernelPolynomial& odd = OddKernelPolynomial::get(dim + 1);
    const double shift = (2.0 * dim - 1.0) * t / 4.0 + 0.5 * M_LN2;
    auto integrand = [&](double xi) {
        double r = rho + xi * xi;
        double lp = odd.log_value(t, r);
        if (lp == -HUGE_VAL) return 0.0;
        double ljac = std::log(2.0 * xi) + log_sinh(r) -
                      0.5 * (M_LN2 + log_sinh(0.5 * xi * xi) + log_sinh(rho + 0.5 * xi * xi));
        return std::exp(shift + ljac + lp);
    };
    double r_max = std::sqrt(rho * rho + 2960.0 * t) + 2.0;
    double xi_max = std::sqrt(r_max - rho);
    AdaptiveResult res = adaptive_gauss_kronrod(integrand, 0.0, xi_max,
                                                0.5 * opts.quad_tolerance, opts.max_subdivisions);
    return res.value;
}

}  // namespace

double heat_eval(int dim, double t, double rho, const HeatEvalOptions& opts) {
    validate(opts);
    if (dim < 2) throw std::domain_error("heat_eval: dimension must be >= 2");
    if (!(t > 0.0)) throw std::domain_error("heat_eval: time must be positive");
    if (!(rho >= 0.0)) throw std::domain_error("heat_eval: radius must be nonnegative");
    if (dim % 2 == 1) return OddKernelPolynomial::get(dim).value(t, rho);
    return heat_eval_even(dim, t, rho, opts);
}

double heat_eval_log(int dim, double t, double rho, const HeatEvalOptions& opts) {
    validate(opts);
    if (dim < 2) throw std::domain_error("heat_eval_log: dimension must be >= 2");
    if (!(t > 0.0)) throw std::domain_error("heat_eval_log: time must be positive");
    if (!(rho >= 0.0)) throw std::domain_error("heat_eval_log: radius must be nonnegative");
    if (dim % 2 == 1) return OddKernelPolynomial::get(dim).log_value(t, rho);
    return std::log(heat_eval_even(dim, t, rho, opts));
}

double heat_diag(int dim, double t, const HeatEvalOptions& opts) {
    return heat_eval(dim, t, 0.0, opts);
}

double heat_envelope(int dim, double t, double r) {
    if (dim < 2) throw std::domain_error("heat_envelope: dimension must be >= 2");
    if (!(t > 0.0) || !(r >= 0.0)) throw std::domain_error("heat_envelope: bad arguments");
    double n = dim;
    double logh = -0.5 * n * std::log(4.0 * M_PI * t) - (n - 1.0) * (n - 1.0) * t / 4.0 -
                  0.5 * (n - 1.0) * r - r * r / (4.0 * t) +
                  0.5 * (n - 3.0) * std::log1p(r + t) + std::log1p(r);
    return std::exp(logh);
}

std::pair<double, double> envelope_ratio_bounds(int dim, const HeatEvalOptions& opts) {
    double lo = HUGE_VAL, hi = 0.0;
    for (int i = 0; i <= 24; ++i) {
        double t = 0.1 * std::pow(100.0, i / 24.0);
        for (int j = 0; j <= 25; ++j) {
            double r = 5.0 * j / 25.0;
            double ratio = heat_eval(dim, t, r, opts) / heat_envelope(dim, t, r);
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
    }
    return {lo, hi};
}

double heat_diag_constant(int dim, const HeatEvalOptions& opts) {
    double best = 0.0;
    for (int i = 0; i <= 240; ++i) {
        double t = 1e-4 * std::pow(1e6, i / 240.0);
        best = std::max(best, heat_diag(dim, t, opts) * std::pow(t, 0.5 * dim));
    }
    return best;
}

double semigroup_defect(int dim, double t, const RadialGrid& grid, const HeatEvalOptions& opts) {
    validate(opts);
    if (!(t > 0.0)) throw std::domain_error("semigroup_defect: time must be positive");
    double p2 = heat_eval(dim, 2.0 * t, 0.0, opts);

    // The grid supplies the truncation radius and must resolve the kernel
    // scales; the integral itself runs on adaptive quadrature because cell
    // weights are only second order and the identity holds to much better.
    const double r_max = grid.r_max();
    const double area = unit_sphere_area(dim);
    auto density = [&](double rho) {
        double p = heat_eval(dim, t, rho, opts);
        return area * std::pow(std::sinh(rho), dim - 1) * p * p;
    };

    // |ln density|' ~ (N-1)/(2) + rho/t for large rho, so the integrand decays
    // below any relevant level once rho passes the Gaussian width by a wide
    // margin. Check the truncated tail before integrating.
    double peak = 0.0;
    double rho_peak = 0.0;
    for (int i = 0; i <= 64; ++i) {
        double rho = r_max * i / 64.0;
        double d = density(rho);
        if (d > peak) {
            peak = d;
            rho_peak = rho;
        }
    }
    if (!(peak > 0.0)) throw std::runtime_error("semigroup_defect: integrand vanished on the grid domain");
    if (density(r_max) > 1e-14 * peak)
        throw std::runtime_error("semigroup_defect: grid too short, integrand tail unresolved");

    // Node spacing must resolve the Gaussian width sqrt(2t) around the peak,
    // otherwise the grid cannot represent the kernel it is meant to carry.
    const auto& nodes = grid.nodes();
    double width = std::sqrt(2.0 * t);
    double h_needed = std::max(width / 4.0, 1e-3);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        double mid = 0.5 * (nodes[i] + nodes[i + 1]);
        if (std::abs(mid - rho_peak) > 3.0 * width) continue;
        if (nodes[i + 1] - nodes[i] > h_needed)
            throw std::runtime_error("semigroup_defect: grid too coarse near the integrand peak");
    }

    double rel_tol = std::max(opts.quad_tolerance, 1e-13);
    AdaptiveResult integral = adaptive_gauss_kronrod(density, 0.0, r_max, rel_tol, 4000);
    return std::abs(p2 - integral.value) / p2;
}

}  // namespace hyperchoq
