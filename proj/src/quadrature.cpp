#include "hyperchoq/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace hyperchoq {

namespace {

GaussRule compute_gauss_legendre(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    // Newton iteration on P_n with the Tricomi initial guess.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_gauss_legendre(order)).first;
    return it->second;
}

double gauss_segment(const std::function<double(double)>& f, double a, double b, int order) {
    const GaussRule& rule = gauss_legendre(order);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    KahanSum acc;
    for (int i = 0; i < order; ++i) acc.add(rule.weights[i] * f(mid + half * rule.nodes[i]));
    return acc.value() * half;
}

namespace {

// Classic 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK).
constexpr double kGK15Nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kGK15WeightsK[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kGK15WeightsG[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PanelEstimate {
    double value;
    double error;
};

PanelEstimate gk15(const std::function<double(double)>& f, double a, double b) {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double fc = f(mid);
    double resk = fc * kGK15WeightsK[7];
    double resg = fc * kGK15WeightsG[3];
    for (int j = 0; j < 7; ++j) {
        double x = half * kGK15Nodes[j];
        double fsum = f(mid - x) + f(mid + x);
        resk += fsum * kGK15WeightsK[j];
        if (j % 2 == 1) resg += fsum * kGK15WeightsG[j / 2];
    }
    return {resk * half, std::abs(resk - resg) * half};
}

}  // namespace

AdaptiveResult adaptive_gauss_kronrod(const std::function<double(double)>& f, double a, double b,
                                      double rel_tol, int max_subdivisions) {
    struct Panel {
        double a, b, value, error;
    };
    PanelEstimate first = gk15(f, a, b);
    std::vector<Panel> panels{{a, b, first.value, first.error}};
    for (int iter = 0; iter < max_subdivisions; ++iter) {
        double total = 0.0, err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            total += panels[i].value;
            err += panels[i].error;
            if (panels[i].error > panels[worst].error) worst = i;
        }
        double goal = rel_tol * std::max(std::abs(total), 1e-300);
        if (err <= goal) return {total, err};
        Panel p = panels[worst];
        double mid = 0.5 * (p.a + p.b);
        PanelEstimate left = gk15(f, p.a, mid);
        PanelEstimate right = gk15(f, mid, p.b);
        panels[worst] = {p.a, mid, left.value, left.error};
        panels.push_back({mid, p.b, right.value, right.error});
    }
    double total = 0.0, err = 0.0;
    for (const auto& p : panels) {
        total += p.value;
        err += p.error;
    }
    if (err <= rel_tol * std::max(std::abs(total), 1e-300)) return {total, err};
    throw QuadratureError("adaptive Gauss-Kronrod did not converge",
                          err / std::max(std::abs(total), 1e-300));
}

SplitAxisResult trapezoid_real_axis(const std::function<double(double)>& f, double u_seed,
                                    double u_split, double rel_tol, double floor) {
    // Locate a nonzero seed and expand bounds until the integrand has decayed
    // below `floor` relative to the running peak on both sides.
    double peak = std::abs(f(u_seed));
    double u_peak = u_seed;
    for (double probe = -60.0; probe <= 30.0 && peak == 0.0; probe += 1.0) {
        double v = std::abs(f(probe));
        if (v > peak) {
            peak = v;
            u_peak = probe;
        }
    }
    if (peak == 0.0) return {0.0, 0.0, 0.0};

    double lo = u_peak, hi = u_peak;
    const double step_out = 1.0;
    int quiet = 0;
    while (quiet < 3 && lo > u_peak - 400.0) {
        lo -= step_out;
        double v = std::abs(f(lo));
        if (v > peak) peak = v;
        quiet = (v < peak * floor) ? quiet + 1 : 0;
    }
    quiet = 0;
    while (quiet < 3 && hi < u_peak + 400.0) {
        hi += step_out;
        double v = std::abs(f(hi));
        if (v > peak) peak = v;
        quiet = (v < peak * floor) ? quiet + 1 : 0;
    }

    // Trapezoid sums with step halving; each halving only adds midpoints.
    auto add_point = [&](double u, double w, KahanSum& below, KahanSum& above) {
        double v = w * f(u);
        if (u < u_split)
            below.add(v);
        else
            above.add(v);
    };

    double h = 0.5;
    long n = std::max<long>(8, static_cast<long>(std::ceil((hi - lo) / h)));
    h = (hi - lo) / n;
    KahanSum below, above;
    add_point(lo, 0.5, below, above);
    add_point(hi, 0.5, below, above);
    for (long i = 1; i < n; ++i) add_point(lo + i * h, 1.0, below, above);

    double prev_value = (below.value() + above.value()) * h;
    double last_rel = 1.0;
    for (int level = 0; level < 10; ++level) {
        for (long i = 0; i < n; ++i) add_point(lo + (i + 0.5) * h, 1.0, below, above);
        h *= 0.5;
        n *= 2;
        double value = (below.value() + above.value()) * h;
        double diff = std::abs(value - prev_value);
        last_rel = diff / std::max(std::abs(value), 1e-300);
        if (last_rel <= rel_tol) {
            SplitAxisResult out;
            out.below = below.value() * h;
            out.above = above.value() * h;
            out.error = diff;
            return out;
        }
        prev_value = value;
    }
    throw QuadratureError("log-axis trapezoid refinement did not converge", last_rel);
}

}  // namespace hyperchoq
