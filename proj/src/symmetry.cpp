#include "hyperchoq/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "hyperchoq/quadrature.hpp"

namespace hyperchoq {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double euclidean_gap(const BallPoint& a, const BallPoint& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.x.size(); ++i) {
        double d = a.x[i] - b.x[i];
        s += d * d;
    }
    return std::sqrt(s);
}

void check_field(const SampledField& field, const char* where) {
    if (field.points.size() != field.values.size())
        throw std::invalid_argument(std::string(where) + ": points and values differ in size");
    if (field.points.empty()) throw std::invalid_argument(std::string(where) + ": empty field");
}

void check_pairs(const SampledField& field, const GeodesicHypersurface& surface,
                 const char* where) {
    check_field(field, where);
    if (field.points.size() % 2 != 0)
        throw std::domain_error(std::string(where) + ": field is not made of point pairs");
    for (std::size_t k = 0; 2 * k < field.points.size(); ++k) {
        BallPoint mirrored = reflect(surface, field.points[2 * k]);
        if (euclidean_gap(mirrored, field.points[2 * k + 1]) > 1e-9)
            throw std::domain_error(std::string(where) +
                                    ": points are not closed under the reflection");
    }
}

}  // namespace

SampledField sample_pair_closed(const GeodesicHypersurface& surface, std::size_t n_pairs,
                                double radius, std::uint64_t seed,
                                const std::function<double(const BallPoint&)>& f) {
    if (n_pairs == 0) throw std::domain_error("sample_pair_closed needs at least one pair");
    if (!(radius > 0.0)) throw std::domain_error("sample_pair_closed needs a positive radius");
    if (!f) throw std::invalid_argument("sample_pair_closed needs a field");
    const std::size_t dim = surface.anchor.dim();
    if (dim < 2) throw std::domain_error("sample_pair_closed needs dim >= 2");

    BallPoint origin(std::vector<double>(dim, 0.0));
    BallPoint mirrored_origin = reflect(surface, origin);
    if (geodesic_radius(mirrored_origin) >= 2.0 * radius)
        throw std::domain_error("sample region is empty: the surface is too far from the ball");

    const double r_lim = std::tanh(0.5 * radius);
    const double lim_factor = 1.0 - r_lim * r_lim;

    SampledField out;
    out.points.resize(2 * n_pairs);
    out.values.resize(2 * n_pairs);
    std::uint64_t density_accepted = 0, pair_kept = 0;

    for (std::size_t k = 0; k < n_pairs; ++k) {
        std::mt19937_64 rng(mix_seed(seed, k));
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        bool done = false;
        for (std::uint64_t attempt = 0; attempt < 1000000 && !done; ++attempt) {
            BallPoint x(std::vector<double>(dim, 0.0));
            double norm = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                x.x[i] = gauss(rng);
                norm += x.x[i] * x.x[i];
            }
            norm = std::sqrt(norm);
            if (norm == 0.0) continue;
            double rad = r_lim * std::pow(unif(rng), 1.0 / static_cast<double>(dim));
            for (std::size_t i = 0; i < dim; ++i) x.x[i] *= rad / norm;
            // Hyperbolic volume has density (2 / (1 - |x|^2))^N against the
            // Euclidean one; rejection against the uniform ball proposal.
            double accept = std::pow(lim_factor / (1.0 - x.norm2()), static_cast<double>(dim));
            if (unif(rng) >= accept) continue;
            ++density_accepted;
            BallPoint y = reflect(surface, x);
            if (geodesic_radius(y) > radius) continue;
            ++pair_kept;
            out.points[2 * k] = x;
            out.points[2 * k + 1] = std::move(y);
            done = true;
        }
        if (!done)
            throw std::runtime_error("sample_pair_closed: rejection sampling failed to land");
    }

    for (std::size_t i = 0; i < out.points.size(); ++i) out.values[i] = f(out.points[i]);

    const int n = static_cast<int>(dim);
    auto shell = [&](double s) {
        return unit_sphere_area(n) * std::pow(std::sinh(s), n - 1);
    };
    double ball_volume = gauss_segment(shell, 0.0, radius, 48);
    double kept_fraction =
        static_cast<double>(pair_kept) / static_cast<double>(std::max<std::uint64_t>(density_accepted, 1));
    out.mc_weight = ball_volume * kept_fraction / static_cast<double>(out.points.size());
    return out;
}

SampledField polarize(const SampledField& field, const GeodesicHypersurface& surface) {
    check_pairs(field, surface, "polarize");
    SampledField out = field;
    for (std::size_t k = 0; 2 * k < field.points.size(); ++k) {
        const BallPoint& a = field.points[2 * k];
        double va = field.values[2 * k], vb = field.values[2 * k + 1];
        Side side = half_space_side(surface, a);
        if (side == Side::on) continue;
        double big = std::max(va, vb), small = std::min(va, vb);
        if (side == Side::plus) {
            out.values[2 * k] = big;
            out.values[2 * k + 1] = small;
        } else {
            out.values[2 * k] = small;
            out.values[2 * k + 1] = big;
        }
    }
    return out;
}

GapEstimate polarization_gap(const SampledField& field, const GeodesicHypersurface& surface,
                             const KernelTable& kernel, double p) {
    check_pairs(field, surface, "polarization_gap");
    if (!(p >= 1.0)) throw std::domain_error("polarization_gap needs p >= 1");
    for (double v : field.values)
        if (v < 0.0) throw std::domain_error("polarization_gap needs nonnegative values");

    SampledField pol = polarize(field, surface);
    const std::size_t n = field.points.size();
    std::vector<double> g(n), h(n);
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = std::pow(field.values[i], p);
        h[i] = std::pow(pol.values[i], p);
    }

    std::vector<double> per_point(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double hh = h[i] * h[j], gg = g[i] * g[j];
            if (hh == gg) continue;
            double d = geodesic_distance(field.points[i], field.points[j]);
            if (d < 1e-3) continue;
            double c = kernel(d) * (hh - gg);
            per_point[i] += c;
            per_point[j] += c;
        }
    }

    double w2 = field.mc_weight * field.mc_weight;
    std::size_t blocks = std::clamp<std::size_t>(n / 4, 2, 25);
    std::vector<double> block_sum(blocks, 0.0);
    KahanSum total;
    for (std::size_t i = 0; i < n; ++i) {
        double c = w2 * per_point[i];
        total.add(c);
        block_sum[i * blocks / n] += c;
    }
    double mean = total.value() / static_cast<double>(blocks);
    double var = 0.0;
    for (double b : block_sum) var += (b - mean) * (b - mean);
    GapEstimate est;
    est.value = total.value();
    est.std_error = std::sqrt(var * static_cast<double>(blocks) / static_cast<double>(blocks - 1));
    return est;
}

std::vector<double> schwarz_rearrange(const std::vector<BallPoint>& points,
                                      const std::vector<double>& values) {
    if (points.size() != values.size())
        throw std::invalid_argument("schwarz_rearrange: points and values differ in size");
    const std::size_t n = points.size();
    std::vector<double> radii(n);
    for (std::size_t i = 0; i < n; ++i) radii[i] = geodesic_radius(points[i]);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return radii[a] < radii[b]; });
    std::vector<double> sorted = values;
    std::stable_sort(sorted.begin(), sorted.end(), std::greater<double>());
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) out[order[j]] = sorted[j];
    return out;
}

namespace {

// Nelder-Mead maximization of fn over Euclidean ball coordinates.
std::vector<double> nelder_mead_max(const std::function<double(const std::vector<double>&)>& fn,
                                    std::vector<double> start, double spread, int max_iter) {
    const std::size_t d = start.size();
    std::vector<std::vector<double>> simplex(d + 1, start);
    for (std::size_t i = 0; i < d; ++i) simplex[i + 1][i] += spread;
    std::vector<double> value(d + 1);
    for (std::size_t i = 0; i <= d; ++i) value[i] = fn(simplex[i]);

    auto worst_best = [&]() {
        std::size_t lo = 0, hi = 0;
        for (std::size_t i = 1; i <= d; ++i) {
            if (value[i] < value[lo]) lo = i;
            if (value[i] > value[hi]) hi = i;
        }
        return std::pair<std::size_t, std::size_t>(lo, hi);
    };

    for (int it = 0; it < max_iter; ++it) {
        auto [lo, hi] = worst_best();
        if (std::abs(value[hi] - value[lo]) <=
            1e-12 * (std::abs(value[hi]) + std::abs(value[lo]) + 1e-30))
            break;
        std::vector<double> centroid(d, 0.0);
        for (std::size_t i = 0; i <= d; ++i) {
            if (i == lo) continue;
            for (std::size_t c = 0; c < d; ++c) centroid[c] += simplex[i][c];
        }
        for (std::size_t c = 0; c < d; ++c) centroid[c] /= static_cast<double>(d);

        auto blend = [&](double t) {
            std::vector<double> p(d);
            for (std::size_t c = 0; c < d; ++c)
                p[c] = centroid[c] + t * (centroid[c] - simplex[lo][c]);
            return p;
        };
        std::vector<double> refl = blend(1.0);
        double v_refl = fn(refl);
        if (v_refl > value[hi]) {
            std::vector<double> exp_p = blend(2.0);
            double v_exp = fn(exp_p);
            if (v_exp > v_refl) {
                simplex[lo] = std::move(exp_p);
                value[lo] = v_exp;
            } else {
                simplex[lo] = std::move(refl);
                value[lo] = v_refl;
            }
            continue;
        }
        bool above_second = true;
        for (std::size_t i = 0; i <= d; ++i)
            if (i != lo && v_refl <= value[i]) above_second = false;
        if (above_second) {
            simplex[lo] = std::move(refl);
            value[lo] = v_refl;
            continue;
        }
        std::vector<double> contr = blend(-0.5);
        double v_contr = fn(contr);
        if (v_contr > value[lo]) {
            simplex[lo] = std::move(contr);
            value[lo] = v_contr;
            continue;
        }
        auto [ignored, best] = worst_best();
        (void)ignored;
        for (std::size_t i = 0; i <= d; ++i) {
            if (i == best) continue;
            for (std::size_t c = 0; c < d; ++c)
                simplex[i][c] = 0.5 * (simplex[i][c] + simplex[best][c]);
            value[i] = fn(simplex[i]);
        }
    }
    auto [lo, hi] = worst_best();
    (void)lo;
    return simplex[hi];
}

}  // namespace

namespace {

// Sum of squared within-shell residuals over equal-width geodesic shells
// about c, plus the value sum of squares for normalization. Two passes so
// the residuals do not lose digits to cancellation when a shell is nearly
// constant, which is the regime the center search cares about.
struct ShellFit {
    double residual_sq = 0.0;
    double value_sq = 0.0;
};

ShellFit shell_residual(const SampledField& field, const BallPoint& c, std::size_t shells,
                        std::vector<double>& radii) {
    const std::size_t n = field.points.size();
    double d_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        radii[i] = geodesic_distance(field.points[i], c);
        d_max = std::max(d_max, radii[i]);
    }
    double h = d_max > 0.0 ? d_max / static_cast<double>(shells) : 1.0;
    std::vector<double> mean(shells, 0.0);
    std::vector<std::size_t> count(shells, 0);
    auto shell_of = [&](double r) {
        return std::min(shells - 1, static_cast<std::size_t>(r / h));
    };
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t b = shell_of(radii[i]);
        mean[b] += field.values[i];
        ++count[b];
    }
    for (std::size_t b = 0; b < shells; ++b)
        if (count[b] > 0) mean[b] /= static_cast<double>(count[b]);
    ShellFit fit;
    KahanSum res, val;
    for (std::size_t i = 0; i < n; ++i) {
        double r = field.values[i] - mean[shell_of(radii[i])];
        res.add(r * r);
        val.add(field.values[i] * field.values[i]);
    }
    fit.residual_sq = res.value();
    fit.value_sq = val.value();
    return fit;
}

}  // namespace

SymmetryReport radial_symmetry_check(const SampledField& field) {
    check_field(field, "radial_symmetry_check");
    const std::size_t n = field.points.size();
    if (n < 16) throw std::domain_error("radial_symmetry_check needs at least 16 points");
    const std::size_t dim = field.points.front().dim();

    SymmetryReport report;
    double v_min = field.values.front(), v_max = v_min;
    for (double v : field.values) {
        v_min = std::min(v_min, v);
        v_max = std::max(v_max, v);
    }
    if (v_max - v_min <= 1e-14 * std::max({1.0, std::abs(v_min), std::abs(v_max)})) {
        report.center = BallPoint(std::vector<double>(dim, 0.0));
        report.degenerate = true;
        return report;
    }

    // A constant-value field never reaches here, so the weighted centroid is
    // well defined whenever any value is nonzero; it is a convex combination
    // of the points and therefore stays inside the ball.
    std::vector<double> start(dim, 0.0);
    double w_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double w = std::abs(field.values[i]);
        for (std::size_t c = 0; c < dim; ++c) start[c] += w * field.points[i].x[c];
        w_sum += w;
    }
    if (w_sum > 0.0)
        for (double& c : start) c /= w_sum;

    std::vector<double> radii(n);
    auto objective_for = [&](std::size_t shells) {
        return [&, shells](const std::vector<double>& coords) {
            double norm2 = 0.0;
            for (double c : coords) norm2 += c * c;
            if (norm2 >= 0.995 * 0.995) return -HUGE_VAL;
            return -shell_residual(field, BallPoint(coords), shells, radii).residual_sq;
        };
    };

    // Coarse shells give a smooth landscape for the walk in; thin shells
    // sharpen the minimum once the center is roughly known.
    std::size_t shells_fine = std::clamp<std::size_t>(n / 12, 32, 8192);
    const std::size_t stage_shells[3] = {32, std::min<std::size_t>(256, shells_fine),
                                         shells_fine};
    const double stage_spread[3] = {0.08, 0.02, 0.005};
    std::vector<double> best = start;
    for (int s = 0; s < 3; ++s) {
        if (s > 0 && stage_shells[s] == stage_shells[s - 1]) continue;
        best = nelder_mead_max(objective_for(stage_shells[s]), best, stage_spread[s], 400);
    }

    report.center = BallPoint(best);
    ShellFit fit = shell_residual(field, report.center, shells_fine, radii);
    report.deviation = fit.value_sq > 0.0 ? std::sqrt(fit.residual_sq / fit.value_sq) : 0.0;
    return report;
}

}  // namespace hyperchoq
