#include "hyperchoq/geometry.hpp"

#include <cmath>

namespace hyperchoq {

namespace detail {

void check_in_ball(const BallPoint& p, const char* where) {
    if (p.dim() == 0) throw std::domain_error(std::string(where) + ": empty point");
    double n2 = p.norm2();
    double lim = 1.0 - ball_boundary_guard;
    if (!(n2 <= lim * lim))
        throw std::domain_error(std::string(where) + ": point too close to the ball boundary");
}

}  // namespace detail

double acosh1p(double c) {
    if (c < 0.0) c = 0.0;
    if (c < 1.0) return std::log1p(c + std::sqrt(c * (c + 2.0)));
    // Same identity with c factored out, safe against c*c overflow.
    return std::log(c) + std::log(1.0 + std::sqrt(1.0 + 2.0 / c) + 1.0 / c);
}

double unit_sphere_area(int n) {
    if (n < 1) throw std::domain_error("unit_sphere_area: dimension must be positive");
    return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

BallPoint mobius_translate(const BallPoint& a, const BallPoint& x) {
    detail::check_in_ball(a, "mobius_translate");
    detail::check_in_ball(x, "mobius_translate");
    if (a.dim() != x.dim()) throw std::domain_error("mobius_translate: dimension mismatch");
    const std::size_t n = a.dim();
    double xa = 0.0, na2 = a.norm2(), nx2 = x.norm2(), dxa2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        xa += x.x[i] * a.x[i];
        double d = x.x[i] - a.x[i];
        dxa2 += d * d;
    }
    double denom = 1.0 - 2.0 * xa + nx2 * na2;
    BallPoint out;
    out.x.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.x[i] = (dxa2 * a.x[i] - (1.0 - na2) * (x.x[i] - a.x[i])) / denom;
    // |T_a(x)|^2 = |x-a|^2 / denom < 1 analytically; clamp round-off spill.
    double n2 = out.norm2();
    if (n2 >= 1.0) {
        double scale = (1.0 - 1e-15) / std::sqrt(n2);
        for (double& c : out.x) c *= scale;
    }
    return out;
}

double geodesic_distance(const BallPoint& x, const BallPoint& y) {
    detail::check_in_ball(x, "geodesic_distance");
    detail::check_in_ball(y, "geodesic_distance");
    if (x.dim() != y.dim()) throw std::domain_error("geodesic_distance: dimension mismatch");
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.dim(); ++i) {
        double d = x.x[i] - y.x[i];
        d2 += d * d;
    }
    // cosh(rho) - 1 = 2|x-y|^2 / ((1-|x|^2)(1-|y|^2)), equivalent to the
    // log((1+|T_y x|)/(1-|T_y x|)) form but stable for nearby points.
    double c = 2.0 * d2 / ((1.0 - x.norm2()) * (1.0 - y.norm2()));
    return acosh1p(c);
}

double geodesic_radius(const BallPoint& x) {
    detail::check_in_ball(x, "geodesic_radius");
    double r = std::sqrt(x.norm2());
    return std::log1p(2.0 * r / (1.0 - r));
}

BallPoint from_polar(double rho, const std::vector<double>& unit_dir) {
    if (rho < 0.0) throw std::domain_error("from_polar: negative radius");
    double r = std::tanh(0.5 * rho);
    BallPoint p;
    p.x.resize(unit_dir.size());
    for (std::size_t i = 0; i < unit_dir.size(); ++i) p.x[i] = r * unit_dir[i];
    return p;
}

double distance_from_radii(double r, double s, double theta) {
    if (r < 0.0 || s < 0.0) throw std::domain_error("distance_from_radii: negative side");
    double gap = std::fabs(r - s);
    if (r + s < 350.0) {
        // cosh(d) - 1 = 2 sinh^2((r-s)/2) + sinh(r) sinh(s) (1 - cos(theta))
        double sh = std::sinh(0.5 * gap);
        double half = std::sin(0.5 * theta);
        double c = 2.0 * sh * sh + std::sinh(r) * std::sinh(s) * 2.0 * half * half;
        return acosh1p(c);
    }
    // Large radii: sinh(r) sinh(s) would overflow, so assemble
    //   cosh(d) - 1 = 2 sinh^2(gap/2) + 2 sinh(r) sinh(s) sin^2(theta/2)
    // as a log-sum-exp of the two contributions and invert through acosh.
    auto log_sinh = [](double x) { return x - M_LN2 + std::log1p(-std::exp(-2.0 * x)); };
    double half = std::sin(0.5 * theta);
    double la = gap > 0.0 ? M_LN2 + 2.0 * log_sinh(0.5 * gap) : -HUGE_VAL;
    double lb = (half > 0.0 && r > 0.0 && s > 0.0)
                    ? M_LN2 + log_sinh(r) + log_sinh(s) + 2.0 * std::log(half)
                    : -HUGE_VAL;
    if (la == -HUGE_VAL && lb == -HUGE_VAL) return 0.0;
    double big = std::max(la, lb);
    double L = big + std::log1p(std::exp(-std::abs(la - lb)));
    if (L < 700.0) return acosh1p(std::exp(L));
    // acosh(1 + e^L) = L + log 2 up to corrections of order e^{-L}.
    return L + M_LN2;
}

namespace {

double signed_coordinate(const GeodesicHypersurface& H, const BallPoint& x) {
    BallPoint t = mobius_translate(H.anchor, x);
    if (H.normal.size() != t.dim())
        throw std::domain_error("hypersurface normal dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < t.dim(); ++i) s += t.x[i] * H.normal[i];
    return s;
}

}  // namespace

BallPoint reflect(const GeodesicHypersurface& H, const BallPoint& x) {
    BallPoint t = mobius_translate(H.anchor, x);
    double s = 0.0;
    for (std::size_t i = 0; i < t.dim(); ++i) s += t.x[i] * H.normal[i];
    for (std::size_t i = 0; i < t.dim(); ++i) t.x[i] -= 2.0 * s * H.normal[i];
    return mobius_translate(H.anchor, t);
}

Side half_space_side(const GeodesicHypersurface& H, const BallPoint& x, const BallPoint& e) {
    double sx = signed_coordinate(H, x);
    double se = signed_coordinate(H, e);
    double orient = (se < 0.0) ? -1.0 : 1.0;  // e on H: positive coordinate is plus
    double v = orient * sx;
    if (std::fabs(v) <= 1e-12) return Side::on;
    return v > 0.0 ? Side::plus : Side::minus;
}

Side half_space_side(const GeodesicHypersurface& H, const BallPoint& x) {
    BallPoint origin;
    origin.x.assign(x.dim(), 0.0);
    return half_space_side(H, x, origin);
}

}  // namespace hyperchoq
