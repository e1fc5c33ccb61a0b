#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace hyperchoq {

/// Point of the open unit ball model of hyperbolic space, Euclidean
/// coordinates. Operations reject points with |x| > 1 - 1e-12.
struct BallPoint {
    std::vector<double> x;

    BallPoint() = default;
    explicit BallPoint(std::vector<double> coords) : x(std::move(coords)) {}

    std::size_t dim() const { return x.size(); }
    double norm2() const {
        double s = 0.0;
        for (double c : x) s += c * c;
        return s;
    }
};

inline constexpr double ball_boundary_guard = 1e-12;

/// Totally geodesic hypersurface: the image under the Mobius translation at
/// `anchor` of the diametral hyperplane with Euclidean unit normal `normal`.
struct GeodesicHypersurface {
    BallPoint anchor;
    std::vector<double> normal;  // unit length
};

enum class Side { minus = -1, on = 0, plus = 1 };

/// Mobius translation T_a(x); T_a(a) = 0 and T_a(0) = a hold exactly and the
/// map is an isometric involution of the ball.
BallPoint mobius_translate(const BallPoint& a, const BallPoint& x);

/// Geodesic distance between two ball points.
double geodesic_distance(const BallPoint& x, const BallPoint& y);

/// Geodesic distance from the origin.
double geodesic_radius(const BallPoint& x);

/// Point at geodesic radius rho in the given unit direction.
BallPoint from_polar(double rho, const std::vector<double>& unit_dir);

/// Side length opposite the angle theta in a geodesic triangle with sides
/// r, s meeting at angle theta (hyperbolic law of cosines). Stable for
/// theta -> 0 and for large radii.
double distance_from_radii(double r, double s, double theta);

/// Geodesic reflection across H: conjugate of the Euclidean reflection by the
/// Mobius translation at the anchor. An involution fixing H pointwise.
BallPoint reflect(const GeodesicHypersurface& H, const BallPoint& x);

/// Classifies x relative to H. The plus side is the side containing the
/// designated origin e (defaults to the ball center); points within 1e-12 of
/// H in the signed coordinate report Side::on. If e itself lies on H the
/// positive signed coordinate is called plus.
Side half_space_side(const GeodesicHypersurface& H, const BallPoint& x);
Side half_space_side(const GeodesicHypersurface& H, const BallPoint& x, const BallPoint& e);

/// log(1 + c + sqrt(c(c+2))) = acosh(1 + c), accurate for small c >= 0.
double acosh1p(double c);

/// Surface measure of the unit sphere S^{n-1} in R^n: 2 pi^{n/2} / Gamma(n/2).
double unit_sphere_area(int n);

namespace detail {
void check_in_ball(const BallPoint& p, const char* where);
}

}  // namespace hyperchoq
