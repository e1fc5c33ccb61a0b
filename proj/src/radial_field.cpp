#include "hyperchoq/radial_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hyperchoq/geometry.hpp"
#include "hyperchoq/parallel.hpp"
#include "hyperchoq/quadrature.hpp"

namespace hyperchoq {

namespace {

// Kernel distances below this go through the ball integral around each node
// instead of the angular-average matrix.
constexpr double kSplitDistance = 0.1;

void check_sizes(const RadialGrid& grid, const std::vector<double>& u, const char* where) {
    if (u.size() != grid.size())
        throw std::invalid_argument(std::string(where) + ": profile does not match the grid");
}

}  // namespace

RadialGrid RadialGrid::make_default(int dim, double r_max, std::size_t count) {
    if (!(r_max > 2.0)) throw std::domain_error("default grid needs r_max > 2");
    if (count < 64) throw std::domain_error("default grid needs at least 64 nodes");
    std::size_t n_geo = std::max<std::size_t>(16, count / 8);
    const double rho_min = 5e-4;
    std::vector<double> nodes(count);
    for (std::size_t k = 0; k < n_geo; ++k)
        nodes[k] = rho_min * std::pow(1.0 / rho_min, static_cast<double>(k) /
                                                         static_cast<double>(n_geo - 1));
    std::size_t n_uni = count - n_geo;
    double h = (r_max - 1.0) / static_cast<double>(n_uni + 1);
    for (std::size_t m = 1; m <= n_uni; ++m) nodes[n_geo + m - 1] = 1.0 + h * static_cast<double>(m);
    return RadialGrid(dim, r_max, std::move(nodes));
}

RadialGrid RadialGrid::make_uniform(int dim, double r_max, std::size_t count) {
    if (!(r_max > 0.0)) throw std::domain_error("uniform grid needs r_max > 0");
    if (count < 8) throw std::domain_error("uniform grid needs at least 8 nodes");
    double h = r_max / static_cast<double>(count + 1);
    std::vector<double> nodes(count);
    for (std::size_t m = 1; m <= count; ++m) nodes[m - 1] = h * static_cast<double>(m);
    return RadialGrid(dim, r_max, std::move(nodes));
}

RadialGrid::RadialGrid(int dim, double r_max, std::vector<double> nodes)
    : dim_(dim), r_max_(r_max), nodes_(std::move(nodes)) {
    if (dim_ < 2) throw std::domain_error("radial grid needs dim >= 2");
    if (nodes_.size() < 8) throw std::domain_error("radial grid needs at least 8 nodes");
    if (!(nodes_.front() > 0.0) || !(nodes_.back() < r_max_))
        throw std::domain_error("radial grid nodes must lie strictly inside (0, r_max)");
    for (std::size_t i = 1; i < nodes_.size(); ++i)
        if (!(nodes_[i] > nodes_[i - 1]))
            throw std::domain_error("radial grid nodes must be strictly increasing");
    build_weights();
    build_stencil();
}

void RadialGrid::build_weights() {
    const std::size_t n = nodes_.size();
    const double area = unit_sphere_area(dim_);
    weights_.assign(n, 0.0);
    KahanSum total;
    auto density = [&](double s) { return area * std::pow(std::sinh(s), dim_ - 1); };
    for (std::size_t i = 0; i < n; ++i) {
        double lo = (i == 0) ? 0.0 : 0.5 * (nodes_[i - 1] + nodes_[i]);
        double hi = (i + 1 == n) ? r_max_ : 0.5 * (nodes_[i] + nodes_[i + 1]);
        weights_[i] = gauss_segment(density, lo, hi, 8);
        total.add(weights_[i]);
    }
    volume_ = total.value();
}

void RadialGrid::build_stencil() {
    const std::size_t n = nodes_.size();
    const double area = unit_sphere_area(dim_);
    auto density = [&](double s) { return area * std::pow(std::sinh(s), dim_ - 1); };
    edge_w_.assign(n, 0.0);
    edge_h_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double hi = (i + 1 < n) ? nodes_[i + 1] : r_max_;
        edge_h_[i] = hi - nodes_[i];
        edge_w_[i] = gauss_segment(density, nodes_[i], hi, 8);
    }
    st_lo_.assign(n, 0.0);
    st_mid_.assign(n, 0.0);
    st_hi_.assign(n, 0.0);
    col_.assign(n, 0);
    {
        double h1 = nodes_[1] - nodes_[0], h2 = nodes_[2] - nodes_[1];
        st_lo_[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2));
        st_mid_[0] = (h1 + h2) / (h1 * h2);
        st_hi_[0] = -h1 / (h2 * (h1 + h2));
        col_[0] = 0;
    }
    for (std::size_t i = 1; i < n; ++i) {
        double xm = nodes_[i - 1], xc = nodes_[i];
        double xp = (i + 1 < n) ? nodes_[i + 1] : r_max_;
        double hm = xc - xm, hp = xp - xc;
        st_lo_[i] = -hp / (hm * (hm + hp));
        st_mid_[i] = (hp - hm) / (hm * hp);
        st_hi_[i] = hm / (hp * (hm + hp));
        col_[i] = i - 1;
    }
}

std::vector<double> RadialGrid::derivative(const std::vector<double>& u) const {
    check_sizes(*this, u, "derivative");
    const std::size_t n = nodes_.size();
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t c = col_[i];
        double acc = st_lo_[i] * u[c] + st_mid_[i] * u[c + 1];
        if (c + 2 < n) acc += st_hi_[i] * u[c + 2];
        v[i] = acc;
    }
    return v;
}

double RadialGrid::dirichlet_energy(const std::vector<double>& u) const {
    check_sizes(*this, u, "dirichlet_energy");
    const std::size_t n = nodes_.size();
    KahanSum acc;
    for (std::size_t i = 0; i < n; ++i) {
        double hi = (i + 1 < n) ? u[i + 1] : 0.0;
        double slope = (hi - u[i]) / edge_h_[i];
        acc.add(edge_w_[i] * slope * slope);
    }
    return acc.value();
}

std::vector<double> RadialGrid::apply_stiffness(const std::vector<double>& u) const {
    check_sizes(*this, u, "apply_stiffness");
    const std::size_t n = nodes_.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double hi = (i + 1 < n) ? u[i + 1] : 0.0;
        double flux = edge_w_[i] * (hi - u[i]) / (edge_h_[i] * edge_h_[i]);
        out[i] -= flux;
        if (i + 1 < n) out[i + 1] += flux;
    }
    return out;
}

std::vector<std::vector<double>> RadialGrid::stiffness_band(double shift) const {
    const std::size_t n = nodes_.size();
    std::vector<std::vector<double>> band(2);
    band[0].assign(n, 0.0);
    band[1].assign(n - 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double c = edge_w_[i] / (edge_h_[i] * edge_h_[i]);
        band[0][i] += c;
        if (i + 1 < n) {
            band[0][i + 1] += c;
            band[1][i] -= c;
        }
    }
    for (std::size_t j = 0; j < n; ++j) band[0][j] += shift * weights_[j];
    return band;
}

double lq_norm(const RadialGrid& grid, const RadialProfile& u, double q) {
    check_sizes(grid, u.values, "lq_norm");
    if (!(q >= 1.0)) throw std::domain_error("lq_norm needs q >= 1");
    KahanSum acc;
    for (std::size_t i = 0; i < u.values.size(); ++i)
        acc.add(grid.weights()[i] * std::pow(std::abs(u.values[i]), q));
    return std::pow(acc.value(), 1.0 / q);
}

double spectral_bottom(int dim) {
    if (dim < 2) throw std::domain_error("spectral_bottom needs dim >= 2");
    return 0.25 * (dim - 1.0) * (dim - 1.0);
}

double h1_lambda_norm(const RadialGrid& grid, const RadialProfile& u, double lambda) {
    check_sizes(grid, u.values, "h1_lambda_norm");
    if (!(lambda < spectral_bottom(grid.dim())))
        throw std::domain_error("h1_lambda_norm needs lambda below (N-1)^2/4");
    double energy = grid.dirichlet_energy(u.values);
    KahanSum mass;
    for (std::size_t i = 0; i < u.values.size(); ++i)
        mass.add(grid.weights()[i] * u.values[i] * u.values[i]);
    double sq = energy - lambda * mass.value();
    if (sq < 0.0)
        throw std::runtime_error("h1_lambda_norm: lambda too close to the spectral bottom for this grid");
    return std::sqrt(sq);
}

double rayleigh_quotient(const RadialGrid& grid, const RadialProfile& u) {
    check_sizes(grid, u.values, "rayleigh_quotient");
    double energy = grid.dirichlet_energy(u.values);
    KahanSum mass;
    for (std::size_t i = 0; i < u.values.size(); ++i)
        mass.add(grid.weights()[i] * u.values[i] * u.values[i]);
    if (!(mass.value() > 0.0)) throw std::domain_error("rayleigh_quotient needs a nonzero profile");
    return energy / mass.value();
}

namespace {

// (1 - cos theta) / 2 for the triangle with sides r, s and opposite side d.
inline double half_versine(double d, double d0, double inv_sinh_rs) {
    return std::sinh(0.5 * (d - d0)) * std::sinh(0.5 * (d + d0)) * inv_sinh_rs;
}

// Angular average of k over distances in [max(|r-s|, split), r+s]. Segment
// boundaries follow a fixed distance ladder split * 2^m so the result stays
// smooth in r and s.
double far_theta_integral(const std::function<double(double)>& kernel, int dim, double r,
                          double s) {
    double d0 = std::abs(r - s);
    double dpi = r + s;
    double d_lo = std::max(d0, kSplitDistance);
    if (dpi <= d_lo * (1.0 + 1e-14)) return 0.0;
    double sinh_rs = std::sinh(r) * std::sinh(s);
    double inv_sinh_rs = 1.0 / sinh_rs;
    auto theta_of = [&](double d) {
        double qh = half_versine(d, d0, inv_sinh_rs);
        return 2.0 * std::asin(std::sqrt(std::clamp(qh, 0.0, 1.0)));
    };
    const GaussRule& gl = gauss_legendre(12);
    KahanSum acc;
    double a = d_lo;
    double theta_a = theta_of(a);
    while (a < dpi) {
        double b = kSplitDistance;
        while (b <= a * (1.0 + 1e-14)) b *= 2.0;
        bool last = b >= dpi;
        if (last) b = dpi;
        double theta_b = last ? M_PI : theta_of(b);
        double half = 0.5 * (theta_b - theta_a), mid = 0.5 * (theta_b + theta_a);
        if (half > 0.0) {
            for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
                double theta = mid + half * gl.nodes[q];
                double d = distance_from_radii(r, s, theta);
                double sn = std::sin(theta);
                acc.add(gl.weights[q] * half * kernel(d) * std::pow(sn, dim - 2));
            }
        }
        a = b;
        theta_a = theta_b;
    }
    return unit_sphere_area(dim - 1) * acc.value();
}

// Angular average over distances in [|r-s|, min(split, r+s)], integrated in
// v = sqrt(d - |r-s|) with geometric grading toward v = 0.
double near_theta_integral(const std::function<double(double)>& kernel, double singular_power,
                           int dim, double r, double s) {
    double d0 = std::abs(r - s);
    double dpi = r + s;
    double d_hi = std::min(kSplitDistance, dpi);
    if (d_hi <= d0 * (1.0 + 1e-14)) return 0.0;
    if (d0 == 0.0 && singular_power >= dim - 1.0)
        throw std::domain_error("angular kernel average diverges on the diagonal for this order");
    double sinh_rs = std::sinh(r) * std::sinh(s);
    double inv_sinh_rs = 1.0 / sinh_rs;
    auto integrand = [&](double v) {
        double d = d0 + v * v;
        double qh = std::clamp(half_versine(d, d0, inv_sinh_rs), 0.0, 1.0);
        double sin_theta = std::sqrt(std::max(0.0, 4.0 * qh * (1.0 - qh)));
        double body = (dim == 3) ? 1.0 : std::pow(sin_theta, dim - 3);
        return kernel(d) * body * std::sinh(d) * inv_sinh_rs * 2.0 * v;
    };
    double v_top = std::sqrt(d_hi - d0);
    const GaussRule& gl = gauss_legendre(10);
    KahanSum acc;
    double hi = v_top;
    for (int seg = 0; seg < 12; ++seg) {
        double lo = hi / 3.0;
        double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
        for (std::size_t q = 0; q < gl.nodes.size(); ++q)
            acc.add(gl.weights[q] * half * integrand(mid + half * gl.nodes[q]));
        hi = lo;
    }
    // Sliver below the last segment: the integrand behaves like
    // v^(2(dim-1-singular_power)-1) on the diagonal and is bounded otherwise.
    double gamma = (d0 == 0.0) ? 2.0 * (dim - 1.0 - singular_power) - 1.0 : 0.0;
    acc.add(integrand(hi) * hi / (gamma + 1.0));
    return unit_sphere_area(dim - 1) * acc.value();
}

}  // namespace

double sphere_average_kernel(const KernelTable& kernel, double r, double s) {
    if (!(r > 0.0) || !(s > 0.0))
        throw std::domain_error("sphere_average_kernel needs r, s > 0");
    if (kernel.spec().dim < 3)
        throw std::domain_error("sphere_average_kernel needs dim >= 3");
    const int dim = kernel.spec().dim;
    double singular = kernel.spec().dim - kernel.spec().alpha;
    auto k = [&kernel](double d) { return kernel(d); };
    return far_theta_integral(k, dim, r, s) + near_theta_integral(k, singular, dim, r, s);
}

ConvolutionOperator::ConvolutionOperator(const RadialGrid& grid, const KernelTable& kernel)
    : grid_(grid) {
    if (kernel.spec().dim != grid.dim())
        throw std::invalid_argument("kernel table dimension does not match the grid");
    kernel_ = [kernel](double d) { return kernel(d); };
    assemble(kernel_, kernel.spec().dim - kernel.spec().alpha);
}

ConvolutionOperator::ConvolutionOperator(const RadialGrid& grid, const RadialKernelFn& kernel)
    : grid_(grid) {
    if (!kernel.value) throw std::invalid_argument("convolution kernel is empty");
    if (!(kernel.singular_power >= 0.0) || !(kernel.singular_power < grid.dim()))
        throw std::invalid_argument("kernel singular power must lie in [0, dim)");
    kernel_ = kernel.value;
    assemble(kernel_, kernel.singular_power);
}

void ConvolutionOperator::assemble(const std::function<double(double)>& kernel,
                                   double singular_power) {
    if (grid_.dim() < 3)
        throw std::domain_error("convolution assembly needs dim >= 3");
    const std::size_t n = grid_.size();
    const int dim = grid_.dim();
    const auto& rho = grid_.nodes();
    const auto& w = grid_.weights();
    const double area_full = unit_sphere_area(dim);
    const double area_slice = unit_sphere_area(dim - 1);
    matrix_.assign(n * n, 0.0);

    // Far block: angular average at kernel distances >= the split, sampled
    // at node pairs and weighted with the cell volumes.
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = i; j < n; ++j)
            matrix_[i * n + j] = far_theta_integral(kernel, dim, rho[i], rho[j]) / area_full;
    });
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) matrix_[i * n + j] = matrix_[j * n + i];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) matrix_[i * n + j] *= w[j];

    // Near block: ball integral around each node over kernel distances below
    // the split, scattered onto the profile through linear interpolation.
    // delta is the analytic power-law head of the d integral.
    const double delta = 1e-4;
    const GaussRule& gl_d = gauss_legendre(10);
    const GaussRule& gl_phi = gauss_legendre(4);
    parallel_for(n, [&](std::size_t i) {
        double* row = matrix_.data() + i * n;
        double r = rho[i];
        row[i] += area_full * kernel(delta) * std::pow(delta, dim) /
                  (static_cast<double>(dim) - singular_power);
        double d_lo = delta;
        while (d_lo < kSplitDistance) {
            double d_hi = std::min(4.0 * d_lo, kSplitDistance);
            for (std::size_t qd = 0; qd < gl_d.nodes.size(); ++qd) {
                double d = 0.5 * (d_hi + d_lo) + 0.5 * (d_hi - d_lo) * gl_d.nodes[qd];
                double wd = 0.5 * (d_hi - d_lo) * gl_d.weights[qd] * kernel(d) *
                            std::pow(std::sinh(d), dim - 1) * area_slice;
                int panels = std::clamp(static_cast<int>(d / 0.008) + 2, 4, 16);
                for (int pa = 0; pa < panels; ++pa) {
                    double phi_a = M_PI * pa / panels, phi_b = M_PI * (pa + 1) / panels;
                    double half = 0.5 * (phi_b - phi_a), mid = 0.5 * (phi_b + phi_a);
                    for (std::size_t qp = 0; qp < gl_phi.nodes.size(); ++qp) {
                        double phi = mid + half * gl_phi.nodes[qp];
                        double wp = half * gl_phi.weights[qp] * std::pow(std::sin(phi), dim - 2);
                        double svals = distance_from_radii(r, d, phi);
                        double coeff = wd * wp;
                        // Linear interpolation of the profile at svals:
                        // constant below the first node, ghost zero at r_max.
                        if (svals <= rho.front()) {
                            row[0] += coeff;
                        } else if (svals >= rho.back()) {
                            double t = (svals - rho.back()) / (grid_.r_max() - rho.back());
                            if (t < 1.0) row[n - 1] += coeff * (1.0 - t);
                        } else {
                            std::size_t j =
                                std::upper_bound(rho.begin(), rho.end(), svals) - rho.begin() - 1;
                            double t = (svals - rho[j]) / (rho[j + 1] - rho[j]);
                            row[j] += coeff * (1.0 - t);
                            row[j + 1] += coeff * t;
                        }
                    }
                }
            }
            d_lo = d_hi;
        }
    });

    // Symmetrize in the weighted inner product so apply() is exactly
    // self-adjoint. The two estimates of the pair mass B_ij = w_i M_ij and
    // w_j M_ji are combined as B = w_i w_j (M_ij + M_ji) / (w_i + w_j): exact
    // when both rows agree, and on strongly graded meshes it keeps the
    // better-resolved row's estimate instead of importing the other row's
    // scatter error scaled by a huge weight ratio (plain averaging of B
    // corrupts near-origin rows that way).
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            double pair = w[i] * w[j] * (matrix_[i * n + j] + matrix_[j * n + i]) /
                          (w[i] + w[j]);
            matrix_[i * n + j] = pair / w[i];
            matrix_[j * n + i] = pair / w[j];
        }
    }
}

RadialProfile ConvolutionOperator::apply(const RadialProfile& u) const {
    check_sizes(grid_, u.values, "ConvolutionOperator::apply");
    const std::size_t n = grid_.size();
    RadialProfile out;
    out.values.assign(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        const double* row = matrix_.data() + i * n;
        KahanSum acc;
        for (std::size_t j = 0; j < n; ++j) acc.add(row[j] * u.values[j]);
        out.values[i] = acc.value();
    });
    return out;
}

double ConvolutionOperator::bilinear(const RadialProfile& u, const RadialProfile& v) const {
    check_sizes(grid_, v.values, "ConvolutionOperator::bilinear");
    RadialProfile ku = apply(u);
    KahanSum acc;
    for (std::size_t i = 0; i < ku.values.size(); ++i)
        acc.add(grid_.weights()[i] * ku.values[i] * v.values[i]);
    return acc.value();
}

double ConvolutionOperator::truncation_estimate(const RadialProfile& u) const {
    check_sizes(grid_, u.values, "ConvolutionOperator::truncation_estimate");
    const auto& rho = grid_.nodes();
    const std::size_t n = grid_.size();
    const int dim = grid_.dim();
    double edge = std::abs(u.values[n - 1]);
    if (edge == 0.0) return 0.0;
    // Decay rate fitted on the outer stretch of the profile, floored at the
    // slowest admissible rate (N-1)/2.
    double rate = 0.5 * (dim - 1.0);
    std::size_t j0 = n - 1;
    while (j0 > 0 && rho[n - 1] - rho[j0] < 5.0) --j0;
    if (j0 < n - 1 && std::abs(u.values[j0]) > edge) {
        double fitted = std::log(std::abs(u.values[j0]) / edge) / (rho[n - 1] - rho[j0]);
        rate = std::max(rate, fitted);
    }
    double r_max = grid_.r_max();
    auto density = [&](double s) {
        return edge * std::exp(-rate * (s - rho[n - 1])) * unit_sphere_area(dim) *
               std::pow(std::sinh(s), dim - 1);
    };
    double beyond = gauss_segment(density, r_max, r_max + 10.0, 24) +
                    gauss_segment(density, r_max + 10.0, r_max + 30.0, 24);
    return kernel_(std::max(r_max - rho[n - 1], 0.05)) * beyond;
}

ConvolutionResult inverse_frac_laplacian(const RadialGrid& grid, const KernelSpec& spec,
                                         const RadialProfile& u, const HeatEvalOptions& opts) {
    validate(spec);
    if (spec.dim != grid.dim())
        throw std::invalid_argument("kernel dimension does not match the grid");
    KernelTable table(spec, 5e-5, 2.0 * grid.r_max() + 10.0, 1e-8, opts);
    ConvolutionOperator conv(grid, table);
    ConvolutionResult out;
    out.profile = conv.apply(u);
    out.tail_estimate = conv.truncation_estimate(u);
    return out;
}

}  // namespace hyperchoq
