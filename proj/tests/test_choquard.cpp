#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "hyperchoq/choquard.hpp"
#include "hyperchoq/heat_kernel.hpp"

using namespace hyperchoq;

namespace {

constexpr double kPi = std::numbers::pi;

RadialProfile bump(const RadialGrid& grid, double center, double width, double amp = 1.0) {
    RadialProfile u{std::vector<double>(grid.size())};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double d = (grid.nodes()[i] - center) / width;
        u.values[i] = amp * std::exp(-d * d);
    }
    return u;
}

}  // namespace

TEST_CASE("exponent window: admissible, critical, rejected") {
    // dim 3, alpha 2: window is 5/3 < p <= 5 with p = 5 critical
    CHECK(validate_exponents({3, 2.0, 2.0, 0.0}) == ExponentClass::subcritical);
    CHECK(validate_exponents({3, 2.0, 4.999, 0.0}) == ExponentClass::subcritical);
    CHECK(validate_exponents({3, 2.0, 5.0, 0.0}) == ExponentClass::critical);
    CHECK(validate_exponents({3, 2.0, 5.0 + 1e-9, 0.0}) == ExponentClass::invalid);
    CHECK(validate_exponents({3, 2.0, 5.0 / 3.0, 0.0}) == ExponentClass::invalid);
    CHECK(validate_exponents({3, 2.0, 1.2, 0.0}) == ExponentClass::invalid);

    // dim 4, alpha 2: window is 3/2 < p <= 3
    CHECK(validate_exponents({4, 2.0, 2.0, 0.0}) == ExponentClass::subcritical);
    CHECK(validate_exponents({4, 2.0, 3.0, 0.0}) == ExponentClass::critical);
    CHECK(validate_exponents({4, 2.0, 1.5, 0.0}) == ExponentClass::invalid);

    // parameter gates
    CHECK(validate_exponents({2, 1.0, 2.0, 0.0}) == ExponentClass::invalid);
    CHECK(validate_exponents({3, 0.0, 2.0, 0.0}) == ExponentClass::invalid);
    CHECK(validate_exponents({3, 3.0, 2.0, 0.0}) == ExponentClass::invalid);
    CHECK(validate_exponents({3, 2.0, 2.0, 1.0}) == ExponentClass::invalid);
    CHECK(validate_exponents({3, 2.0, 2.0, 0.999}) == ExponentClass::subcritical);
    CHECK(validate_exponents({5, 2.0, 2.0, 3.9}) == ExponentClass::subcritical);
}

TEST_CASE("hls constant: closed-form value and gates") {
    // dim 3, alpha 1, s = 3/2, unit sup constant:
    // (s/(s-1))^{1-1/3} * 6 / (1 * (3 - 3/2) * Gamma(1/2)) = 3^{2/3} * 4 / sqrt(pi)
    double want = std::pow(3.0, 2.0 / 3.0) * 4.0 / std::sqrt(kPi);
    CHECK(hls_constant(3, 1.0, 1.5, 1.0) == doctest::Approx(want).epsilon(1e-13));
    CHECK(hls_constant(3, 1.0, 1.5, 1.0) == doctest::Approx(4.6942464).epsilon(1e-7));

    // independent transcription of the general formula
    int dim = 5;
    double alpha = 2.0, s = 1.7, c = 0.42;
    double general = std::pow(s / (s - 1.0), 1.0 - alpha / dim) * 2.0 * dim *
                     std::pow(c, alpha / dim) /
                     (alpha * (dim - s * alpha) * std::tgamma(alpha / 2.0));
    CHECK(hls_constant(dim, alpha, s, c) == doctest::Approx(general).epsilon(1e-13));

    CHECK_THROWS_AS(hls_constant(1, 1.0, 1.5, 1.0), std::domain_error);
    CHECK_THROWS_AS(hls_constant(3, 3.5, 1.2, 1.0), std::domain_error);
    CHECK_THROWS_AS(hls_constant(3, 2.0, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(hls_constant(3, 2.0, 1.6, 1.0), std::domain_error);  // s >= dim/alpha
    CHECK_THROWS_AS(hls_constant(3, 2.0, 1.2, 0.0), std::domain_error);
}

TEST_CASE("sharp euclidean hls constant") {
    // independent transcription: pi^{l/2} Gamma(N/2 - l/2) / Gamma(N - l/2)
    //                            * (Gamma(N/2)/Gamma(N))^{-1 + l/N}
    auto oracle = [](int dim, double l) {
        return std::pow(kPi, l / 2.0) * std::tgamma(dim / 2.0 - l / 2.0) /
               std::tgamma(dim - l / 2.0) *
               std::pow(std::tgamma(dim / 2.0) / std::tgamma(static_cast<double>(dim)),
                        -1.0 + l / dim);
    };
    for (auto [dim, l] : {std::pair{3, 1.0}, {3, 1.5}, {4, 2.0}, {5, 3.0}}) {
        double got = sharp_hls_constant(dim, l);
        CHECK(got > 0.0);
        CHECK(got == doctest::Approx(oracle(dim, l)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(sharp_hls_constant(3, 0.0), std::domain_error);
    CHECK_THROWS_AS(sharp_hls_constant(3, 3.0), std::domain_error);
    CHECK_THROWS_AS(sharp_hls_constant(0, 1.0), std::domain_error);
}

TEST_CASE("energy pieces: norms, homogeneity, scale invariance") {
    RadialGrid grid = RadialGrid::make_default(3, 30.0, 400);
    ProblemSpec spec{3, 2.0, 2.0, 0.5};
    ChoquardEnergy energy(grid, spec);

    RadialProfile u = bump(grid, 1.5, 1.0);

    // norm_lambda_sq assembled from the grid primitives
    double l2 = lq_norm(grid, u, 2.0);
    double want = grid.dirichlet_energy(u.values) - spec.lambda * l2 * l2;
    CHECK(energy.norm_lambda_sq(u) == doctest::Approx(want).epsilon(1e-12));

    // nonlocal term against the exposed convolution, g = |u|^p = u^2
    RadialProfile g{std::vector<double>(grid.size())};
    for (std::size_t i = 0; i < grid.size(); ++i) g.values[i] = u.values[i] * u.values[i];
    CHECK(energy.nonlocal_term(u) ==
          doctest::Approx(energy.convolution().bilinear(g, g)).epsilon(1e-13));

    // homogeneity J(c u) = c^{2p} J(u) and sign invariance
    RadialProfile scaled{u.values}, flipped{u.values};
    for (auto& x : scaled.values) x *= 2.0;
    for (auto& x : flipped.values) x = -x;
    CHECK(energy.nonlocal_term(scaled) ==
          doctest::Approx(16.0 * energy.nonlocal_term(u)).epsilon(1e-12));
    CHECK(energy.nonlocal_term(flipped) == doctest::Approx(energy.nonlocal_term(u)).epsilon(1e-13));

    // quotient is scale invariant
    RadialProfile tiny{u.values};
    for (auto& x : tiny.values) x *= 7.3e-4;
    CHECK(energy.energy_quotient(scaled) ==
          doctest::Approx(energy.energy_quotient(u)).epsilon(1e-12));
    CHECK(energy.energy_quotient(tiny) ==
          doctest::Approx(energy.energy_quotient(u)).epsilon(1e-12));

    RadialProfile zero{std::vector<double>(grid.size(), 0.0)};
    CHECK_THROWS_AS(energy.energy_quotient(zero), std::domain_error);
    CHECK_THROWS_AS(energy.nehari_scale(zero), std::domain_error);
    CHECK_THROWS_AS(energy.el_residual(zero), std::domain_error);
}

TEST_CASE("nonlocal term obeys the hls bound") {
    RadialGrid grid = RadialGrid::make_default(3, 30.0, 400);
    ProblemSpec spec{3, 2.0, 2.0, 0.0};
    ChoquardEnergy energy(grid, spec);
    double s = 2.0 * spec.dim / (spec.dim + spec.alpha);  // 6/5
    double c = hls_constant(spec.dim, spec.alpha, s, heat_diag_constant(spec.dim));

    std::mt19937_64 rng(91);
    std::uniform_real_distribution<double> ctr(0.0, 8.0), wid(0.4, 2.5), amp(0.1, 2.0);
    for (int trial = 0; trial < 12; ++trial) {
        RadialProfile u = bump(grid, ctr(rng), wid(rng), amp(rng));
        RadialProfile g{std::vector<double>(grid.size())};
        for (std::size_t i = 0; i < grid.size(); ++i) g.values[i] = u.values[i] * u.values[i];
        double lq = lq_norm(grid, g, s);
        CHECK(energy.nonlocal_term(u) <= c * lq * lq);
    }
}

TEST_CASE("nehari projection and the on-manifold identity") {
    RadialGrid grid = RadialGrid::make_default(3, 30.0, 400);
    for (double p : {2.0, 3.0}) {
        ProblemSpec spec{3, 2.0, p, 0.5};
        ChoquardEnergy energy(grid, spec);
        RadialProfile u = bump(grid, 2.0, 1.2, 0.7);

        double t = energy.nehari_scale(u);
        CHECK(t > 0.0);
        RadialProfile v{u.values};
        for (auto& x : v.values) x *= t;

        double norm_sq = energy.norm_lambda_sq(v);
        double defect = std::abs(norm_sq - energy.nonlocal_term(v)) / norm_sq;
        CHECK(defect < 1e-12);

        // on the manifold the quotient reduces to a power of the norm
        double identity = std::pow(norm_sq, (p - 1.0) / p);
        CHECK(energy.energy_quotient(v) == doctest::Approx(identity).epsilon(1e-10));
    }
}

TEST_CASE("quotient gradient: orthogonality and directional derivative") {
    RadialGrid grid = RadialGrid::make_default(3, 30.0, 300);
    ProblemSpec spec{3, 2.0, 2.0, 0.5};
    ChoquardEnergy energy(grid, spec);
    std::size_t n = grid.size();

    RadialProfile u = bump(grid, 1.5, 1.0);
    RadialProfile grad = energy.quotient_gradient(u);
    REQUIRE(grad.values.size() == n);

    // exact orthogonality to the base point in the weighted inner product
    double dot = 0.0, gnorm = 0.0, unorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double w = grid.weights()[i];
        dot += w * grad.values[i] * u.values[i];
        gnorm += w * grad.values[i] * grad.values[i];
        unorm += w * u.values[i] * u.values[i];
    }
    CHECK(std::abs(dot) / std::sqrt(gnorm * unorm) < 1e-10);

    // <grad, v>_W against a central difference of the quotient. Directions
    // must stay smooth and supported where u is O(1): rough or far-field
    // perturbations leave the linear regime at any usable step size because
    // their Dirichlet energy dwarfs the base profile.
    std::mt19937_64 rng(92);
    std::uniform_real_distribution<double> ctr(0.5, 5.0), wid(0.5, 2.0), amp(-1.0, 1.0);
    for (int trial = 0; trial < 3; ++trial) {
        RadialProfile dir = bump(grid, ctr(rng), wid(rng), amp(rng) + 0.1);
        double eps = 3e-6;
        RadialProfile up{u.values}, dn{u.values};
        for (std::size_t i = 0; i < n; ++i) {
            up.values[i] += eps * dir.values[i];
            dn.values[i] -= eps * dir.values[i];
        }
        double fd = (energy.energy_quotient(up) - energy.energy_quotient(dn)) / (2.0 * eps);
        double pairing = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            pairing += grid.weights()[i] * grad.values[i] * dir.values[i];
        CHECK(pairing == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("el residual: positive away from critical points, stationary gate") {
    RadialGrid grid = RadialGrid::make_default(3, 30.0, 300);
    ProblemSpec spec{3, 2.0, 2.0, 0.0};
    ChoquardEnergy energy(grid, spec);

    RadialProfile u = bump(grid, 2.0, 1.0);
    double resid = energy.el_residual(u);
    CHECK(resid > 1e-3);  // a generic bump is far from solving the equation
    CHECK(std::isfinite(resid));
}

TEST_CASE("one-shot wrappers match the class methods") {
    RadialGrid grid = RadialGrid::make_default(3, 20.0, 200);
    ProblemSpec spec{3, 2.0, 2.0, 0.3};
    ChoquardEnergy energy(grid, spec);
    RadialProfile u = bump(grid, 1.0, 0.8);

    CHECK(nonlocal_term(grid, spec, u) == doctest::Approx(energy.nonlocal_term(u)).epsilon(1e-10));
    CHECK(energy_quotient(grid, spec, u) ==
          doctest::Approx(energy.energy_quotient(u)).epsilon(1e-10));
    CHECK(nehari_scale(grid, spec, u) == doctest::Approx(energy.nehari_scale(u)).epsilon(1e-10));
    CHECK(el_residual(grid, spec, u) == doctest::Approx(energy.el_residual(u)).epsilon(1e-10));

    RadialProfile g1 = quotient_gradient(grid, spec, u);
    RadialProfile g2 = energy.quotient_gradient(u);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(g1.values[i] == doctest::Approx(g2.values[i]).epsilon(1e-10));
}

TEST_CASE("choquard energy construction gates") {
    RadialGrid grid = RadialGrid::make_default(3, 20.0, 200);
    CHECK_THROWS_AS(ChoquardEnergy(grid, ProblemSpec{3, 2.0, 6.0, 0.0}), std::domain_error);
    CHECK_THROWS_AS(ChoquardEnergy(grid, ProblemSpec{3, 2.0, 2.0, 1.5}), std::domain_error);
    RadialGrid g4 = RadialGrid::make_default(4, 20.0, 200);
    CHECK_THROWS_AS(ChoquardEnergy(g4, ProblemSpec{3, 2.0, 2.0, 0.0}), std::invalid_argument);
}
