#pragma once

#include <cstddef>

#include "hyperchoq/choquard.hpp"

namespace hyperchoq {

struct SolverConfig {
    std::size_t max_iterations = 2000;
    /// Scale-invariant stopping measure ||g||_W ||u||_lambda / I.
    double grad_tolerance = 1e-8;
    /// Relative energy decrease treated as stagnation.
    double stagnation_tolerance = 1e-14;
    int stagnation_window = 40;
    double armijo_slope = 1e-4;
    double backtrack = 0.5;
    int max_backtracks = 45;
};

void validate(const SolverConfig& config);

struct GroundStateReport {
    RadialProfile profile;        // on the Nehari manifold
    double zeta = 0.0;            // variational level (p-1)/(2p) ||u||_lambda^2
    double quotient = 0.0;        // energy quotient I at the minimizer
    double nehari_defect = 0.0;   // | ||u||^2 - J | / ||u||^2 after projection
    double el_residual = 0.0;
    double gradient_measure = 0.0;  // final ||g||_W ||u||_lambda / I
    std::size_t iterations = 0;
    bool converged = false;
    bool monotone = false;        // positive and nonincreasing along the radius
    double decay_slope = 0.0;     // fitted d(log u)/d rho on [R/2, 3R/4]
    double tail_mass = 0.0;       // relative L2 mass of the extrapolated tail
};

/// Minimizes the energy quotient with preconditioned projected gradient
/// descent and returns the ground-state candidate on the Nehari manifold.
/// Requires strictly subcritical exponents.
GroundStateReport solve_ground_state(const ChoquardEnergy& energy, const SolverConfig& config = {});

}  // namespace hyperchoq
