#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hyperchoq/geometry.hpp"
#include "hyperchoq/green_kernel.hpp"

namespace hyperchoq {

/// Monte Carlo sample of a field. Points come in reflection pairs:
/// points[2k+1] is the mirror image of points[2k] across the hypersurface
/// the sample was drawn for. mc_weight is the volume each point represents.
struct SampledField {
    std::vector<BallPoint> points;
    std::vector<double> values;
    double mc_weight = 0.0;
};

/// Uniform volume sample of the largest reflection-closed region inside the
/// geodesic ball of the given radius about the origin: the intersection of
/// the ball with its mirror image. Deterministic in the seed.
SampledField sample_pair_closed(const GeodesicHypersurface& surface, std::size_t n_pairs,
                                double radius, std::uint64_t seed,
                                const std::function<double(const BallPoint&)>& f);

/// Two-point rearrangement: on the plus side of the surface each mirror pair
/// keeps the larger of the two values, on the minus side the smaller.
/// Points within 1e-12 of the surface keep their value.
SampledField polarize(const SampledField& field, const GeodesicHypersurface& surface);

struct GapEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo estimate of J(polarized f) - J(f) for the pair energy
/// J(g) = iint k(d(x, y)) g(x)^p g(y)^p dx dy, with a block standard error.
/// Pairs closer than 1e-3 are excluded; their contribution is the same for
/// both fields and cancels in the difference. Needs nonnegative values.
GapEstimate polarization_gap(const SampledField& field, const GeodesicHypersurface& surface,
                             const KernelTable& kernel, double p);

/// Discrete Schwarz rearrangement about the origin: the multiset of values
/// is permuted so that it decreases along increasing geodesic radius. Each
/// point keeps its volume weight, so the rearranged field is equimeasurable
/// with the input on the transported measure.
std::vector<double> schwarz_rearrange(const std::vector<BallPoint>& points,
                                      const std::vector<double>& values);

struct SymmetryReport {
    BallPoint center;
    double deviation = 0.0;   // rms within-shell spread / rms value
    bool degenerate = false;  // constant field: no center exists, the one reported is arbitrary
};

/// Locates the symmetry center of a sampled field by minimizing the spread of
/// the values within thin equal-width geodesic shells, refining the shell
/// width in stages. deviation is the rms within-shell spread about the
/// recovered center divided by the rms value, so an exactly radial field
/// scores near zero (limited by shell width times the profile slope) and a
/// generic field scores O(1).
SymmetryReport radial_symmetry_check(const SampledField& field);

}  // namespace hyperchoq
