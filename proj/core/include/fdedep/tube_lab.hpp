#pragma once

#include "fdedep/lab.hpp"
#include "fdedep/rhs.hpp"

#include <cstdint>
#include <vector>

namespace fdedep {

/// Right-hand sides f_0, f_1, ..., f_K over the (t, segment) space; index 0 is the limit.
using RhsFamily = std::vector<RhsSystem>;

struct TubeBound {
    double M = 0.0;
    std::size_t k0 = 0;
    Tube V;
    double observed_max = 0.0;
    std::vector<std::size_t> sampled_k;
    std::vector<double> member_max; ///< sampled sup |f_k| for each entry of sampled_k
};

/// Samples |f_k| for k in {K/2, ..., K} and k = 0 over the delta/2 neighbourhood of the graph
/// of x0 on [sigma0, sigma0 + a_prime] (reference grid times shifted by 0 and +-delta/2, states
/// from the perturbation basis). M is the observed max inflated by `safety`; k0 is the first
/// sampled tail index after which the running max grows by at most 5%.
TubeBound uniform_bound_on_tube(const RhsFamily& family, const Trajectory& x0, double delta, double a_prime,
                                int density = 4, double safety = 1.25);

/// True when (t, psi) lies within V.radius of some (tau, x0_tau), tau in [t_begin, t_end], in the
/// product metric max(|t - tau|, ||psi - x0_tau||). Candidate centres are t itself and the
/// reference grid nodes; the segment distance is taken at psi's nodes.
bool in_tube(const Tube& V, double t, const SegmentView& psi);

struct RandomTubeCheck {
    std::size_t samples = 0;
    std::size_t above_bound = 0;
    double max_value = 0.0;
};

/// Draws `count` random points of V (time offset and a random piecewise-linear perturbation,
/// both strictly inside the radius) with k uniform in [k_lo, k_hi], and compares |f_k| with M.
RandomTubeCheck random_tube_check(const RhsFamily& family, const Tube& V, std::size_t k_lo, std::size_t k_hi,
                                  std::size_t count, std::uint64_t seed, double M);

/// Continuous convergence f_k -> f_0 on the tube: sample points (tau, c) stand for the state
/// x0_tau + c; probes move both coordinates. Witness coordinates use the same encoding.
Verdict check_tube_continuous_convergence(const RhsFamily& family, const Tube& V, double eps, std::size_t first,
                                          std::size_t time_samples = 17);

/// The (tau, c) sequence behind check_tube_continuous_convergence, for replaying witnesses.
VaryingSeq tube_sequence(const RhsFamily& family, const Tube& V);

} // namespace fdedep
