#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mos/planning/pouct.hpp"
#include "mos/pomdp/tabular.hpp"

namespace mos::cos {

// A 1D corridor with a hidden target and one spatially coupled second
// object.  The target detector fires only from the target's own cell; the
// detector for the coupled object also fires from the two adjacent cells.
// The coupled object always sits one cell to the right of the target,
// clamped at the wall, which makes it an exact location proxy.
struct HallwayParams {
    int length = 4;
    double fp_target = 0.0, fn_target = 0.0;  // target detector noise
    double fp_corr = 0.0, fn_corr = 0.0;      // coupled-object detector noise
    double discount = 0.95;
};

// Three POMDP views of the same world:
//   corr   - state (robot, target); the coupled detector enters through the
//            marginal observation model, keeping the state space small.
//   full   - state (robot, target, coupled object); reference model.
//   target - state (robot, target); only the target detector is modeled.
// Observations are z_target + 2 * z_corr for corr/full and z_target for the
// target-only view.
struct HallwayModel {
    HallwayParams params;
    pomdp::TabularPomdp corr;
    pomdp::TabularPomdp full;
    pomdp::TabularPomdp target_only;

    static constexpr int kLeft = 0, kRight = 1, kDone = 2;

    int length() const { return params.length; }
    static int couple(int x_target, int length) {
        return x_target + 1 < length ? x_target + 1 : length - 1;
    }

    int corr_index(int s_r, int x_t) const { return s_r * length() + x_t; }
    int full_index(int s_r, int x_t, int x_c) const {
        return (s_r * length() + x_t) * length() + x_c;
    }
    int corr_terminal() const { return length() * length(); }
    int full_terminal() const { return length() * length() * length(); }

    // Robot starts at cell 0; the target is uniform over the corridor.
    pomdp::Belief corr_prior() const;
    pomdp::Belief full_prior() const;
};

HallwayModel build_hallway(const HallwayParams& params);

// Pr(z | h, a) from a prior filtered through the history of (action,
// observation) pairs.  This is the brute-force check used against the
// factored model: run it on the full-state POMDP and compare.  Throws
// BudgetExceeded for state spaces too large to enumerate, ZeroLikelihood
// when the history itself is impossible.
double history_observation_prob(const pomdp::TabularPomdp& m,
                                const pomdp::Belief& prior,
                                const std::vector<std::pair<int, int>>& history,
                                int action, int obs);

enum class HallwayAgent { kCorr, kTargetOnly };

// One seeded episode: the world evolves under the full model from a state
// drawn from the joint prior; the agent plans with POUCT on its own view
// and filters its own belief.  Returns the discounted return; an episode
// ends on Done or after max_steps.
double run_hallway_trial(const HallwayModel& model, HallwayAgent agent,
                         const planning::PouctConfig& pouct, int max_steps,
                         std::uint64_t seed);

}  // namespace mos::cos
