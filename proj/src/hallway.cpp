#include "mos/cos/hallway.hpp"

#include <cmath>

#include "mos/core/error.hpp"
#include "mos/planning/tabular_domain.hpp"

namespace mos::cos {

namespace {

// Detector firing probabilities.
double d_target(int z, int x_t, int s_r, const HallwayParams& p) {
    const bool on = (s_r == x_t);
    const double fire = on ? 1.0 - p.fn_target : p.fp_target;
    return z ? fire : 1.0 - fire;
}

double d_corr(int z, int x_c, int s_r, const HallwayParams& p) {
    const bool near = std::abs(s_r - x_c) <= 1;
    const double fire = near ? 1.0 - p.fn_corr : p.fp_corr;
    return z ? fire : 1.0 - fire;
}

int clamp_move(int s_r, int action, int length) {
    if (action == HallwayModel::kLeft) return s_r > 0 ? s_r - 1 : 0;
    return s_r + 1 < length ? s_r + 1 : length - 1;
}

}  // namespace

pomdp::Belief HallwayModel::corr_prior() const {
    pomdp::Belief b(corr_terminal() + 1, 0.0);
    for (int x = 0; x < length(); ++x) b[corr_index(0, x)] = 1.0 / length();
    return b;
}

pomdp::Belief HallwayModel::full_prior() const {
    pomdp::Belief b(full_terminal() + 1, 0.0);
    for (int x = 0; x < length(); ++x)
        b[full_index(0, x, couple(x, length()))] = 1.0 / length();
    return b;
}

HallwayModel build_hallway(const HallwayParams& p) {
    const int L = p.length;
    if (L < 2 || L > 8) throw InvalidConfig("hallway length must be in [2, 8]");

    HallwayModel m{p,
                   pomdp::TabularPomdp(L * L + 1, 3, 4, p.discount),
                   pomdp::TabularPomdp(L * L * L + 1, 3, 4, p.discount),
                   pomdp::TabularPomdp(L * L + 1, 3, 2, p.discount)};

    auto fill_robot_target = [&](pomdp::TabularPomdp& pom, bool with_corr) {
        const int term = m.corr_terminal();
        for (int s_r = 0; s_r < L; ++s_r) {
            for (int x_t = 0; x_t < L; ++x_t) {
                const int s = m.corr_index(s_r, x_t);
                for (int a = 0; a < 3; ++a) {
                    if (a == HallwayModel::kDone) {
                        pom.trans(s, a, term) = 1.0;
                        pom.reward(s, a) = (s_r == x_t) ? 100.0 : -100.0;
                    } else {
                        pom.trans(s, a, m.corr_index(clamp_move(s_r, a, L), x_t)) =
                            1.0;
                        pom.reward(s, a) = -1.0;
                    }
                    // Observation given the post-action state.
                    if (with_corr) {
                        const int x_c = HallwayModel::couple(x_t, L);
                        for (int z = 0; z < 4; ++z)
                            pom.obs(s, a, z) = d_target(z & 1, x_t, s_r, p) *
                                               d_corr(z >> 1, x_c, s_r, p);
                    } else {
                        for (int z = 0; z < 2; ++z)
                            pom.obs(s, a, z) = d_target(z, x_t, s_r, p);
                    }
                }
            }
        }
        for (int a = 0; a < 3; ++a) {
            pom.trans(term, a, term) = 1.0;
            for (int z = 0; z < pom.num_obs(); ++z)
                pom.obs(term, a, z) = 1.0 / pom.num_obs();
        }
        pom.set_terminal(term);
        pom.validate();
    };
    fill_robot_target(m.corr, true);
    fill_robot_target(m.target_only, false);

    const int fterm = m.full_terminal();
    for (int s_r = 0; s_r < L; ++s_r)
        for (int x_t = 0; x_t < L; ++x_t)
            for (int x_c = 0; x_c < L; ++x_c) {
                const int s = m.full_index(s_r, x_t, x_c);
                for (int a = 0; a < 3; ++a) {
                    if (a == HallwayModel::kDone) {
                        m.full.trans(s, a, fterm) = 1.0;
                        m.full.reward(s, a) = (s_r == x_t) ? 100.0 : -100.0;
                    } else {
                        m.full.trans(
                            s, a, m.full_index(clamp_move(s_r, a, L), x_t, x_c)) =
                            1.0;
                        m.full.reward(s, a) = -1.0;
                    }
                    for (int z = 0; z < 4; ++z)
                        m.full.obs(s, a, z) = d_target(z & 1, x_t, s_r, p) *
                                              d_corr(z >> 1, x_c, s_r, p);
                }
            }
    for (int a = 0; a < 3; ++a) {
        m.full.trans(fterm, a, fterm) = 1.0;
        for (int z = 0; z < 4; ++z) m.full.obs(fterm, a, z) = 0.25;
    }
    m.full.set_terminal(fterm);
    m.full.validate();
    return m;
}

double history_observation_prob(const pomdp::TabularPomdp& m,
                                const pomdp::Belief& prior,
                                const std::vector<std::pair<int, int>>& history,
                                int action, int obs) {
    if (m.num_states() > 2000)
        throw BudgetExceeded("state space too large for exact history filtering");
    pomdp::Belief b = prior;
    for (const auto& [a, z] : history) b = pomdp::belief_update(m, b, a, z);
    return pomdp::obs_prob(m, b, action, obs);
}

namespace {

int sample_state(const pomdp::Belief& b, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    int last = 0;
    for (int s = 0; s < static_cast<int>(b.size()); ++s) {
        if (b[s] <= 0.0) continue;
        acc += b[s];
        last = s;
        if (u < acc) return s;
    }
    return last;
}

}  // namespace

double run_hallway_trial(const HallwayModel& model, HallwayAgent agent,
                         const planning::PouctConfig& pouct, int max_steps,
                         std::uint64_t seed) {
    Rng rng(seed);
    const pomdp::TabularPomdp& world = model.full;
    const pomdp::TabularPomdp& view =
        agent == HallwayAgent::kCorr ? model.corr : model.target_only;

    int true_state = sample_state(model.full_prior(), rng);
    // Both agent views share the (robot, target) state space and prior.
    pomdp::Belief belief = model.corr_prior();

    planning::TabularDomain domain(view);
    std::vector<double> rewards;
    for (int step = 0; step < max_steps; ++step) {
        planning::Pouct<planning::TabularDomain> planner(domain, pouct);
        auto sample = [&](Rng& r) { return sample_state(belief, r); };
        const int a = planner.plan(sample, rng).action;

        const auto st = pomdp::generate(world, true_state, a, rng);
        rewards.push_back(st.reward);
        true_state = st.next_state;
        if (a == HallwayModel::kDone) break;

        const int z =
            agent == HallwayAgent::kCorr ? st.obs : (st.obs & 1);
        belief = pomdp::belief_update(view, belief, a, z);
    }
    return pomdp::discounted_return(rewards, world.discount());
}

}  // namespace mos::cos
