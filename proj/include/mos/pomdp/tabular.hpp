#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mos/core/error.hpp"
#include "mos/core/rng.hpp"

namespace mos::pomdp {

// Finite POMDP <S,A,Z,T,O,R,gamma> with dense tensors, states/actions/
// observations as indices.  Row-stochasticity is checked by validate().
class TabularPomdp {
public:
    TabularPomdp(int num_states, int num_actions, int num_obs, double discount)
        : ns_(num_states), na_(num_actions), nz_(num_obs), gamma_(discount),
          trans_(static_cast<std::size_t>(ns_) * na_ * ns_, 0.0),
          obs_(static_cast<std::size_t>(ns_) * na_ * nz_, 0.0),
          reward_(static_cast<std::size_t>(ns_) * na_, 0.0),
          terminal_(ns_, false) {}

    int num_states() const { return ns_; }
    int num_actions() const { return na_; }
    int num_obs() const { return nz_; }
    double discount() const { return gamma_; }

    double& trans(int s, int a, int s2) {
        return trans_[(static_cast<std::size_t>(s) * na_ + a) * ns_ + s2];
    }
    double trans(int s, int a, int s2) const {
        return trans_[(static_cast<std::size_t>(s) * na_ + a) * ns_ + s2];
    }
    // O(s', a, z): probability of z after reaching s' via a.
    double& obs(int s2, int a, int z) {
        return obs_[(static_cast<std::size_t>(s2) * na_ + a) * nz_ + z];
    }
    double obs(int s2, int a, int z) const {
        return obs_[(static_cast<std::size_t>(s2) * na_ + a) * nz_ + z];
    }
    double& reward(int s, int a) {
        return reward_[static_cast<std::size_t>(s) * na_ + a];
    }
    double reward(int s, int a) const {
        return reward_[static_cast<std::size_t>(s) * na_ + a];
    }

    void set_terminal(int s, bool t = true) { terminal_[s] = t; }
    bool terminal(int s) const { return terminal_[s]; }

    void validate(double tol = 1e-9) const {
        for (int s = 0; s < ns_; ++s) {
            for (int a = 0; a < na_; ++a) {
                double ts = 0.0, zs = 0.0;
                for (int s2 = 0; s2 < ns_; ++s2) ts += trans(s, a, s2);
                for (int z = 0; z < nz_; ++z) zs += obs(s, a, z);
                if (std::abs(ts - 1.0) > tol)
                    throw InvalidConfig("transition row (s=" + std::to_string(s) +
                                        ",a=" + std::to_string(a) + ") sums to " +
                                        std::to_string(ts));
                if (std::abs(zs - 1.0) > tol)
                    throw InvalidConfig("observation row (s'=" + std::to_string(s) +
                                        ",a=" + std::to_string(a) + ") sums to " +
                                        std::to_string(zs));
            }
        }
    }

private:
    int ns_, na_, nz_;
    double gamma_;
    std::vector<double> trans_, obs_, reward_;
    std::vector<bool> terminal_;
};

using Belief = std::vector<double>;

// Exact Bayes filter step: b'(s') = O(s',a,z) * sum_s T(s,a,s') b(s) / eta.
// Throws ZeroLikelihood when eta == 0 (z impossible under b after a).
inline Belief belief_update(const TabularPomdp& m, const Belief& b, int a, int z) {
    Belief out(m.num_states(), 0.0);
    double eta = 0.0;
    for (int s2 = 0; s2 < m.num_states(); ++s2) {
        double pred = 0.0;
        for (int s = 0; s < m.num_states(); ++s) {
            if (b[s] == 0.0) continue;
            pred += m.trans(s, a, s2) * b[s];
        }
        const double w = m.obs(s2, a, z) * pred;
        out[s2] = w;
        eta += w;
    }
    if (eta <= 0.0)
        throw ZeroLikelihood("observation " + std::to_string(z) +
                             " impossible after action " + std::to_string(a));
    for (double& p : out) p /= eta;
    return out;
}

// Probability of observing z after taking a from belief b.
inline double obs_prob(const TabularPomdp& m, const Belief& b, int a, int z) {
    double p = 0.0;
    for (int s = 0; s < m.num_states(); ++s) {
        if (b[s] == 0.0) continue;
        for (int s2 = 0; s2 < m.num_states(); ++s2) {
            const double t = m.trans(s, a, s2);
            if (t == 0.0) continue;
            p += b[s] * t * m.obs(s2, a, z);
        }
    }
    return p;
}

struct Step {
    int next_state;
    int obs;
    double reward;
};

// One generative-model sample (s', z, r) ~ G(s, a).
inline Step generate(const TabularPomdp& m, int s, int a, Rng& rng) {
    Step st{};
    st.reward = m.reward(s, a);
    double u = rng.uniform();
    double acc = 0.0;
    st.next_state = m.num_states() - 1;
    for (int s2 = 0; s2 < m.num_states(); ++s2) {
        acc += m.trans(s, a, s2);
        if (u < acc) {
            st.next_state = s2;
            break;
        }
    }
    u = rng.uniform();
    acc = 0.0;
    st.obs = m.num_obs() - 1;
    for (int z = 0; z < m.num_obs(); ++z) {
        acc += m.obs(st.next_state, a, z);
        if (u < acc) {
            st.obs = z;
            break;
        }
    }
    return st;
}

// sum_t gamma^t r_t over a reward sequence; empty sequence gives 0.
inline double discounted_return(const std::vector<double>& rewards, double gamma) {
    double g = 1.0, total = 0.0;
    for (double r : rewards) {
        total += g * r;
        g *= gamma;
    }
    return total;
}

}  // namespace mos::pomdp
