#pragma once

#include <cstddef>
#include <vector>

#include "mos/pomdp/tabular.hpp"

namespace mos::pomdp {

struct ExactConfig {
    int horizon = 6;
    // Memoized belief nodes allowed before BudgetExceeded.  Beliefs reached
    // along different observation paths only merge when they agree bitwise
    // after mantissa snapping, so domains without belief collapse should
    // keep the horizon small instead of raising this.
    std::size_t max_nodes = 2'000'000;
};

struct QValue {
    int action;
    double value;
};

// Finite-horizon expectimax over the belief MDP:
//   V(b,h) = max_a [ sum_s b(s) R(s,a) + gamma * sum_z Pr(z|b,a) V(b',h-1) ]
// with memoization on (belief, h).  Throws BudgetExceeded past max_nodes.
double exact_value(const TabularPomdp& m, const Belief& b, const ExactConfig& cfg);

// Root action values in action-index order; best action is the argmax with
// lowest index winning ties.
std::vector<QValue> exact_q_values(const TabularPomdp& m, const Belief& b,
                                   const ExactConfig& cfg);
int exact_best_action(const TabularPomdp& m, const Belief& b, const ExactConfig& cfg);

}  // namespace mos::pomdp
