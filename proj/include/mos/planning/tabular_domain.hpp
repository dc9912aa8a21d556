#pragma once

#include <functional>
#include <numeric>
#include <vector>

#include "mos/planning/pouct.hpp"
#include "mos/pomdp/tabular.hpp"

namespace mos::planning {

// Adapts a TabularPomdp to the PlanningDomain concept.
class TabularDomain {
public:
    using State = int;
    using Action = int;
    using Observation = int;
    using ObsHash = std::hash<int>;

    explicit TabularDomain(const pomdp::TabularPomdp& m) : m_(&m) {}

    std::vector<int> actions(int) const {
        std::vector<int> a(m_->num_actions());
        std::iota(a.begin(), a.end(), 0);
        return a;
    }

    Outcome<int, int> step(int s, int a, Rng& rng) const {
        const auto st = pomdp::generate(*m_, s, a, rng);
        return {st.next_state, st.obs, st.reward};
    }

    double discount() const { return m_->discount(); }
    bool terminal(int s) const { return m_->terminal(s); }

private:
    const pomdp::TabularPomdp* m_;
};

}  // namespace mos::planning
