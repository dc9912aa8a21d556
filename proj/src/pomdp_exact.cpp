#include "mos/pomdp/exact.hpp"

#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "mos/core/grid.hpp"

namespace mos::pomdp {
namespace {

// Memo key: nonzero belief entries with mantissas snapped to 40 bits, so
// beliefs that differ only by update-order rounding land on the same key.
// Distinct beliefs in the toy domains this solver targets are ratios of
// small integers and sit far apart, so snapping cannot merge them.
std::uint64_t snap(double v) {
    int e;
    const double mant = std::frexp(v, &e);
    const auto m40 = static_cast<std::int64_t>(std::llround(mant * (1ll << 40)));
    return hash_combine(static_cast<std::uint64_t>(m40),
                        static_cast<std::uint64_t>(static_cast<std::uint32_t>(e)));
}

struct Key {
    std::vector<std::pair<int, std::uint64_t>> entries;  // (state, snapped p)
    int horizon;

    bool operator==(const Key& o) const = default;
};

struct KeyHash {
    std::size_t operator()(const Key& k) const {
        std::uint64_t h = 1469598103934665603ull;
        for (const auto& [s, v] : k.entries) {
            h = hash_combine(h, static_cast<std::uint64_t>(s));
            h = hash_combine(h, v);
        }
        return static_cast<std::size_t>(hash_combine(h, static_cast<std::uint64_t>(k.horizon)));
    }
};

Key make_key(const Belief& b, int horizon) {
    Key k;
    k.horizon = horizon;
    for (int s = 0; s < static_cast<int>(b.size()); ++s)
        if (b[s] > 0.0) k.entries.emplace_back(s, snap(b[s]));
    return k;
}

class Solver {
public:
    Solver(const TabularPomdp& m, const ExactConfig& cfg) : m_(m), cfg_(cfg) {}

    double value(const Belief& b, int horizon) {
        if (horizon <= 0) return 0.0;
        Key key = make_key(b, horizon);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        if (memo_.size() >= cfg_.max_nodes)
            throw BudgetExceeded("exact solver exceeded " +
                                 std::to_string(cfg_.max_nodes) + " belief nodes");
        double best = -HUGE_VAL;
        for (int a = 0; a < m_.num_actions(); ++a) best = std::max(best, q_value(b, a, horizon));
        memo_.emplace(std::move(key), best);
        return best;
    }

    double q_value(const Belief& b, int a, int horizon) {
        double q = 0.0;
        bool all_terminal = true;
        for (int s = 0; s < m_.num_states(); ++s) {
            if (b[s] == 0.0) continue;
            if (!m_.terminal(s)) {
                q += b[s] * m_.reward(s, a);
                all_terminal = false;
            }
        }
        if (all_terminal || horizon <= 1) return q;
        for (int z = 0; z < m_.num_obs(); ++z) {
            const double pz = obs_prob(m_, b, a, z);
            if (pz <= 0.0) continue;
            q += m_.discount() * pz * value(belief_update(m_, b, a, z), horizon - 1);
        }
        return q;
    }

private:
    const TabularPomdp& m_;
    const ExactConfig& cfg_;
    std::unordered_map<Key, double, KeyHash> memo_;
};

}  // namespace

double exact_value(const TabularPomdp& m, const Belief& b, const ExactConfig& cfg) {
    return Solver(m, cfg).value(b, cfg.horizon);
}

std::vector<QValue> exact_q_values(const TabularPomdp& m, const Belief& b,
                                   const ExactConfig& cfg) {
    Solver solver(m, cfg);
    std::vector<QValue> qs;
    qs.reserve(m.num_actions());
    for (int a = 0; a < m.num_actions(); ++a)
        qs.push_back({a, solver.q_value(b, a, cfg.horizon)});
    return qs;
}

int exact_best_action(const TabularPomdp& m, const Belief& b, const ExactConfig& cfg) {
    const auto qs = exact_q_values(m, b, cfg);
    int best = 0;
    for (int a = 1; a < static_cast<int>(qs.size()); ++a)
        if (qs[a].value > qs[best].value) best = a;
    return best;
}

}  // namespace mos::pomdp
