#pragma once

#include <chrono>
#include <cmath>
#include <concepts>
#include <limits>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "mos/core/error.hpp"
#include "mos/core/rng.hpp"

namespace mos::planning {

// One generative-model step.
template <typename State, typename Observation>
struct Outcome {
    State state;
    Observation obs;
    double reward = 0.0;
};

// A domain usable by the POUCT planner.  Observations key the search tree,
// so the domain must supply equality and a hasher for them.  A domain may
// additionally provide rollout_action(s, rng) to bias rollouts; otherwise
// rollouts pick uniformly among actions(s).
template <typename D>
concept PlanningDomain = requires(const D d, const typename D::State& s,
                                  const typename D::Action& a, Rng& rng) {
    typename D::State;
    typename D::Action;
    typename D::Observation;
    typename D::ObsHash;
    { d.actions(s) } -> std::convertible_to<std::vector<typename D::Action>>;
    { d.step(s, a, rng) }
        -> std::convertible_to<Outcome<typename D::State, typename D::Observation>>;
    { d.discount() } -> std::convertible_to<double>;
    { d.terminal(s) } -> std::convertible_to<bool>;
};

template <typename D>
concept HasRolloutPolicy = requires(const D d, const typename D::State& s, Rng& rng) {
    { d.rollout_action(s, rng) } -> std::convertible_to<typename D::Action>;
};

struct PouctConfig {
    int num_sims = 500;        // simulation budget; 0 means timeout-only
    double timeout_s = 0.0;    // wall-clock budget; 0 means budget-only
    int max_depth = 20;        // rewards accumulate through depth d inclusive
    std::optional<double> c;   // exploration constant; default (rmax-rmin)/2
    double rmax = 100.0;
    double rmin = -100.0;
    int n_init = 0;
    double v_init = 0.0;

    double exploration() const { return c ? *c : (rmax - rmin) / 2.0; }
};

struct ActionStat {
    int n = 0;
    double v = 0.0;
};

template <typename D>
struct PlanResult {
    typename D::Action action;
    int action_index = -1;
    std::vector<ActionStat> stats;  // per root action, action-index order
    int sims = 0;
    double elapsed_s = 0.0;
};

// Monte-Carlo tree search over the belief tree with UCB1 action selection,
// random-state particle injection at the root, and incremental-mean value
// backups.  Identical seeds and identical domain behavior give identical
// chosen actions and statistics.
template <PlanningDomain D>
class Pouct {
public:
    using State = typename D::State;
    using Action = typename D::Action;
    using Observation = typename D::Observation;

    Pouct(const D& domain, PouctConfig cfg) : dom_(domain), cfg_(std::move(cfg)) {
        if (cfg_.num_sims <= 0 && cfg_.timeout_s <= 0.0)
            throw InvalidConfig("pouct needs a simulation or time budget");
        root_ = std::make_unique<VNode>();
    }

    const PouctConfig& config() const { return cfg_; }

    // sample_state draws s ~ b; it may throw EmptyBelief.
    template <typename SampleFn>
    PlanResult<D> plan(SampleFn&& sample_state, Rng& rng) {
        const auto start = std::chrono::steady_clock::now();
        auto elapsed = [&] {
            return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                 start)
                .count();
        };
        int sims = 0;
        while (true) {
            if (cfg_.num_sims > 0 && sims >= cfg_.num_sims) break;
            if (cfg_.timeout_s > 0.0 && elapsed() >= cfg_.timeout_s) break;
            State s = sample_state(rng);
            simulate(s, *root_, 0, rng);
            ++sims;
        }
        if (!root_->expanded)
            throw EmptyBelief("no simulation expanded the search-tree root");

        PlanResult<D> out;
        out.sims = sims;
        out.elapsed_s = elapsed();
        out.stats.reserve(root_->q.size());
        int best = 0;
        for (int i = 0; i < static_cast<int>(root_->q.size()); ++i) {
            out.stats.push_back({root_->q[i].n, root_->q[i].v});
            if (root_->q[i].v > root_->q[best].v) best = i;
        }
        out.action_index = best;
        out.action = root_->actions[best];
        return out;
    }

    // Descend the tree to the child reached by executing `a` and observing
    // `z`; that child becomes the new root (fresh node when unvisited).
    void prune_to(const Action& a, const Observation& z) {
        if (!root_->expanded) {
            root_ = std::make_unique<VNode>();
            return;
        }
        for (std::size_t i = 0; i < root_->actions.size(); ++i) {
            if (!(root_->actions[i] == a)) continue;
            auto it = root_->q[i].children.find(z);
            if (it != root_->q[i].children.end() && it->second) {
                root_ = std::move(it->second);
                return;
            }
            break;
        }
        root_ = std::make_unique<VNode>();
    }

    void reset() { root_ = std::make_unique<VNode>(); }

private:
    struct VNode;

    struct QEdge {
        int n = 0;
        double v = 0.0;
        std::unordered_map<Observation, std::unique_ptr<VNode>, typename D::ObsHash>
            children;
    };

    struct VNode {
        int n = 0;
        bool expanded = false;
        std::vector<Action> actions;
        std::vector<QEdge> q;
    };

    double simulate(const State& s, VNode& node, int depth, Rng& rng) {
        if (depth > cfg_.max_depth) return 0.0;
        if (dom_.terminal(s)) return 0.0;
        if (!node.expanded) {
            node.actions = dom_.actions(s);
            if (node.actions.empty())
                throw InvalidConfig("domain returned no actions");
            node.q.clear();
            node.q.resize(node.actions.size());
            for (auto& e : node.q) {
                e.n = cfg_.n_init;
                e.v = cfg_.v_init;
            }
            node.expanded = true;
            return rollout(s, depth, rng);
        }
        const int ai = ucb_argmax(node);
        auto out = dom_.step(s, node.actions[ai], rng);
        auto& edge = node.q[ai];
        auto [it, inserted] = edge.children.try_emplace(out.obs, nullptr);
        if (inserted) it->second = std::make_unique<VNode>();
        const double total =
            out.reward + dom_.discount() * simulate(out.state, *it->second, depth + 1, rng);
        node.n += 1;
        edge.n += 1;
        edge.v += (total - edge.v) / edge.n;
        return total;
    }

    double rollout(const State& s, int depth, Rng& rng) {
        if (depth > cfg_.max_depth) return 0.0;
        if (dom_.terminal(s)) return 0.0;
        Action a = [&] {
            if constexpr (HasRolloutPolicy<D>) {
                return dom_.rollout_action(s, rng);
            } else {
                auto acts = dom_.actions(s);
                return acts[rng.uniform_index(acts.size())];
            }
        }();
        auto out = dom_.step(s, a, rng);
        return out.reward + dom_.discount() * rollout(out.state, depth + 1, rng);
    }

    int ucb_argmax(const VNode& node) const {
        const double c = cfg_.exploration();
        const double logn = node.n > 0 ? std::log(static_cast<double>(node.n)) : 0.0;
        int best = -1;
        double best_val = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < static_cast<int>(node.q.size()); ++i) {
            double u;
            if (node.q[i].n == 0) {
                u = std::numeric_limits<double>::infinity();
            } else {
                u = node.q[i].v + c * std::sqrt(logn / node.q[i].n);
            }
            if (u > best_val) {
                best_val = u;
                best = i;
            }
        }
        return best;
    }

    const D& dom_;
    PouctConfig cfg_;
    std::unique_ptr<VNode> root_;
};

}  // namespace mos::planning
