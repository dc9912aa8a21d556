#pragma once

#include <bit>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "mos/mos3d/mos3d.hpp"
#include "mos/planning/pouct.hpp"
#include "mos/sensing/visibility.hpp"

namespace mos::mos3d {

// Planning-tree observation: which objects were detected and where.  Much
// smaller than a full volumetric map, so histories with the same detection
// outcome share tree nodes.
struct Mos3dObservation {
    std::vector<std::pair<int, GridPoint>> detections;  // ascending object id

    friend bool operator==(const Mos3dObservation&, const Mos3dObservation&) = default;

    std::size_t hash() const noexcept {
        std::uint64_t h = 0x9e3779b97f4a7c15ull;
        for (const auto& [id, g] : detections) {
            h = hash_combine(h, static_cast<std::uint64_t>(id));
            h = hash_combine(h, GridPointHash{}(g));
        }
        return static_cast<std::size_t>(h);
    }
};

struct Mos3dObservationHash {
    std::size_t operator()(const Mos3dObservation& o) const noexcept {
        return o.hash();
    }
};

// Generative model over the view graph: Move to any node (with the implicit
// reorientation toward the nearest unfound object) or Find.  Detections in
// the simulated observation are independent per visible object with
// probability alpha.  Visibility per (cell, direction) pose is cached; the
// orientation quantization keeps that cache small.
class Mos3dDomain {
public:
    using State = Mos3dState;
    using Action = Mos3dAction;
    using Observation = Mos3dObservation;
    using ObsHash = Mos3dObservationHash;

    Mos3dDomain(const sensing::OccupancyGrid& occ, const ViewPositionGraph& graph,
                const Mos3dConfig& cfg)
        : occ_(occ), graph_(graph), cfg_(cfg) {}

    std::vector<Action> actions(const State&) const {
        std::vector<Action> out;
        out.reserve(graph_.nodes.size() + 1);
        for (const auto& n : graph_.nodes) out.push_back(Action::move(n));
        out.push_back(Action::find());
        return out;
    }

    planning::Outcome<State, Observation> step(const State& s, const Action& a,
                                               Rng& rng) const {
        planning::Outcome<State, Observation> out;
        out.state = s;
        if (a.kind == Action::kMove) {
            const auto path = sensing::ray_voxels(s.robot.pos.center(),
                                                  a.target.center());
            out.reward = cfg_.step_cost *
                         std::max<int>(1, static_cast<int>(path.size()) - 1);
            out.state.robot.pos = a.target;
            out.state.robot.dir = reorient(s, a.target);
        } else {
            const std::uint32_t mask = visible_mask(out.state);
            out.state.found |= mask;
            const int k = std::popcount(mask);
            out.reward = k > 0 ? cfg_.find_reward * k : cfg_.find_penalty;
        }
        const auto& vis = visible_set(out.state.robot);
        for (int i = 0; i < static_cast<int>(out.state.objects.size()); ++i) {
            if (out.state.is_found(i)) continue;
            if (vis.count(out.state.objects[i]) && rng.bernoulli(cfg_.alpha))
                out.obs.detections.emplace_back(i, out.state.objects[i]);
        }
        return out;
    }

    double discount() const { return cfg_.discount; }

    bool terminal(const State& s) const {
        const auto n = static_cast<std::uint32_t>(s.objects.size());
        return s.found == ((n >= 32 ? 0u : 1u << n) - 1u);
    }

    const sensing::OccupancyGrid& occupancy() const { return occ_; }
    const Mos3dConfig& config() const { return cfg_; }

private:
    struct PoseKey {
        GridPoint pos;
        int dir;
        friend bool operator==(const PoseKey&, const PoseKey&) = default;
    };
    struct PoseKeyHash {
        std::size_t operator()(const PoseKey& k) const noexcept {
            return hash_combine(GridPointHash{}(k.pos),
                                static_cast<std::uint64_t>(k.dir));
        }
    };
    using VisibleSet = std::unordered_set<GridPoint, GridPointHash>;

    int reorient(const State& s, const GridPoint& to) const {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (int i = 0; i < static_cast<int>(s.objects.size()); ++i) {
            if (s.is_found(i)) continue;
            const double d = (s.objects[i].center() - to.center()).norm();
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        if (best < 0) return s.robot.dir;
        const Vec3 v = s.objects[best].center() - to.center();
        if (v.squaredNorm() == 0.0) return s.robot.dir;
        return quantize_dir(v);
    }

    std::uint32_t visible_mask(const State& s) const {
        const auto& vis = visible_set(s.robot);
        std::uint32_t mask = 0;
        for (int i = 0; i < static_cast<int>(s.objects.size()); ++i)
            if (!s.is_found(i) && vis.count(s.objects[i])) mask |= 1u << i;
        return mask;
    }

    const VisibleSet& visible_set(const Pose& p) const {
        const PoseKey key{p.pos, p.dir};
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            const auto cells = sensing::visible_voxels(make_fov(p, cfg_), occ_);
            it = cache_.emplace(key, VisibleSet(cells.begin(), cells.end())).first;
        }
        return it->second;
    }

    const sensing::OccupancyGrid& occ_;
    const ViewPositionGraph& graph_;
    Mos3dConfig cfg_;
    mutable std::unordered_map<PoseKey, VisibleSet, PoseKeyHash> cache_;
};

}  // namespace mos::mos3d
