#pragma once

#include <optional>

#include "mos/mos3d/domain.hpp"
#include "mos/octree/octree_belief.hpp"

namespace mos::mos3d {

struct AgentSetup {
    Mos3dConfig model;
    ViewGraphConfig graph;
    planning::PouctConfig pouct;
};

// One search agent: per-object octree beliefs, the robot pose as reported
// by the platform, the found-set, and a view graph that is resampled
// whenever it covers too little of the remaining belief.  Planning and
// updates are meant to be called from one thread.
class Mos3dAgent {
public:
    Mos3dAgent(sensing::OccupancyGrid occ, std::vector<octree::OctreeBelief> beliefs,
               const Pose& start, const AgentSetup& setup, std::uint64_t seed)
        : occ_(std::move(occ)),
          beliefs_(std::move(beliefs)),
          pose_(start),
          setup_(setup),
          rng_(seed) {}

    int num_objects() const { return static_cast<int>(beliefs_.size()); }
    const Pose& pose() const { return pose_; }
    std::uint32_t found() const { return found_; }
    bool all_found() const {
        return found_ == (1u << static_cast<unsigned>(num_objects())) - 1u;
    }
    const sensing::OccupancyGrid& occupancy() const { return occ_; }
    const std::vector<octree::OctreeBelief>& beliefs() const { return beliefs_; }
    octree::OctreeBelief& belief(int id) { return beliefs_[id]; }

    BeliefRefs unfound_beliefs() const {
        BeliefRefs refs;
        for (int i = 0; i < num_objects(); ++i)
            if (!((found_ >> i) & 1u)) refs.push_back(&beliefs_[i]);
        return refs;
    }

    // Resamples when missing or when coverage dropped below the threshold.
    const ViewPositionGraph& ensure_graph() {
        const auto refs = unfound_beliefs();
        if (!graph_ ||
            should_resample(*graph_, refs, setup_.graph.resample_threshold))
            graph_ = sample_view_graph(refs, occ_, setup_.graph);
        return *graph_;
    }

    planning::PlanResult<Mos3dDomain> plan() {
        ensure_graph();
        Mos3dDomain domain(occ_, *graph_, setup_.model);
        planning::Pouct<Mos3dDomain> planner(domain, setup_.pouct);
        auto sample = [this](Rng& r) {
            Mos3dState s;
            s.robot = pose_;
            s.found = found_;
            s.objects.reserve(beliefs_.size());
            for (const auto& b : beliefs_) s.objects.push_back(b.sample(r));
            return s;
        };
        return planner.plan(sample, rng_);
    }

    Mos3dAction plan_greedy(bool detected) {
        ensure_graph();
        return greedy_action(unfound_beliefs(), *graph_, detected);
    }

    Mos3dAction plan_random(bool detected) {
        ensure_graph();
        return random_action(*graph_, detected, rng_);
    }

    // Volumetric evidence for every object's belief.
    void update(const sensing::VolumetricObservation& z) {
        for (int i = 0; i < num_objects(); ++i)
            octree::volumetric_update(beliefs_[i], z.labels, i, setup_.model.alpha);
    }

    void set_pose(const Pose& p) { pose_ = p; }
    void mark_found(int id) { found_ |= 1u << id; }
    void set_found(std::uint32_t mask) { found_ = mask; }

    // Swapping the map invalidates the view graph but keeps the beliefs;
    // used when the client streams a fresh scan of the same region.
    void set_occupancy(sensing::OccupancyGrid occ) {
        occ_ = std::move(occ);
        graph_.reset();
    }

    void set_pouct(const planning::PouctConfig& cfg) { setup_.pouct = cfg; }

    bool has_graph() const { return graph_.has_value(); }
    const ViewPositionGraph* graph() const { return graph_ ? &*graph_ : nullptr; }

    const AgentSetup& setup() const { return setup_; }

private:
    sensing::OccupancyGrid occ_;
    std::vector<octree::OctreeBelief> beliefs_;
    Pose pose_;
    std::uint32_t found_ = 0;
    AgentSetup setup_;
    Rng rng_;
    std::optional<ViewPositionGraph> graph_;
};

}  // namespace mos::mos3d
