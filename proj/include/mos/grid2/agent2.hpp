#pragma once

#include <cstdint>
#include <utility>

#include "mos/grid2/belief2.hpp"
#include "mos/grid2/domain.hpp"
#include "mos/planning/pouct.hpp"

namespace mos::grid2 {

// Single-level 2D search agent: primitive-action POUCT straight over the
// search domain, with the same belief filter the hierarchical agent uses.
class SearchAgent2 {
public:
    SearchAgent2(const GridMap2& map, const RobotPose& start, SearchConfig cfg,
                 planning::PouctConfig pouct, std::uint64_t seed)
        : map_(&map), cfg_(std::move(cfg)), pouct_(std::move(pouct)),
          belief_(Belief2::uniform(map)), pose_(start), rng_(seed) {}

    Action2 plan() {
        SearchDomain dom(*map_, cfg_);
        planning::Pouct<SearchDomain> planner(dom, pouct_);
        return planner
            .plan([&](Rng& r) { return SearchState{pose_, belief_.sample(r), false}; },
                  rng_)
            .action;
    }

    void update(Action2 a, const SearchObservation& z) {
        if (a == Action2::kFind) {
            done_ = true;
            return;
        }
        pose_ = apply_move(pose_, a, *map_, cfg_.rotate_step);
        const auto vp = to_pose2(pose_);
        if (!z.detections.empty())
            detection_update(belief_, *map_, cfg_.res, vp, cfg_.target_detector,
                             z.detections[0]);
        for (std::size_t i = 0; i < cfg_.correlated.size(); ++i) {
            if (i + 1 >= z.detections.size()) break;
            const auto& cls = cfg_.correlated[i];
            correlated_update(belief_, *map_, cfg_.res, vp, cls.detector,
                              cls.relation, z.detections[i + 1]);
        }
    }

    const Belief2& belief() const { return belief_; }
    void set_belief(Belief2 b) { belief_ = std::move(b); }
    const RobotPose& pose() const { return pose_; }
    const SearchConfig& config() const { return cfg_; }
    bool done() const { return done_; }

private:
    const GridMap2* map_;
    SearchConfig cfg_;
    planning::PouctConfig pouct_;
    Belief2 belief_;
    RobotPose pose_;
    bool done_ = false;
    Rng rng_;
};

}  // namespace mos::grid2
