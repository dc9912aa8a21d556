#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mos/core/grid.hpp"
#include "mos/core/rng.hpp"
#include "mos/cos/models.hpp"
#include "mos/grid2/gridmap.hpp"
#include "mos/planning/pouct.hpp"

namespace mos::grid2 {

inline constexpr int kHeadings = 8;

// Robot heading quantized to 45 degree steps, counterclockwise from +x.
struct RobotPose {
    GridPoint pos;
    int dir = 0;  // 0..7

    friend bool operator==(const RobotPose&, const RobotPose&) = default;
};

inline double heading_rad(int dir) { return dir * M_PI / 4.0; }

// Unit grid displacement for a heading; diagonal headings move diagonally.
inline GridPoint heading_step(int dir) {
    static constexpr int dx[kHeadings] = {1, 1, 0, -1, -1, -1, 0, 1};
    static constexpr int dy[kHeadings] = {0, 1, 1, 1, 0, -1, -1, -1};
    return {dx[dir], dy[dir], 0};
}

inline cos::Pose2 to_pose2(const RobotPose& r) {
    return {r.pos, heading_rad(r.dir)};
}

// Heading index closest to the direction from one cell toward another;
// `fallback` is returned when the cells coincide.
inline int facing_dir(const GridPoint& from, const GridPoint& to, int fallback = 0) {
    if (from.x == to.x && from.y == to.y) return fallback;
    const double ang = std::atan2(static_cast<double>(to.y - from.y),
                                  static_cast<double>(to.x - from.x));
    const int d = static_cast<int>(std::lround(ang / (M_PI / 4.0)));
    return ((d % kHeadings) + kHeadings) % kHeadings;
}

enum class Action2 { kMoveAhead = 0, kRotateLeft = 1, kRotateRight = 2, kFind = 3 };

// One object class whose detections inform the target location through a
// spatial relation.
struct CorrelatedClass {
    std::string name;
    cos::DetectionParams detector;
    cos::CorrelationParams relation;
};

struct SearchConfig {
    double res = 1.0;   // meters per cell
    int rotate_step = 1;  // rotation action size, in 45 degree units
    cos::DetectionParams target_detector;
    std::vector<CorrelatedClass> correlated;
    double step_cost = -10.0;
    double find_reward = 1000.0;
    double find_penalty = -1000.0;
    double found_dist = 1.0;  // meters; declare succeeds within this range
    double discount = 0.95;
};

struct SearchState {
    RobotPose robot;
    GridPoint target;
    bool done = false;

    friend bool operator==(const SearchState&, const SearchState&) = default;
};

// Joint detection reading: slot 0 is the target detector, slots 1..n follow
// SearchConfig::correlated order.  nullopt means the detector stayed quiet.
struct SearchObservation {
    std::vector<std::optional<GridPoint>> detections;

    friend bool operator==(const SearchObservation&, const SearchObservation&) =
        default;

    std::size_t hash() const noexcept {
        std::uint64_t h = 0x9e3779b97f4a7c15ull;
        for (const auto& d : detections) {
            if (d) {
                h = hash_combine(h, GridPointHash{}(*d));
                h = hash_combine(h, 0x1ull);
            } else {
                h = hash_combine(h, 0x2ull);
            }
        }
        return static_cast<std::size_t>(h);
    }
};

struct SearchObservationHash {
    std::size_t operator()(const SearchObservation& z) const noexcept {
        return z.hash();
    }
};

// Declares succeed when the target is inside the sensor fan and within
// found_dist meters of the robot.
inline bool target_found(const RobotPose& robot, const GridPoint& target,
                         const SearchConfig& cfg) {
    const double dx = robot.pos.x - target.x, dy = robot.pos.y - target.y;
    if (cfg.res * std::hypot(dx, dy) > cfg.found_dist) return false;
    return cos::in_fan(to_pose2(robot), target, cfg.target_detector.fov, cfg.res);
}

// Deterministic motion: rotations always succeed, a blocked or out-of-bounds
// MoveAhead leaves the pose unchanged.
inline RobotPose apply_move(const RobotPose& r, Action2 a, const GridMap2& map,
                            int rotate_step) {
    RobotPose out = r;
    switch (a) {
        case Action2::kMoveAhead: {
            const GridPoint d = heading_step(r.dir);
            const GridPoint to{r.pos.x + d.x, r.pos.y + d.y, 0};
            if (map.free(to)) out.pos = to;
            break;
        }
        case Action2::kRotateLeft:
            out.dir = (r.dir + rotate_step) % kHeadings;
            break;
        case Action2::kRotateRight:
            out.dir = (r.dir - rotate_step % kHeadings + kHeadings) % kHeadings;
            break;
        case Action2::kFind:
            break;
    }
    return out;
}

// Generative model of one joint detector reading from a viewpoint.  True
// positives report the object's exact cell; false positives pick a uniform
// cell among those in the fan within detector range.  Correlated objects are
// first placed by sampling the relation around the target, then run through
// their own detector.
SearchObservation sample_search_observation(const GridMap2& map,
                                            const SearchConfig& cfg,
                                            const cos::Pose2& viewpoint,
                                            const GridPoint& target, Rng& rng);

// 2D multi-detector object search as a POUCT planning domain.
class SearchDomain {
public:
    using State = SearchState;
    using Action = Action2;
    using Observation = SearchObservation;
    using ObsHash = SearchObservationHash;

    SearchDomain(const GridMap2& map, SearchConfig cfg)
        : map_(&map), cfg_(std::move(cfg)) {}

    std::vector<Action2> actions(const SearchState&) const {
        return {Action2::kMoveAhead, Action2::kRotateLeft, Action2::kRotateRight,
                Action2::kFind};
    }

    planning::Outcome<SearchState, SearchObservation> step(const SearchState& s,
                                                           Action2 a,
                                                           Rng& rng) const {
        SearchState next = s;
        double reward = cfg_.step_cost;
        if (a == Action2::kFind) {
            next.done = true;
            reward = target_found(s.robot, s.target, cfg_) ? cfg_.find_reward
                                                           : cfg_.find_penalty;
        } else {
            next.robot = apply_move(s.robot, a, *map_, cfg_.rotate_step);
        }
        auto z = sample_search_observation(*map_, cfg_, to_pose2(next.robot),
                                           next.target, rng);
        return {next, std::move(z), reward};
    }

    double discount() const { return cfg_.discount; }
    bool terminal(const SearchState& s) const { return s.done; }

    const GridMap2& map() const { return *map_; }
    const SearchConfig& config() const { return cfg_; }

private:
    const GridMap2* map_;
    SearchConfig cfg_;
};

}  // namespace mos::grid2
