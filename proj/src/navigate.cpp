#include "mos/planning/navigate.hpp"

#include <algorithm>
#include <queue>
#include <tuple>

#include "mos/core/error.hpp"

namespace mos::planning {

namespace {

constexpr grid2::Action2 kMotions[3] = {grid2::Action2::kMoveAhead,
                                        grid2::Action2::kRotateLeft,
                                        grid2::Action2::kRotateRight};

int pose_key(const grid2::RobotPose& p, int width) {
    return (p.pos.y * width + p.pos.x) * grid2::kHeadings + p.dir;
}

// Chebyshev distance underestimates 8-connected unit moves and ignores
// rotations entirely, so it is admissible.
int heuristic(const grid2::RobotPose& p, const GridPoint& goal) {
    return std::max(std::abs(p.pos.x - goal.x), std::abs(p.pos.y - goal.y));
}

}  // namespace

std::vector<grid2::Action2> astar_navigate(const grid2::GridMap2& map,
                                           const grid2::RobotPose& start,
                                           const GridPoint& goal,
                                           std::optional<int> goal_dir,
                                           int rotate_step) {
    if (!map.free(start.pos))
        throw Unreachable("navigation start is not on free space");
    if (!map.free(goal)) throw Unreachable("navigation goal is not on free space");

    auto at_goal = [&](const grid2::RobotPose& p) {
        return p.pos.x == goal.x && p.pos.y == goal.y &&
               (!goal_dir || p.dir == *goal_dir);
    };
    if (at_goal(start)) return {};

    const int states = map.width() * map.height() * grid2::kHeadings;
    std::vector<int> best_g(states, -1);
    std::vector<int> came_from(states, -1);
    std::vector<grid2::Action2> came_by(states, grid2::Action2::kMoveAhead);

    // (f, g, key); the key makes expansion order deterministic.
    using Entry = std::tuple<int, int, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    auto decode = [&](int key) {
        grid2::RobotPose p;
        p.dir = key % grid2::kHeadings;
        const int cell = key / grid2::kHeadings;
        p.pos = {cell % map.width(), cell / map.width(), 0};
        return p;
    };

    const int start_key = pose_key(start, map.width());
    best_g[start_key] = 0;
    open.emplace(heuristic(start, goal), 0, start_key);

    while (!open.empty()) {
        const auto [f, gcost, key] = open.top();
        open.pop();
        if (gcost != best_g[key]) continue;  // stale entry
        const grid2::RobotPose p = decode(key);
        if (at_goal(p)) {
            std::vector<grid2::Action2> path;
            for (int k = key; came_from[k] != -1; k = came_from[k])
                path.push_back(came_by[k]);
            std::reverse(path.begin(), path.end());
            return path;
        }
        for (const auto a : kMotions) {
            const grid2::RobotPose q = grid2::apply_move(p, a, map, rotate_step);
            if (q == p) continue;  // blocked move or identity rotation
            const int qkey = pose_key(q, map.width());
            const int ng = gcost + 1;
            if (best_g[qkey] != -1 && best_g[qkey] <= ng) continue;
            best_g[qkey] = ng;
            came_from[qkey] = key;
            came_by[qkey] = a;
            open.emplace(ng + heuristic(q, goal), ng, qkey);
        }
    }
    throw Unreachable("no action sequence reaches the navigation goal");
}

}  // namespace mos::planning
