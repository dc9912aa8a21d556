#pragma once

#include <optional>
#include <vector>

#include "mos/core/grid.hpp"
#include "mos/grid2/domain.hpp"
#include "mos/grid2/gridmap.hpp"

namespace mos::planning {

// Unit-cost A* over the primitive motion actions (MoveAhead and the two
// rotations).  Returns the optimal action sequence from the start pose to
// the goal position; an empty sequence means the start already satisfies the
// goal.  goal_dir, when set, additionally requires the final heading.
// Throws Unreachable when no action sequence reaches the goal.
std::vector<grid2::Action2> astar_navigate(const grid2::GridMap2& map,
                                           const grid2::RobotPose& start,
                                           const GridPoint& goal,
                                           std::optional<int> goal_dir,
                                           int rotate_step);

}  // namespace mos::planning
