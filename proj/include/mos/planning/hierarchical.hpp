#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mos/core/grid.hpp"
#include "mos/core/rng.hpp"
#include "mos/grid2/belief2.hpp"
#include "mos/grid2/domain.hpp"
#include "mos/planning/pouct.hpp"
#include "mos/planning/topo.hpp"

namespace mos::planning {

// High-level action: commit to a place on the topological graph, search the
// current place with primitive motions, or declare.
struct Subgoal {
    enum Kind { kNavigate = 0, kSearchLocal = 1, kDone = 2 };
    Kind kind = kSearchLocal;
    int node = -1;  // kNavigate destination, index into the graph

    friend bool operator==(const Subgoal&, const Subgoal&) = default;
};

// Subgoal-level state keeps the true viewpoint, not just the graph node:
// declares must be judged where the robot actually stands, otherwise a node
// adjacent to the believed target makes Done look free while the robot is
// still en route.  node is -1 while the pose is off the graph.
struct TopoState {
    grid2::RobotPose pose;
    int node = -1;
    GridPoint target;
    bool done = false;

    friend bool operator==(const TopoState&, const TopoState&) = default;
};

// Subgoal-level search POMDP over a topological graph.  Completing a
// navigation subgoal teleports the viewpoint to the destination node facing
// the target; the reward charges one primitive step cost per move of the
// shortest grid path.  Each subgoal is one tree level, so the discount is
// applied once per subgoal rather than once per primitive step.
class TopoDomain {
public:
    using State = TopoState;
    using Action = Subgoal;
    using Observation = grid2::SearchObservation;
    using ObsHash = grid2::SearchObservationHash;

    // root_moves[j] is the grid path length from the robot's current cell to
    // node j; nearest_node anchors the action set of off-graph states.
    TopoDomain(const grid2::GridMap2& map, const grid2::SearchConfig& cfg,
               const TopoGraph& graph, const std::vector<std::vector<int>>& moves,
               const std::vector<int>& root_moves, int nearest_node)
        : map_(&map), cfg_(&cfg), graph_(&graph), moves_(&moves),
          root_moves_(&root_moves), nearest_(nearest_node) {}

    std::vector<Subgoal> actions(const TopoState& s) const;
    planning::Outcome<TopoState, grid2::SearchObservation> step(const TopoState& s,
                                                                const Subgoal& a,
                                                                Rng& rng) const;
    double discount() const { return cfg_->discount; }
    bool terminal(const TopoState& s) const { return s.done; }

    grid2::RobotPose viewpoint(int node, const GridPoint& target) const;

private:
    const grid2::GridMap2* map_;
    const grid2::SearchConfig* cfg_;
    const TopoGraph* graph_;
    const std::vector<std::vector<int>>* moves_;
    const std::vector<int>* root_moves_;
    int nearest_ = 0;
};

// Shortest 8-connected path length in moves from one cell to each node;
// unreachable nodes get a large sentinel cost.
std::vector<int> cell_moves_to_nodes(const grid2::GridMap2& map,
                                     const GridPoint& from,
                                     const std::vector<GridPoint>& nodes);

// Shortest 8-connected path length in moves between every pair of graph
// nodes; unreachable pairs get a large sentinel cost.
std::vector<std::vector<int>> node_path_moves(const grid2::GridMap2& map,
                                              const std::vector<GridPoint>& nodes);

// Planner budgets sized for the shallow subgoal tree and the deeper
// primitive tree, with UCB exploration matched to the declare rewards.
PouctConfig topo_pouct_defaults();
PouctConfig local_pouct_defaults();

struct HierarchicalConfig {
    grid2::SearchConfig model;
    TopoParams topo;
    PouctConfig high = topo_pouct_defaults();
    PouctConfig low = local_pouct_defaults();
};

struct HierStep {
    grid2::Action2 action = grid2::Action2::kFind;
    Subgoal subgoal;
    bool subgoal_changed = false;
    bool graph_resampled = false;
};

// Closed-loop two-level search agent.  Every step replans the subgoal over
// the (possibly resampled) topological graph, then delegates to A* for
// navigation subgoals or to a primitive-level planner for local search.
// Both levels read the single belief held here.
class HierarchicalAgent {
public:
    HierarchicalAgent(const grid2::GridMap2& map, const grid2::RobotPose& start,
                      HierarchicalConfig cfg, std::uint64_t seed);

    HierStep plan_step();
    void update(grid2::Action2 a, const grid2::SearchObservation& z);

    const grid2::Belief2& belief() const { return belief_; }
    void set_belief(grid2::Belief2 b) { belief_ = std::move(b); }
    const grid2::RobotPose& pose() const { return pose_; }
    // For callers that track the pose externally (e.g. a platform reporting
    // odometry) instead of driving update().
    void set_pose(const grid2::RobotPose& p) { pose_ = p; }
    const TopoGraph& graph() const { return graph_; }
    const Subgoal& subgoal() const { return subgoal_; }
    bool done() const { return done_; }

private:
    void ensure_graph(HierStep& out);

    const grid2::GridMap2* map_;
    HierarchicalConfig cfg_;
    std::vector<GridPoint> poses_;
    grid2::Belief2 belief_;
    grid2::RobotPose pose_;
    TopoGraph graph_;
    std::vector<std::vector<int>> moves_;
    Subgoal subgoal_;
    bool have_subgoal_ = false;
    bool done_ = false;
    Rng rng_;
};

}  // namespace mos::planning
