#include "mos/planning/hierarchical.hpp"

#include <algorithm>
#include <deque>
#include <limits>

#include "mos/core/error.hpp"
#include "mos/planning/navigate.hpp"

namespace mos::planning {

namespace {
constexpr int kUnreachableMoves = 1 << 20;
}

PouctConfig topo_pouct_defaults() {
    PouctConfig c;
    c.num_sims = 200;
    c.max_depth = 10;
    c.rmax = 1000.0;
    c.rmin = -1000.0;
    return c;
}

PouctConfig local_pouct_defaults() {
    PouctConfig c;
    c.num_sims = 300;
    c.max_depth = 15;
    c.rmax = 1000.0;
    c.rmin = -1000.0;
    return c;
}

std::vector<Subgoal> TopoDomain::actions(const TopoState& s) const {
    std::vector<Subgoal> out;
    if (s.node >= 0) {
        for (int j : graph_->neighbors(s.node))
            out.push_back({Subgoal::kNavigate, j});
    } else {
        // Off the graph: reach for the nearest node or look one hop past it.
        out.push_back({Subgoal::kNavigate, nearest_});
        for (int j : graph_->neighbors(nearest_))
            out.push_back({Subgoal::kNavigate, j});
    }
    out.push_back({Subgoal::kSearchLocal, -1});
    out.push_back({Subgoal::kDone, -1});
    return out;
}

grid2::RobotPose TopoDomain::viewpoint(int node, const GridPoint& target) const {
    const GridPoint& pos = graph_->nodes[node];
    return {pos, grid2::facing_dir(pos, target, 0)};
}

planning::Outcome<TopoState, grid2::SearchObservation> TopoDomain::step(
    const TopoState& s, const Subgoal& a, Rng& rng) const {
    TopoState next = s;
    double reward = 0.0;
    switch (a.kind) {
        case Subgoal::kDone:
            next.done = true;
            reward = grid2::target_found(s.pose, s.target, *cfg_)
                         ? cfg_->find_reward
                         : cfg_->find_penalty;
            break;
        case Subgoal::kSearchLocal:
            reward = cfg_->step_cost;
            break;
        case Subgoal::kNavigate: {
            const int moves = s.node >= 0 ? (*moves_)[s.node][a.node]
                                          : (*root_moves_)[a.node];
            next.node = a.node;
            next.pose = viewpoint(a.node, s.target);
            reward = cfg_->step_cost * std::max(1, moves);
            break;
        }
    }
    auto z = grid2::sample_search_observation(
        *map_, *cfg_, grid2::to_pose2(next.pose), next.target, rng);
    return {next, std::move(z), reward};
}

std::vector<int> cell_moves_to_nodes(const grid2::GridMap2& map,
                                     const GridPoint& from,
                                     const std::vector<GridPoint>& nodes) {
    // 8-connected BFS over free cells.
    std::vector<int> dist(static_cast<std::size_t>(map.width()) * map.height(),
                          -1);
    auto idx = [&](const GridPoint& g) {
        return static_cast<std::size_t>(g.y) * map.width() + g.x;
    };
    std::deque<GridPoint> queue;
    if (map.free(from)) {
        dist[idx(from)] = 0;
        queue.push_back(from);
    }
    while (!queue.empty()) {
        const GridPoint c = queue.front();
        queue.pop_front();
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const GridPoint q{c.x + dx, c.y + dy, 0};
                if (!map.free(q) || dist[idx(q)] != -1) continue;
                dist[idx(q)] = dist[idx(c)] + 1;
                queue.push_back(q);
            }
    }
    std::vector<int> out(nodes.size(), kUnreachableMoves);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const int d = dist[idx(nodes[j])];
        if (d >= 0) out[j] = d;
    }
    return out;
}

std::vector<std::vector<int>> node_path_moves(const grid2::GridMap2& map,
                                              const std::vector<GridPoint>& nodes) {
    std::vector<std::vector<int>> out;
    out.reserve(nodes.size());
    for (const auto& node : nodes)
        out.push_back(cell_moves_to_nodes(map, node, nodes));
    return out;
}

HierarchicalAgent::HierarchicalAgent(const grid2::GridMap2& map,
                                     const grid2::RobotPose& start,
                                     HierarchicalConfig cfg, std::uint64_t seed)
    : map_(&map), cfg_(std::move(cfg)), poses_(map.free_cells()),
      belief_(grid2::Belief2::uniform(map)), pose_(start), rng_(seed) {}

void HierarchicalAgent::ensure_graph(HierStep& out) {
    if (!graph_.nodes.empty() &&
        topo_coverage(graph_, poses_, belief_, cfg_.model.res) >=
            cfg_.topo.resample_threshold)
        return;
    graph_ = sample_topo_graph(poses_, belief_, cfg_.model.res, cfg_.topo, rng_);
    moves_ = node_path_moves(*map_, graph_.nodes);
    out.graph_resampled = true;
}

HierStep HierarchicalAgent::plan_step() {
    HierStep out;
    ensure_graph(out);

    // Locate the robot on the graph: its node when it stands on one, else
    // the nearest node anchors the available navigation subgoals.
    int root_node = -1, nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < graph_.nodes.size(); ++i) {
        if (graph_.nodes[i] == pose_.pos) root_node = static_cast<int>(i);
        const double dx = graph_.nodes[i].x - pose_.pos.x;
        const double dy = graph_.nodes[i].y - pose_.pos.y;
        const double d = dx * dx + dy * dy;
        if (d < best) {
            best = d;
            nearest = static_cast<int>(i);
        }
    }
    const auto root_moves = cell_moves_to_nodes(*map_, pose_.pos, graph_.nodes);

    TopoDomain high(*map_, cfg_.model, graph_, moves_, root_moves, nearest);
    Pouct<TopoDomain> high_planner(high, cfg_.high);
    const auto plan = high_planner.plan(
        [&](Rng& r) {
            return TopoState{pose_, root_node, belief_.sample(r), false};
        },
        rng_);

    out.subgoal = plan.action;
    out.subgoal_changed = !have_subgoal_ || !(plan.action == subgoal_);
    subgoal_ = plan.action;
    have_subgoal_ = true;

    switch (subgoal_.kind) {
        case Subgoal::kDone:
            out.action = grid2::Action2::kFind;
            return out;
        case Subgoal::kNavigate: {
            try {
                const auto path = astar_navigate(*map_, pose_,
                                                 graph_.nodes[subgoal_.node],
                                                 std::nullopt,
                                                 cfg_.model.rotate_step);
                if (!path.empty()) {
                    out.action = path.front();
                    return out;
                }
            } catch (const Unreachable&) {
                // Fall through to a local-search step.
            }
            break;
        }
        case Subgoal::kSearchLocal:
            break;
    }

    grid2::SearchDomain low(*map_, cfg_.model);
    Pouct<grid2::SearchDomain> low_planner(low, cfg_.low);
    const auto local = low_planner.plan(
        [&](Rng& r) {
            return grid2::SearchState{pose_, belief_.sample(r), false};
        },
        rng_);
    out.action = local.action;
    return out;
}

void HierarchicalAgent::update(grid2::Action2 a,
                               const grid2::SearchObservation& z) {
    if (a == grid2::Action2::kFind) {
        done_ = true;
        return;
    }
    pose_ = grid2::apply_move(pose_, a, *map_, cfg_.model.rotate_step);
    const auto vp = grid2::to_pose2(pose_);
    if (!z.detections.empty())
        grid2::detection_update(belief_, *map_, cfg_.model.res, vp,
                                cfg_.model.target_detector, z.detections[0]);
    for (std::size_t i = 0; i < cfg_.model.correlated.size(); ++i) {
        if (i + 1 >= z.detections.size()) break;
        const auto& cls = cfg_.model.correlated[i];
        grid2::correlated_update(belief_, *map_, cfg_.model.res, vp, cls.detector,
                                 cls.relation, z.detections[i + 1]);
    }
}

}  // namespace mos::planning
