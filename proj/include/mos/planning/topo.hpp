#pragma once

#include <vector>

#include "mos/core/grid.hpp"
#include "mos/core/rng.hpp"
#include "mos/grid2/belief2.hpp"
#include "mos/grid2/gridmap.hpp"

namespace mos::planning {

struct TopoParams {
    int max_nodes = 10;
    double d_sep = 1.0;  // meters, minimum pairwise node separation
    int zeta_min = 3;    // degree bounds, best effort on tiny graphs
    int zeta_max = 5;
    double resample_threshold = 0.5;
};

// Places the robot can commit to as navigation subgoals.  coverage[i] is the
// belief mass whose closest candidate pose is node i, at sampling time.
struct TopoGraph {
    std::vector<GridPoint> nodes;
    std::vector<std::pair<int, int>> edges;  // undirected, first < second
    std::vector<double> coverage;

    int degree(int i) const {
        int d = 0;
        for (const auto& [a, b] : edges) d += (a == i || b == i) ? 1 : 0;
        return d;
    }
    bool connected() const;
    std::vector<int> neighbors(int i) const;

    friend bool operator==(const TopoGraph&, const TopoGraph&) = default;
};

// Belief mass attributed to each pose: every target cell contributes its
// probability to the candidate pose closest to it (lowest row-major index on
// distance ties).
std::vector<double> pose_mass(const std::vector<GridPoint>& poses,
                              const grid2::Belief2& b_target, double res);

// Draws up to max_nodes poses by their attributed belief mass, rejecting
// any closer than d_sep to an accepted node, then fills remaining capacity
// from the leftover poses in row-major order.  Edges make the graph
// connected with degrees between zeta_min and zeta_max where the node count
// allows it.
TopoGraph sample_topo_graph(const std::vector<GridPoint>& poses,
                            const grid2::Belief2& b_target, double res,
                            const TopoParams& params, Rng& rng);

// Belief mass currently captured by the graph's nodes.
double topo_coverage(const TopoGraph& graph, const std::vector<GridPoint>& poses,
                     const grid2::Belief2& b_target, double res);

// Keeps the graph while its nodes capture at least resample_threshold of the
// belief (ties keep), otherwise samples a fresh one.
TopoGraph maybe_resample(TopoGraph graph, const std::vector<GridPoint>& poses,
                         const grid2::Belief2& b_target, double res,
                         const TopoParams& params, Rng& rng);

}  // namespace mos::planning
