#pragma once

#include <cstdint>
#include <vector>

#include "mos/core/grid.hpp"
#include "mos/core/rng.hpp"
#include "mos/octree/octree_belief.hpp"
#include "mos/sensing/frustum.hpp"
#include "mos/sensing/observation.hpp"
#include "mos/sensing/occupancy.hpp"

namespace mos::mos3d {

// Camera orientations are quantized to the 26 lattice directions (45 degree
// steps in each axis).  Index order follows (dz, dy, dx) ascending with the
// zero vector skipped, so index 0 is (-1,-1,-1) and index 25 is (1,1,1).
int quantize_dir(const Vec3& d);
Vec3 dir_vec(int dir);  // unit vector

struct Pose {
    GridPoint pos;
    int dir = 25;  // facing (1,1,1) by default

    friend bool operator==(const Pose&, const Pose&) = default;
};

// Full domain state: robot pose plus found-set, and the (sampled) ground
// cell of every object.  Objects are indexed 0..N-1; the found-set is a
// bitmask over those indices, so N <= 32.
struct Mos3dState {
    Pose robot;
    std::uint32_t found = 0;
    std::vector<GridPoint> objects;

    bool is_found(int id) const { return (found >> id) & 1u; }
    friend bool operator==(const Mos3dState&, const Mos3dState&) = default;
};

struct Mos3dAction {
    enum Kind { kMove, kFind };
    Kind kind = kFind;
    GridPoint target;  // Move only

    static Mos3dAction move(const GridPoint& g) { return {kMove, g}; }
    static Mos3dAction find() { return {kFind, {}}; }
    friend bool operator==(const Mos3dAction&, const Mos3dAction&) = default;
};

struct Mos3dConfig {
    double fov_deg = 60.0;
    double near_range = 0.0;
    double far_range = 10.0;  // grid cells
    double alpha = 0.9;       // per-object detector accuracy
    double find_reward = 100.0;
    double find_penalty = -100.0;
    double step_cost = -1.0;
    double discount = 0.99;
};

sensing::FrustumFov make_fov(const Pose& p, const Mos3dConfig& cfg);

// Belief-scored view position graph.  Node scores sum, over the given
// per-object beliefs, the probability mass of the level-`level` octree node
// containing the position; coarser levels make one node vouch for more
// space.
struct ViewPositionGraph {
    std::vector<GridPoint> nodes;
    std::vector<double> scores;                // parallel to nodes
    std::vector<std::pair<int, int>> edges;    // i < j
    int level = 0;

    int degree(int i) const;
    bool connected() const;
};

struct ViewGraphConfig {
    int k = 10;          // max node count
    double sep = 2.0;    // min pairwise node separation, grid cells
    int level = 2;       // octree level for scoring and coverage
    int max_degree = 4;
    double resample_threshold = 0.4;
};

using BeliefRefs = std::vector<const octree::OctreeBelief*>;

// Deterministic graph construction: every non-occupied cell is a candidate;
// candidates are ranked by score (position order on ties) and accepted
// greedily under the separation constraint until k nodes are kept, so every
// rejected candidate scores no higher than the node that displaced it.
// Edges are a shortest-first spanning tree densified up to max_degree.
// Throws NoFreeSpace when the occupancy leaves no candidate.
ViewPositionGraph sample_view_graph(const BeliefRefs& beliefs,
                                    const sensing::OccupancyGrid& occ,
                                    const ViewGraphConfig& cfg);

// Mean over beliefs of the probability mass inside the union of the graph
// nodes' level-`graph.level` octree cells.  Empty belief list counts as
// fully covered.
double covered_probability(const ViewPositionGraph& graph, const BeliefRefs& beliefs);

bool should_resample(const ViewPositionGraph& graph, const BeliefRefs& beliefs,
                     double threshold);

// Move relocates the robot to the target cell and orients it toward the
// nearest unfound object of s (Euclidean on cell centers, lowest id on
// ties).  Find adds every unfound object whose cell is visible from the
// current pose.  Objects never move.
Mos3dState transition(const Mos3dState& s, const Mos3dAction& a,
                      const sensing::OccupancyGrid& occ, const Mos3dConfig& cfg);

// Move: step_cost per voxel crossed along the straight-line path (at least
// one step, so reorienting in place still costs a step).  Find: find_reward
// per newly found object, find_penalty when none qualifies.
double reward(const Mos3dState& s, const Mos3dAction& a,
              const sensing::OccupancyGrid& occ, const Mos3dConfig& cfg);

// Bitmask of unfound objects of s visible from its current pose.
std::uint32_t find_mask(const Mos3dState& s, const sensing::OccupancyGrid& occ,
                        const Mos3dConfig& cfg);

// Likelihood of a volumetric observation given the state: voxels labeled
// with an object id contribute alpha when that object is there and
// (1 - alpha) otherwise; voxels labeled free contribute (1 - alpha) when an
// object is there and 1 otherwise; unlabeled (unknown) voxels contribute 1.
double observation_density(const sensing::VolumetricObservation& z,
                           const Mos3dState& s, double alpha);

// Baselines.  Both take Find when the last observation detected something;
// otherwise Greedy moves to the node nearest the most probable cell over
// the given beliefs, and Random moves to a uniformly drawn node.
Mos3dAction greedy_action(const BeliefRefs& beliefs, const ViewPositionGraph& graph,
                          bool detected);
Mos3dAction random_action(const ViewPositionGraph& graph, bool detected, Rng& rng);

}  // namespace mos::mos3d
