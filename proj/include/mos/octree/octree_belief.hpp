#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mos/core/error.hpp"
#include "mos/core/grid.hpp"
#include "mos/core/rng.hpp"
#include "mos/sensing/occupancy.hpp"

namespace mos::octree {

// Node address: integer coordinates at a resolution level.  Level 0 is the
// ground (finest) level; level log2(m) is the root.  A level-l node covers
// the (2^l)^3 ground voxels whose coordinates right-shifted by l equal its
// coordinates.
struct NodeId {
    int level = 0;
    int x = 0, y = 0, z = 0;

    friend bool operator==(const NodeId&, const NodeId&) = default;
    friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

// Sparse octree over nonnegative values representing an unnormalized
// distribution over ground voxels.  Storage rules:
//   - a stored node with children has value equal to the sum of its
//     children's values; an absent child of such a node carries zero mass;
//   - a stored node without children (a leaf) spreads its value uniformly
//     over the ground voxels it covers;
//   - the root is always stored, and its value is the normalizer.
// Queries at any level run in O(log m); so does sampling.
class OctreeBelief {
public:
    explicit OctreeBelief(int dim);

    int dim() const { return dim_; }
    int levels() const { return levels_; }  // root level

    double normalizer() const { return root_->value; }

    // Effective (unnormalized) value of a node at any level.
    double value(const NodeId& n) const;
    double value(const GridPoint& g) const { return value(NodeId{0, g.x, g.y, g.z}); }

    // Normalized probability mass of a node.
    double prob(const NodeId& n) const;
    double prob(const GridPoint& g) const { return prob(NodeId{0, g.x, g.y, g.z}); }

    void set_ground(const GridPoint& g, double v);
    void multiply_ground(const GridPoint& g, double factor);

    // Scales every value in the subtree rooted at `n` so the subtree total
    // becomes `target`; `n` must have positive mass.
    void rescale_subtree(const NodeId& n, double target);

    // Top-down proportional descent; throws EmptyBelief on zero normalizer.
    GridPoint sample(Rng& rng) const;

    // Ground cell of maximum probability; ties resolve to the lowest cell
    // in (x, y, z) order.  Throws EmptyBelief on zero normalizer.
    GridPoint argmax_cell() const;

    // Merges subtrees whose stored children are exactly-equal leaves; purely
    // a storage optimization, queries are unchanged.
    void prune();

    std::size_t stored_nodes() const;

    // One stored node per line, preorder, children in octant order:
    // "level x y z value" with value in %.17g (round-trips exactly).
    std::string dump() const;
    static OctreeBelief parse(const std::string& text, int dim);

    void for_each_stored(
        const std::function<void(const NodeId&, double, bool is_leaf)>& fn) const;

private:
    struct Node {
        double value = 0.0;
        std::array<std::unique_ptr<Node>, 8> child;
        bool has_children() const {
            for (const auto& c : child)
                if (c) return true;
            return false;
        }
    };

    void check_node(const NodeId& n) const;
    Node* materialize_ground(const GridPoint& g, std::vector<Node*>* path);

    int dim_;
    int levels_;
    std::unique_ptr<Node> root_;
};

// Prior specification: node values to impose after sampling-based
// initialization.  Values are in octree value units (a ground voxel counts
// as 1 under a uniform prior).
struct PriorEntry {
    NodeId node;
    double value = 0.0;
};

struct SampleBox {
    GridPoint min{0, 0, 0};
    int sx = 0, sy = 0, sz = 0;  // extent in cells; zero means whole grid
};

// Builds the initial belief over an irregular search region: draws
// num_samples ground cells uniformly from the box, keeps those inside the
// region, gives each kept cell value 1, imposes prior node values by
// rescaling their subtrees (deepest level first), prunes, and leaves the
// root value as the normalizer.  Cells never sampled carry zero mass, so
// the sample space is the sampled subset of the region.
// Throws EmptyRegion when no sample lands in the region.
OctreeBelief init_octree_belief(int dim,
                                const std::function<bool(const GridPoint&)>& region,
                                const std::vector<PriorEntry>& prior,
                                int num_samples, const SampleBox& box, Rng& rng);

// Deterministic core of the initializer: the kept cell set is given
// explicitly.  Throws EmptyRegion when `cells` is empty.
OctreeBelief init_octree_belief_from_cells(int dim,
                                           const std::vector<GridPoint>& cells,
                                           const std::vector<PriorEntry>& prior);

// Occupancy-derived prior: every occupied node at `level` gets value
// weight * (2^level)^3.  With fill_height, every node in the vertical
// column strictly beneath an occupied node gets the same value (objects
// rest on or hide under structure).
std::vector<PriorEntry> occupancy_prior(const sensing::OccupancyGrid& occ,
                                        int level, double weight,
                                        bool fill_height);

// Per-voxel label relevant to one object: the object id seen at a voxel, or
// kFree.  Voxels not listed are unobserved (occluded or out of view) and
// must remain untouched by the update.
inline constexpr int kFreeLabel = -1;
using VoxelLabels = std::vector<std::pair<GridPoint, int>>;

// Multiplicative volumetric update for one object's belief: voxels labeled
// with `object_id` scale by alpha, other labeled voxels by (1 - alpha).
// Throws ZeroMass if the update would annihilate the belief; the belief is
// untouched in that case.
void volumetric_update(OctreeBelief& belief, const VoxelLabels& labels,
                       int object_id, double alpha);

}  // namespace mos::octree
