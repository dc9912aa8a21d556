#include <doctest.h>

#include <map>
#include <set>
#include <vector>

#include "mos/octree/octree_belief.hpp"

using namespace mos;
using namespace mos::octree;

namespace {

// ---------------------------------------------------------------------------
// Independent oracle: a dense m^3 array with the same probabilistic
// semantics, no tree structure anywhere.
// ---------------------------------------------------------------------------
struct FlatBelief {
    int m;
    std::vector<double> v;  // ground values, index (z*m + y)*m + x

    explicit FlatBelief(int dim) : m(dim), v(static_cast<std::size_t>(dim) * dim * dim, 0.0) {}

    double& at(const GridPoint& g) { return v[(static_cast<std::size_t>(g.z) * m + g.y) * m + g.x]; }
    double at(const GridPoint& g) const {
        return v[(static_cast<std::size_t>(g.z) * m + g.y) * m + g.x];
    }

    double node_value(const NodeId& n) const {
        const int w = 1 << n.level;
        double s = 0.0;
        for (int z = n.z * w; z < (n.z + 1) * w; ++z)
            for (int y = n.y * w; y < (n.y + 1) * w; ++y)
                for (int x = n.x * w; x < (n.x + 1) * w; ++x) s += at({x, y, z});
        return s;
    }

    double normalizer() const {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }

    static FlatBelief init(int dim, const std::vector<GridPoint>& cells,
                           std::vector<PriorEntry> prior) {
        FlatBelief f(dim);
        for (const auto& c : cells) f.at(c) = 1.0;
        std::stable_sort(prior.begin(), prior.end(),
                         [](const PriorEntry& a, const PriorEntry& b) {
                             return a.node.level < b.node.level;
                         });
        for (const auto& p : prior) {
            const double cur = f.node_value(p.node);
            if (cur <= 0.0) continue;
            const double factor = p.value / cur;
            const int w = 1 << p.node.level;
            for (int z = p.node.z * w; z < (p.node.z + 1) * w; ++z)
                for (int y = p.node.y * w; y < (p.node.y + 1) * w; ++y)
                    for (int x = p.node.x * w; x < (p.node.x + 1) * w; ++x)
                        f.at({x, y, z}) *= factor;
        }
        return f;
    }
};

void compare_all_levels(const OctreeBelief& tree, const FlatBelief& flat,
                        double tol = 1e-9) {
    REQUIRE(tree.normalizer() ==
            doctest::Approx(flat.normalizer()).epsilon(tol));
    for (int level = 0; level <= tree.levels(); ++level) {
        const int d = tree.dim() >> level;
        for (int z = 0; z < d; ++z)
            for (int y = 0; y < d; ++y)
                for (int x = 0; x < d; ++x) {
                    const NodeId n{level, x, y, z};
                    CAPTURE(level);
                    CAPTURE(x);
                    CAPTURE(y);
                    CAPTURE(z);
                    REQUIRE(tree.value(n) ==
                            doctest::Approx(flat.node_value(n)).epsilon(tol));
                }
    }
}

std::vector<GridPoint> all_cells(int m) {
    std::vector<GridPoint> out;
    for (int z = 0; z < m; ++z)
        for (int y = 0; y < m; ++y)
            for (int x = 0; x < m; ++x) out.push_back({x, y, z});
    return out;
}

}  // namespace

TEST_CASE("init: uniform prior over the full 2^3 grid gives exactly 1/8 per cell") {
    auto b = init_octree_belief_from_cells(2, all_cells(2), {});
    CHECK(b.normalizer() == 8.0);
    for (const auto& c : all_cells(2)) CHECK(b.prob(c) == 0.125);
    // Uniform tree prunes to a single stored root.
    CHECK(b.stored_nodes() == 1);
}

TEST_CASE("init: restricted region keeps zero mass outside it") {
    const std::vector<GridPoint> region{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
    auto b = init_octree_belief_from_cells(2, region, {});
    CHECK(b.normalizer() == 4.0);
    for (const auto& c : region) CHECK(b.prob(c) == 0.25);
    CHECK(b.prob(GridPoint{0, 0, 1}) == 0.0);
    CHECK(b.prob(GridPoint{1, 1, 1}) == 0.0);

    Rng rng(5);
    const std::set<GridPoint> region_set(region.begin(), region.end());
    for (int i = 0; i < 10000; ++i) CHECK(region_set.count(b.sample(rng)) == 1);
}

TEST_CASE("init: sampling wrapper respects the region and raises EmptyRegion") {
    Rng rng(11);
    auto region = [](const GridPoint& g) { return g.z == 0; };
    auto b = init_octree_belief(4, region, {}, 4000, {}, rng);
    double bottom = 0.0;
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) bottom += b.prob(GridPoint{x, y, 0});
    CHECK(bottom == doctest::Approx(1.0).epsilon(1e-12));

    Rng rng2(12);
    auto nowhere = [](const GridPoint&) { return false; };
    CHECK_THROWS_AS((void)init_octree_belief(4, nowhere, {}, 100, {}, rng2),
                    EmptyRegion);
}

TEST_CASE("occupancy prior: value is weight * (2^k)^3 per occupied node") {
    sensing::OccupancyGrid occ(8);
    occ.set({7, 7, 7});
    const auto prior = occupancy_prior(occ, 2, 100.0, false);
    REQUIRE(prior.size() == 1);
    CHECK(prior[0].node == NodeId{2, 1, 1, 1});
    CHECK(prior[0].value == 6400.0);  // 100 * (2^2)^3
}

TEST_CASE("occupancy prior: fill-height adds the whole column beneath") {
    // 4^3 grid at level 1: 2^3 nodes; occupied voxel (3,3,3) sits in node
    // (1,1,1), so fill-height adds (1,1,0).
    sensing::OccupancyGrid occ(4);
    occ.set({3, 3, 3});
    const auto plain = occupancy_prior(occ, 1, 50.0, false);
    REQUIRE(plain.size() == 1);
    CHECK(plain[0].node == NodeId{1, 1, 1, 1});
    CHECK(plain[0].value == 400.0);  // 50 * 8

    const auto filled = occupancy_prior(occ, 1, 50.0, true);
    REQUIRE(filled.size() == 2);
    CHECK(filled[0].node == NodeId{1, 1, 1, 0});
    CHECK(filled[1].node == NodeId{1, 1, 1, 1});
    for (const auto& e : filled) CHECK(e.value == 400.0);
}

TEST_CASE("init with occupancy prior: node value imposed exactly") {
    sensing::OccupancyGrid occ(4);
    occ.set({0, 0, 0});
    const auto prior = occupancy_prior(occ, 1, 100.0, false);
    REQUIRE(prior.size() == 1);
    CHECK(prior[0].value == 800.0);

    auto b = init_octree_belief_from_cells(4, all_cells(4), prior);
    CHECK(b.value(NodeId{1, 0, 0, 0}) == doctest::Approx(800.0).epsilon(1e-12));
    // Flat oracle agreement.
    auto f = FlatBelief::init(4, all_cells(4), prior);
    compare_all_levels(b, f);
    // Mass concentrates: the 8 cells under the prior node hold 800/856.
    CHECK(b.prob(NodeId{1, 0, 0, 0}) ==
          doctest::Approx(800.0 / 856.0).epsilon(1e-12));
}

TEST_CASE("volumetric update: labeled voxels scale, unlabeled are bit-identical") {
    auto b = init_octree_belief_from_cells(4, all_cells(4), {});
    const double before = b.value(GridPoint{3, 3, 3});

    VoxelLabels labels;
    labels.push_back({{0, 0, 0}, 7});          // hit for object 7
    labels.push_back({{1, 0, 0}, kFreeLabel});  // observed free
    labels.push_back({{2, 0, 0}, 4});          // another object counts as miss
    volumetric_update(b, labels, 7, 0.9);

    CHECK(b.value(GridPoint{0, 0, 0}) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(b.value(GridPoint{1, 0, 0}) ==
          doctest::Approx(0.1).epsilon(1e-12));
    CHECK(b.value(GridPoint{2, 0, 0}) ==
          doctest::Approx(0.1).epsilon(1e-12));
    // Unobserved voxel: exactly the same bits as before the update.
    CHECK(b.value(GridPoint{3, 3, 3}) == before);
    CHECK(b.normalizer() == doctest::Approx(64.0 - 3.0 + 0.9 + 0.2).epsilon(1e-12));
}

TEST_CASE("volumetric update: annihilating update throws and leaves belief intact") {
    auto b = init_octree_belief_from_cells(2, {{0, 0, 0}}, {});
    const std::string before = b.dump();
    VoxelLabels labels{{{0, 0, 0}, kFreeLabel}};
    CHECK_THROWS_AS(volumetric_update(b, labels, 3, 1.0), ZeroMass);
    CHECK(b.dump() == before);
}

TEST_CASE("random update sequences match the flat oracle at every level") {
    Rng rng(2024);
    for (int m : {2, 4, 8}) {
        for (int trial = 0; trial < 8; ++trial) {
            // Random subset of cells as the sampled region.
            std::vector<GridPoint> cells;
            for (const auto& c : all_cells(m))
                if (rng.bernoulli(0.6)) cells.push_back(c);
            if (cells.empty()) cells.push_back({0, 0, 0});

            // Random priors at random levels.
            int max_level = 0;
            for (int d = m; d > 1; d >>= 1) ++max_level;
            std::vector<PriorEntry> prior;
            const int np = static_cast<int>(rng.uniform_index(3));
            for (int i = 0; i < np; ++i) {
                int level = 1 + static_cast<int>(rng.uniform_index(
                                static_cast<std::uint64_t>(max_level)));
                const int d = m >> level;
                NodeId n{level, static_cast<int>(rng.uniform_index(d)),
                         static_cast<int>(rng.uniform_index(d)),
                         static_cast<int>(rng.uniform_index(d))};
                prior.push_back({n, rng.uniform(1.0, 500.0)});
            }

            auto tree = init_octree_belief_from_cells(m, cells, prior);
            auto flat = FlatBelief::init(m, cells, prior);
            compare_all_levels(tree, flat);

            // A few random multiplicative updates (alpha in (0,1)).
            for (int u = 0; u < 5; ++u) {
                const double alpha = rng.uniform(0.55, 0.95);
                VoxelLabels labels;
                for (const auto& c : all_cells(m)) {
                    if (!rng.bernoulli(0.2)) continue;  // FOV subset
                    labels.push_back({c, rng.bernoulli(0.3) ? 1 : kFreeLabel});
                }
                try {
                    volumetric_update(tree, labels, 1, alpha);
                    for (const auto& [c, label] : labels)
                        flat.at(c) *= (label == 1) ? alpha : 1.0 - alpha;
                } catch (const ZeroMass&) {
                    // Oracle agrees nothing changed.
                }
                compare_all_levels(tree, flat);
            }
        }
    }
}

TEST_CASE("sample: frequencies follow the stored masses") {
    auto b = init_octree_belief_from_cells(
        4, {{0, 0, 0}, {3, 0, 0}, {0, 3, 0}}, {});
    b.set_ground({0, 0, 0}, 0.5);
    b.set_ground({3, 0, 0}, 0.3);
    b.set_ground({0, 3, 0}, 0.2);
    Rng rng(77);
    std::map<GridPoint, int> counts;
    const int n = 100000;
    for (int i = 0; i < n; ++i) counts[b.sample(rng)]++;
    CHECK(counts[{0, 0, 0}] / double(n) == doctest::Approx(0.5).epsilon(0.02));
    CHECK(counts[{3, 0, 0}] / double(n) == doctest::Approx(0.3).epsilon(0.03));
    CHECK(counts[{0, 3, 0}] / double(n) == doctest::Approx(0.2).epsilon(0.04));
}

TEST_CASE("sample: pruned uniform tree is uniform over all cells") {
    auto b = init_octree_belief_from_cells(4, all_cells(4), {});
    b.prune();
    CHECK(b.stored_nodes() == 1);
    Rng rng(99);
    std::map<GridPoint, int> counts;
    const int n = 64000;
    for (int i = 0; i < n; ++i) counts[b.sample(rng)]++;
    for (const auto& c : all_cells(4))
        CHECK(counts[c] / double(n) == doctest::Approx(1.0 / 64).epsilon(0.35));
}

TEST_CASE("dump/parse: exact round trip") {
    Rng rng(4);
    std::vector<GridPoint> cells;
    for (const auto& c : all_cells(8))
        if (rng.bernoulli(0.3)) cells.push_back(c);
    auto b = init_octree_belief_from_cells(
        8, cells, {{NodeId{1, 0, 0, 0}, 123.456}});
    VoxelLabels labels{{cells.front(), 2}};
    volumetric_update(b, labels, 2, 0.9);

    const std::string text = b.dump();
    auto b2 = OctreeBelief::parse(text, 8);
    CHECK(b2.dump() == text);
    for (const auto& c : all_cells(8)) CHECK(b.value(c) == b2.value(c));
    CHECK(b.normalizer() == b2.normalizer());
}

TEST_CASE("prune preserves queries while shrinking storage") {
    auto b = init_octree_belief_from_cells(4, all_cells(4), {});
    // Force a full materialization by touching one cell, then undo it.
    b.set_ground({0, 0, 0}, 2.0);
    b.set_ground({0, 0, 0}, 1.0);
    const auto before_nodes = b.stored_nodes();
    std::map<GridPoint, double> vals;
    for (const auto& c : all_cells(4)) vals[c] = b.value(c);
    b.prune();
    CHECK(b.stored_nodes() < before_nodes);
    for (const auto& c : all_cells(4)) CHECK(b.value(c) == vals[c]);
}
