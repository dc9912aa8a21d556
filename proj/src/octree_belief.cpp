#include "mos/octree/octree_belief.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <set>
#include <sstream>
#include <tuple>

namespace mos::octree {

namespace {

int log2_exact(int dim) {
    int l = 0, d = dim;
    while (d > 1) {
        if (d % 2 != 0)
            throw InvalidConfig("octree dimension must be a power of two");
        d /= 2;
        ++l;
    }
    return l;
}

// Octant of the level-(l-1) child of a level-l ancestor along the path to a
// target node; bit b of each coordinate selects the axis half.
int octant_of(int x, int y, int z, int bit) {
    return ((x >> bit) & 1) | (((y >> bit) & 1) << 1) | (((z >> bit) & 1) << 2);
}

double pow8(int k) {
    double v = 1.0;
    while (k-- > 0) v *= 8.0;
    return v;
}

}  // namespace

OctreeBelief::OctreeBelief(int dim)
    : dim_(dim), levels_(log2_exact(dim)), root_(std::make_unique<Node>()) {
    if (dim < 1) throw InvalidConfig("octree dimension must be positive");
}

void OctreeBelief::check_node(const NodeId& n) const {
    if (n.level < 0 || n.level > levels_)
        throw InvalidConfig("octree level out of range");
    const int d = dim_ >> n.level;
    if (n.x < 0 || n.y < 0 || n.z < 0 || n.x >= d || n.y >= d || n.z >= d)
        throw InvalidConfig("octree node out of range");
}

double OctreeBelief::value(const NodeId& n) const {
    check_node(n);
    const Node* cur = root_.get();
    for (int level = levels_; level > n.level; --level) {
        if (!cur->has_children())
            return cur->value / pow8(level - n.level);
        const int oct = octant_of(n.x, n.y, n.z, level - 1 - n.level);
        const Node* next = cur->child[oct].get();
        if (!next) return 0.0;
        cur = next;
    }
    return cur->value;
}

double OctreeBelief::prob(const NodeId& n) const {
    const double norm = normalizer();
    if (norm <= 0.0) throw EmptyBelief("octree belief has zero normalizer");
    return value(n) / norm;
}

OctreeBelief::Node* OctreeBelief::materialize_ground(const GridPoint& g,
                                                     std::vector<Node*>* path) {
    check_node(NodeId{0, g.x, g.y, g.z});
    Node* cur = root_.get();
    for (int level = levels_; level > 0; --level) {
        if (path) path->push_back(cur);
        if (!cur->has_children() && cur->value > 0.0) {
            // Split a uniform leaf: all eight children materialize with an
            // equal share so queries are unchanged.
            const double share = cur->value / 8.0;
            for (auto& c : cur->child) {
                c = std::make_unique<Node>();
                c->value = share;
            }
        }
        const int oct = octant_of(g.x, g.y, g.z, level - 1);
        if (!cur->child[oct]) cur->child[oct] = std::make_unique<Node>();
        cur = cur->child[oct].get();
    }
    return cur;
}

void OctreeBelief::set_ground(const GridPoint& g, double v) {
    if (v < 0.0) throw InvalidConfig("octree values must be nonnegative");
    std::vector<Node*> path;
    Node* leaf = materialize_ground(g, &path);
    const double delta = v - leaf->value;
    leaf->value = v;
    for (Node* a : path) a->value += delta;
}

void OctreeBelief::multiply_ground(const GridPoint& g, double factor) {
    if (factor < 0.0) throw InvalidConfig("octree factors must be nonnegative");
    const double cur = value(g);
    if (cur == 0.0) return;  // zero mass stays zero; no need to materialize
    set_ground(g, cur * factor);
}

void OctreeBelief::rescale_subtree(const NodeId& n, double target) {
    check_node(n);
    if (target < 0.0) throw InvalidConfig("octree values must be nonnegative");
    // Walk down to the node, materializing uniform leaves along the way.
    std::vector<Node*> path;
    Node* cur = root_.get();
    for (int level = levels_; level > n.level; --level) {
        path.push_back(cur);
        if (!cur->has_children() && cur->value > 0.0) {
            const double share = cur->value / 8.0;
            for (auto& c : cur->child) {
                c = std::make_unique<Node>();
                c->value = share;
            }
        }
        const int oct = octant_of(n.x, n.y, n.z, level - 1 - n.level);
        if (!cur->child[oct]) cur->child[oct] = std::make_unique<Node>();
        cur = cur->child[oct].get();
    }
    if (cur->value <= 0.0)
        throw ZeroMass("cannot rescale a zero-mass subtree");
    const double factor = target / cur->value;
    const double delta = target - cur->value;
    // Scale the whole stored subtree.
    std::vector<Node*> stack{cur};
    while (!stack.empty()) {
        Node* node = stack.back();
        stack.pop_back();
        node->value *= factor;
        for (auto& c : node->child)
            if (c) stack.push_back(c.get());
    }
    for (Node* a : path) a->value += delta;
}

GridPoint OctreeBelief::sample(Rng& rng) const {
    if (normalizer() <= 0.0) throw EmptyBelief("octree belief has zero normalizer");
    const Node* cur = root_.get();  // null once descent passes a leaf
    int x = 0, y = 0, z = 0;
    for (int level = levels_; level > 0; --level) {
        int oct;
        if (cur && cur->has_children()) {
            const double u = rng.uniform() * cur->value;
            double acc = 0.0;
            oct = -1;
            for (int i = 0; i < 8; ++i) {
                const double w = cur->child[i] ? cur->child[i]->value : 0.0;
                if (w <= 0.0) continue;
                acc += w;
                oct = i;  // remember last positive child for CDF rounding
                if (u < acc) break;
            }
            if (oct < 0) throw EmptyBelief("internal node without positive children");
            cur = cur->child[oct].get();
        } else {
            // At or below a uniform leaf: every octant is equally likely.
            oct = static_cast<int>(rng.uniform_index(8));
            cur = nullptr;
        }
        x = 2 * x + (oct & 1);
        y = 2 * y + ((oct >> 1) & 1);
        z = 2 * z + ((oct >> 2) & 1);
    }
    return {x, y, z};
}

GridPoint OctreeBelief::argmax_cell() const {
    if (normalizer() <= 0.0) throw EmptyBelief("octree belief has zero normalizer");
    double best = -1.0;
    GridPoint best_cell{0, 0, 0};
    // A stored leaf at level l puts value/8^l on each cell it covers; its
    // lowest cell is the (x<<l, y<<l, z<<l) corner, which is also the tie
    // representative for the whole leaf.
    std::function<void(const Node&, NodeId)> rec = [&](const Node& n, NodeId id) {
        if (n.has_children()) {
            for (int o = 0; o < 8; ++o) {
                if (!n.child[o]) continue;
                rec(*n.child[o], NodeId{id.level - 1, 2 * id.x + (o & 1),
                                        2 * id.y + ((o >> 1) & 1),
                                        2 * id.z + ((o >> 2) & 1)});
            }
            return;
        }
        if (n.value <= 0.0) return;
        double per = n.value;
        for (int l = 0; l < id.level; ++l) per /= 8.0;
        const GridPoint cell{id.x << id.level, id.y << id.level, id.z << id.level};
        if (per > best || (per == best && cell < best_cell)) {
            best = per;
            best_cell = cell;
        }
    };
    rec(*root_, NodeId{levels_, 0, 0, 0});
    return best_cell;
}

void OctreeBelief::prune() {
    std::function<bool(Node&)> rec = [&](Node& n) -> bool {
        // Returns true if n is (now) a leaf.
        if (!n.has_children()) return true;
        bool all_leaves = true;
        for (auto& c : n.child) {
            if (!c) {
                all_leaves = false;
                continue;
            }
            if (!rec(*c)) all_leaves = false;
        }
        if (!all_leaves) return false;
        const double v0 = n.child[0] ? n.child[0]->value : -1.0;
        for (const auto& c : n.child)
            if (!c || c->value != v0) return false;
        for (auto& c : n.child) c.reset();
        return true;
    };
    rec(*root_);
}

std::size_t OctreeBelief::stored_nodes() const {
    std::size_t count = 0;
    for_each_stored([&](const NodeId&, double, bool) { ++count; });
    return count;
}

void OctreeBelief::for_each_stored(
    const std::function<void(const NodeId&, double, bool)>& fn) const {
    std::function<void(const Node&, const NodeId&)> rec = [&](const Node& n,
                                                              const NodeId& id) {
        fn(id, n.value, !n.has_children());
        if (id.level == 0) return;
        for (int o = 0; o < 8; ++o) {
            if (!n.child[o]) continue;
            rec(*n.child[o], NodeId{id.level - 1, 2 * id.x + (o & 1),
                                    2 * id.y + ((o >> 1) & 1),
                                    2 * id.z + ((o >> 2) & 1)});
        }
    };
    rec(*root_, NodeId{levels_, 0, 0, 0});
}

std::string OctreeBelief::dump() const {
    std::string out;
    char buf[96];
    for_each_stored([&](const NodeId& id, double v, bool) {
        std::snprintf(buf, sizeof buf, "%d %d %d %d %.17g\n", id.level, id.x, id.y,
                      id.z, v);
        out += buf;
    });
    return out;
}

OctreeBelief OctreeBelief::parse(const std::string& text, int dim) {
    OctreeBelief b(dim);
    std::istringstream in(text);
    std::string line;
    bool saw_root = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        NodeId id;
        double v;
        if (std::sscanf(line.c_str(), "%d %d %d %d %lg", &id.level, &id.x, &id.y,
                        &id.z, &v) != 5)
            throw InvalidConfig("bad octree dump line: " + line);
        b.check_node(id);
        if (id.level == b.levels_) {
            b.root_->value = v;
            saw_root = true;
            continue;
        }
        // Insert the node directly; dumps list parents before children.
        Node* cur = b.root_.get();
        for (int level = b.levels_; level > id.level; --level) {
            const int oct = octant_of(id.x, id.y, id.z, level - 1 - id.level);
            if (!cur->child[oct]) cur->child[oct] = std::make_unique<Node>();
            cur = cur->child[oct].get();
        }
        cur->value = v;
    }
    if (!saw_root) throw InvalidConfig("octree dump missing root line");
    return b;
}

OctreeBelief init_octree_belief(int dim,
                                const std::function<bool(const GridPoint&)>& region,
                                const std::vector<PriorEntry>& prior,
                                int num_samples, const SampleBox& box, Rng& rng) {
    const int sx = box.sx > 0 ? box.sx : dim;
    const int sy = box.sy > 0 ? box.sy : dim;
    const int sz = box.sz > 0 ? box.sz : dim;
    std::set<GridPoint> cells;
    for (int i = 0; i < num_samples; ++i) {
        const GridPoint c{box.min.x + static_cast<int>(rng.uniform_index(sx)),
                          box.min.y + static_cast<int>(rng.uniform_index(sy)),
                          box.min.z + static_cast<int>(rng.uniform_index(sz))};
        if (region(c)) cells.insert(c);
    }
    return init_octree_belief_from_cells(
        dim, std::vector<GridPoint>(cells.begin(), cells.end()), prior);
}

OctreeBelief init_octree_belief_from_cells(int dim,
                                           const std::vector<GridPoint>& cells,
                                           const std::vector<PriorEntry>& prior) {
    if (cells.empty())
        throw EmptyRegion("no sample landed inside the search region");

    OctreeBelief belief(dim);
    for (const auto& c : cells) belief.set_ground(c, 1.0);

    // Deepest nodes first so outer rescaling preserves inner ratios.
    std::vector<PriorEntry> sorted = prior;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const PriorEntry& a, const PriorEntry& b) {
                         return a.node.level < b.node.level;
                     });
    for (const auto& p : sorted) {
        if (belief.value(p.node) <= 0.0) continue;  // prior outside sampled region
        belief.rescale_subtree(p.node, p.value);
    }
    belief.prune();
    return belief;
}

std::vector<PriorEntry> occupancy_prior(const sensing::OccupancyGrid& occ,
                                        int level, double weight,
                                        bool fill_height) {
    if (level < 0 || level > occ.levels())
        throw InvalidConfig("occupancy prior level out of range");
    const int d = occ.dim() >> level;
    const double value = weight * pow8(level);
    std::vector<PriorEntry> out;
    std::vector<std::vector<std::uint8_t>> mark(
        static_cast<std::size_t>(d), std::vector<std::uint8_t>(d * d, 0));
    for (int z = 0; z < d; ++z)
        for (int y = 0; y < d; ++y)
            for (int x = 0; x < d; ++x) {
                if (!occ.occupied_at(level, {x, y, z})) continue;
                const int zlo = fill_height ? 0 : z;
                for (int zz = zlo; zz <= z; ++zz) {
                    auto& m = mark[zz][y * d + x];
                    if (m) continue;
                    m = 1;
                    out.push_back({NodeId{level, x, y, zz}, value});
                }
            }
    // Deterministic order: by (level implicit), z, y, x.
    std::sort(out.begin(), out.end(), [](const PriorEntry& a, const PriorEntry& b) {
        return std::tie(a.node.z, a.node.y, a.node.x) <
               std::tie(b.node.z, b.node.y, b.node.x);
    });
    return out;
}

void volumetric_update(OctreeBelief& belief, const VoxelLabels& labels,
                       int object_id, double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw InvalidConfig("alpha must be in [0,1]");
    // Dry pass: ensure some mass survives before mutating anything.
    double removed = 0.0, added = 0.0;
    for (const auto& [g, label] : labels) {
        const double v = belief.value(g);
        if (v == 0.0) continue;
        const double f = (label == object_id) ? alpha : 1.0 - alpha;
        removed += v;
        added += v * f;
    }
    if (belief.normalizer() - removed + added <= 0.0)
        throw ZeroMass("volumetric update would annihilate the belief");
    for (const auto& [g, label] : labels) {
        const double f = (label == object_id) ? alpha : 1.0 - alpha;
        belief.multiply_ground(g, f);
    }
}

}  // namespace mos::octree
