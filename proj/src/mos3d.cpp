#include "mos/mos3d/mos3d.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "mos/core/error.hpp"
#include "mos/sensing/visibility.hpp"

namespace mos::mos3d {

using octree::NodeId;

namespace {

struct DirTable {
    Vec3 unit[26];
    int dx[26], dy[26], dz[26];

    DirTable() {
        int k = 0;
        for (int z = -1; z <= 1; ++z)
            for (int y = -1; y <= 1; ++y)
                for (int x = -1; x <= 1; ++x) {
                    if (x == 0 && y == 0 && z == 0) continue;
                    dx[k] = x;
                    dy[k] = y;
                    dz[k] = z;
                    unit[k] = Vec3(x, y, z).normalized();
                    ++k;
                }
    }
};

const DirTable& dirs() {
    static const DirTable t;
    return t;
}

}  // namespace

int quantize_dir(const Vec3& d) {
    const auto& t = dirs();
    int best = 0;
    double best_dot = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 26; ++i) {
        const double dot = d.dot(t.unit[i]);
        if (dot > best_dot) {
            best_dot = dot;
            best = i;
        }
    }
    return best;
}

Vec3 dir_vec(int dir) { return dirs().unit[dir]; }

sensing::FrustumFov make_fov(const Pose& p, const Mos3dConfig& cfg) {
    sensing::FrustumFov fov;
    fov.pos = p.pos.center();
    fov.orient = sensing::FrustumFov::look_at(fov.pos, fov.pos + dir_vec(p.dir));
    fov.fov_deg = cfg.fov_deg;
    fov.near_range = cfg.near_range;
    fov.far_range = cfg.far_range;
    return fov;
}

int ViewPositionGraph::degree(int i) const {
    int d = 0;
    for (const auto& [a, b] : edges)
        if (a == i || b == i) ++d;
    return d;
}

bool ViewPositionGraph::connected() const {
    if (nodes.empty()) return true;
    std::vector<int> comp(nodes.size(), -1);
    std::vector<int> stack{0};
    comp[0] = 0;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (const auto& [a, b] : edges) {
            const int v = (a == u) ? b : (b == u) ? a : -1;
            if (v >= 0 && comp[v] < 0) {
                comp[v] = 0;
                stack.push_back(v);
            }
        }
    }
    return std::none_of(comp.begin(), comp.end(), [](int c) { return c < 0; });
}

namespace {

NodeId coarse_node(const GridPoint& g, int level) {
    return NodeId{level, g.x >> level, g.y >> level, g.z >> level};
}

double node_score(const GridPoint& g, const BeliefRefs& beliefs, int level) {
    double s = 0.0;
    for (const auto* b : beliefs) s += b->prob(coarse_node(g, level));
    return s;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[b] = a;
        return true;
    }
};

}  // namespace

ViewPositionGraph sample_view_graph(const BeliefRefs& beliefs,
                                    const sensing::OccupancyGrid& occ,
                                    const ViewGraphConfig& cfg) {
    const int m = occ.dim();
    std::vector<std::pair<double, GridPoint>> cands;
    for (int z = 0; z < m; ++z)
        for (int y = 0; y < m; ++y)
            for (int x = 0; x < m; ++x) {
                const GridPoint g{x, y, z};
                if (occ.occupied(g)) continue;
                cands.emplace_back(node_score(g, beliefs, cfg.level), g);
            }
    if (cands.empty()) throw NoFreeSpace("no unoccupied view position candidate");
    std::stable_sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    ViewPositionGraph g;
    g.level = cfg.level;
    for (const auto& [score, pos] : cands) {
        if (static_cast<int>(g.nodes.size()) >= cfg.k) break;
        const Vec3 c = pos.center();
        bool ok = true;
        for (const auto& n : g.nodes)
            if ((n.center() - c).norm() < cfg.sep) {
                ok = false;
                break;
            }
        if (!ok) continue;
        g.nodes.push_back(pos);
        g.scores.push_back(score);
    }

    // Shortest-edge spanning tree, then densify while the degree bound
    // allows.  Should the bound ever block connectivity, connectivity wins.
    const int n = static_cast<int>(g.nodes.size());
    std::vector<std::tuple<double, int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            pairs.emplace_back((g.nodes[i].center() - g.nodes[j].center()).norm(), i, j);
    std::sort(pairs.begin(), pairs.end());

    UnionFind uf(n);
    std::vector<int> deg(n, 0);
    auto add_edge = [&](int i, int j) {
        g.edges.emplace_back(i, j);
        ++deg[i];
        ++deg[j];
    };
    for (const auto& [d, i, j] : pairs) {
        if (deg[i] >= cfg.max_degree || deg[j] >= cfg.max_degree) continue;
        if (uf.unite(i, j)) add_edge(i, j);
    }
    for (const auto& [d, i, j] : pairs)
        if (uf.unite(i, j)) add_edge(i, j);
    for (const auto& [d, i, j] : pairs) {
        if (deg[i] >= cfg.max_degree || deg[j] >= cfg.max_degree) continue;
        if (std::find(g.edges.begin(), g.edges.end(), std::make_pair(i, j)) ==
            g.edges.end())
            add_edge(i, j);
    }
    return g;
}

double covered_probability(const ViewPositionGraph& graph, const BeliefRefs& beliefs) {
    if (beliefs.empty()) return 1.0;
    std::set<NodeId> cells;
    for (const auto& n : graph.nodes) cells.insert(coarse_node(n, graph.level));
    double total = 0.0;
    for (const auto* b : beliefs)
        for (const auto& c : cells) total += b->prob(c);
    return total / static_cast<double>(beliefs.size());
}

bool should_resample(const ViewPositionGraph& graph, const BeliefRefs& beliefs,
                     double threshold) {
    return covered_probability(graph, beliefs) < threshold;
}

namespace {

int orient_toward_nearest_unfound(const Mos3dState& s, const GridPoint& from,
                                  int fallback) {
    int best_id = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(s.objects.size()); ++i) {
        if (s.is_found(i)) continue;
        const double d = (s.objects[i].center() - from.center()).norm();
        if (d < best_d) {
            best_d = d;
            best_id = i;
        }
    }
    if (best_id < 0) return fallback;
    const Vec3 v = s.objects[best_id].center() - from.center();
    if (v.squaredNorm() == 0.0) return fallback;  // standing on the object
    return quantize_dir(v);
}

}  // namespace

std::uint32_t find_mask(const Mos3dState& s, const sensing::OccupancyGrid& occ,
                        const Mos3dConfig& cfg) {
    const auto fov = make_fov(s.robot, cfg);
    std::uint32_t mask = 0;
    for (int i = 0; i < static_cast<int>(s.objects.size()); ++i) {
        if (s.is_found(i)) continue;
        const GridPoint& g = s.objects[i];
        if (fov.contains(g.center()) && sensing::voxel_visible(fov, occ, g))
            mask |= 1u << i;
    }
    return mask;
}

Mos3dState transition(const Mos3dState& s, const Mos3dAction& a,
                      const sensing::OccupancyGrid& occ, const Mos3dConfig& cfg) {
    Mos3dState next = s;
    if (a.kind == Mos3dAction::kMove) {
        next.robot.pos = a.target;
        next.robot.dir = orient_toward_nearest_unfound(s, a.target, s.robot.dir);
    } else {
        next.found |= find_mask(s, occ, cfg);
    }
    return next;
}

double reward(const Mos3dState& s, const Mos3dAction& a,
              const sensing::OccupancyGrid& occ, const Mos3dConfig& cfg) {
    if (a.kind == Mos3dAction::kMove) {
        const auto path = sensing::ray_voxels(s.robot.pos.center(), a.target.center());
        const int steps = std::max<int>(1, static_cast<int>(path.size()) - 1);
        return cfg.step_cost * steps;
    }
    const int found = std::popcount(find_mask(s, occ, cfg));
    return found > 0 ? cfg.find_reward * found : cfg.find_penalty;
}

double observation_density(const sensing::VolumetricObservation& z,
                           const Mos3dState& s, double alpha) {
    double density = 1.0;
    for (const auto& [voxel, label] : z.labels) {
        int present = -1;
        for (int i = 0; i < static_cast<int>(s.objects.size()); ++i)
            if (s.objects[i] == voxel) {
                present = i;
                break;
            }
        if (present >= 0)
            density *= (label == present) ? alpha : (1.0 - alpha);
        else if (label != sensing::VolumetricObservation::kFree)
            density *= (1.0 - alpha);
    }
    return density;
}

Mos3dAction greedy_action(const BeliefRefs& beliefs, const ViewPositionGraph& graph,
                          bool detected) {
    if (detected) return Mos3dAction::find();
    // The most probable cell across beliefs; each belief normalizes on its
    // own, so its argmax probability is comparable across objects.
    GridPoint target{0, 0, 0};
    double best_p = -1.0;
    for (const auto* b : beliefs) {
        const GridPoint c = b->argmax_cell();
        const double p = b->prob(c);
        if (p > best_p) {
            best_p = p;
            target = c;
        }
    }
    int best_node = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(graph.nodes.size()); ++i) {
        const double d = (graph.nodes[i].center() - target.center()).norm();
        if (d < best_d) {
            best_d = d;
            best_node = i;
        }
    }
    return Mos3dAction::move(graph.nodes[best_node]);
}

Mos3dAction random_action(const ViewPositionGraph& graph, bool detected, Rng& rng) {
    if (detected) return Mos3dAction::find();
    return Mos3dAction::move(graph.nodes[rng.uniform_index(graph.nodes.size())]);
}

}  // namespace mos::mos3d
