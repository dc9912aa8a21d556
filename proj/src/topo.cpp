#include "mos/planning/topo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <tuple>

#include "mos/core/error.hpp"
#include "mos/planning/navigate.hpp"

namespace mos::planning {

namespace {

double dist(const GridPoint& a, const GridPoint& b) {
    return std::hypot(static_cast<double>(a.x - b.x),
                      static_cast<double>(a.y - b.y));
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[b] = a;
        return true;
    }
};

bool reaches_all(const std::vector<std::pair<int, int>>& edges, int n) {
    if (n <= 1) return true;
    UnionFind uf(n);
    int comps = n;
    for (const auto& [a, b] : edges) comps -= uf.unite(a, b) ? 1 : 0;
    return comps == 1;
}

// Connect the sampled nodes: a degree-capped spanning pass for
// connectivity, a fill pass toward the minimum degree, then swap repairs
// for nodes the fill pass could not satisfy without breaking the cap.
std::vector<std::pair<int, int>> build_edges(const std::vector<GridPoint>& nodes,
                                             int zeta_min, int zeta_max) {
    const int n = static_cast<int>(nodes.size());
    std::vector<std::pair<int, int>> edges;
    if (n <= 1) return edges;
    const int zmax = std::min(zeta_max, n - 1);
    const int zmin = std::min(zeta_min, zmax);

    std::vector<std::tuple<double, int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            pairs.emplace_back(dist(nodes[i], nodes[j]), i, j);
    std::sort(pairs.begin(), pairs.end());

    std::vector<int> deg(n, 0);
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    auto add = [&](int i, int j) {
        edges.emplace_back(std::min(i, j), std::max(i, j));
        adj[i][j] = adj[j][i] = true;
        ++deg[i];
        ++deg[j];
    };
    auto remove = [&](int i, int j) {
        const auto key = std::make_pair(std::min(i, j), std::max(i, j));
        edges.erase(std::find(edges.begin(), edges.end(), key));
        adj[i][j] = adj[j][i] = false;
        --deg[i];
        --deg[j];
    };

    UnionFind uf(n);
    for (const auto& [d, i, j] : pairs) {
        if (uf.find(i) == uf.find(j)) continue;
        if (deg[i] >= zmax || deg[j] >= zmax) continue;
        uf.unite(i, j);
        add(i, j);
    }
    for (const auto& [d, i, j] : pairs) {  // cap left components apart
        if (uf.find(i) == uf.find(j)) continue;
        uf.unite(i, j);
        add(i, j);
    }

    for (const auto& [d, i, j] : pairs) {
        if (deg[i] >= zmin && deg[j] >= zmin) continue;
        if (deg[i] >= zmax || deg[j] >= zmax || adj[i][j]) continue;
        add(i, j);
    }

    // Remaining deficits: steal an edge endpoint from a saturated neighbor
    // candidate, keeping the donor above the minimum and the graph
    // connected.
    for (int i = 0; i < n; ++i) {
        bool progress = true;
        while (deg[i] < zmin && progress) {
            progress = false;
            for (const auto& [d, a, b] : pairs) {
                if (a != i && b != i) continue;
                const int j = (a == i) ? b : a;
                if (adj[i][j]) continue;
                if (deg[j] < zmax) {
                    add(i, j);
                    progress = true;
                    break;
                }
                for (int k = 0; k < n && !progress; ++k) {
                    if (!adj[j][k] || k == i || deg[k] <= zmin) continue;
                    remove(j, k);
                    if (reaches_all(edges, n)) {
                        add(i, j);
                        progress = true;
                    } else {
                        add(j, k);
                    }
                }
                if (progress) break;
            }
        }
    }
    return edges;
}

}  // namespace

bool TopoGraph::connected() const {
    return reaches_all(edges, static_cast<int>(nodes.size()));
}

std::vector<int> TopoGraph::neighbors(int i) const {
    std::vector<int> out;
    for (const auto& [a, b] : edges) {
        if (a == i) out.push_back(b);
        if (b == i) out.push_back(a);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> pose_mass(const std::vector<GridPoint>& poses,
                              const grid2::Belief2& b_target, double res) {
    std::vector<double> mass(poses.size(), 0.0);
    if (poses.empty()) return mass;
    for (int y = 0; y < b_target.height(); ++y)
        for (int x = 0; x < b_target.width(); ++x) {
            const double p = b_target.at(x, y);
            if (p <= 0.0) continue;
            const GridPoint cell{x, y, 0};
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < poses.size(); ++i) {
                const double d = dist(poses[i], cell);
                if (d < best_d) {
                    best_d = d;
                    best = i;
                }
            }
            mass[best] += p;
        }
    (void)res;
    return mass;
}

TopoGraph sample_topo_graph(const std::vector<GridPoint>& poses,
                            const grid2::Belief2& b_target, double res,
                            const TopoParams& params, Rng& rng) {
    if (poses.empty()) throw NoFreeSpace("no candidate poses to build a graph on");
    const auto mass = pose_mass(poses, b_target, res);

    TopoGraph g;
    auto separated = [&](const GridPoint& cand) {
        for (const auto& node : g.nodes)
            if (res * dist(node, cand) < params.d_sep) return false;
        return true;
    };

    // Weighted draws without replacement; candidates that land too close to
    // an accepted node are discarded rather than redrawn forever.
    std::vector<std::size_t> alive;
    for (std::size_t i = 0; i < poses.size(); ++i)
        if (mass[i] > 0.0) alive.push_back(i);
    while (static_cast<int>(g.nodes.size()) < params.max_nodes && !alive.empty()) {
        double total = 0.0;
        for (auto i : alive) total += mass[i];
        const double u = rng.uniform() * total;
        double acc = 0.0;
        std::size_t pick = alive.size() - 1;
        for (std::size_t k = 0; k < alive.size(); ++k) {
            acc += mass[alive[k]];
            if (u < acc) {
                pick = k;
                break;
            }
        }
        const std::size_t idx = alive[pick];
        alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(pick));
        if (!separated(poses[idx])) continue;
        g.nodes.push_back(poses[idx]);
        g.coverage.push_back(mass[idx]);
    }

    // Small pose sets become fully represented: any leftover pose joins in
    // row-major order while capacity and separation allow.
    if (static_cast<int>(poses.size()) <= params.max_nodes) {
        for (std::size_t i = 0; i < poses.size(); ++i) {
            if (static_cast<int>(g.nodes.size()) >= params.max_nodes) break;
            if (std::find(g.nodes.begin(), g.nodes.end(), poses[i]) != g.nodes.end())
                continue;
            if (!separated(poses[i])) continue;
            g.nodes.push_back(poses[i]);
            g.coverage.push_back(mass[i]);
        }
    }

    g.edges = build_edges(g.nodes, params.zeta_min, params.zeta_max);
    return g;
}

double topo_coverage(const TopoGraph& graph, const std::vector<GridPoint>& poses,
                     const grid2::Belief2& b_target, double res) {
    const auto mass = pose_mass(poses, b_target, res);
    double total = 0.0;
    for (const auto& node : graph.nodes) {
        const auto it = std::find(poses.begin(), poses.end(), node);
        if (it != poses.end())
            total += mass[static_cast<std::size_t>(it - poses.begin())];
    }
    return total;
}

TopoGraph maybe_resample(TopoGraph graph, const std::vector<GridPoint>& poses,
                         const grid2::Belief2& b_target, double res,
                         const TopoParams& params, Rng& rng) {
    if (!graph.nodes.empty() &&
        topo_coverage(graph, poses, b_target, res) >= params.resample_threshold)
        return graph;
    return sample_topo_graph(poses, b_target, res, params, rng);
}

}  // namespace mos::planning
