#include "mos/grid2/belief2.hpp"

#include <cmath>

#include "mos/core/error.hpp"

namespace mos::grid2 {

Belief2 Belief2::uniform(const GridMap2& map) {
    Belief2 b(map.width(), map.height());
    const auto cells = map.free_cells();
    if (cells.empty()) throw EmptyBelief("map has no free cells");
    const double w = 1.0 / static_cast<double>(cells.size());
    for (const auto& c : cells) b.at(c.x, c.y) = w;
    return b;
}

Belief2 Belief2::point(const GridMap2& map, const GridPoint& cell) {
    if (!map.free(cell)) throw EmptyBelief("point belief on a blocked cell");
    Belief2 b(map.width(), map.height());
    b.at(cell.x, cell.y) = 1.0;
    return b;
}

void Belief2::normalize() {
    double total = 0.0;
    for (double v : p_) total += v;
    if (total <= 0.0) throw ZeroMass("belief update annihilated all mass");
    for (double& v : p_) v /= total;
}

GridPoint Belief2::argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < p_.size(); ++i)
        if (p_[i] > p_[best]) best = i;
    return {static_cast<int>(best % width_), static_cast<int>(best / width_), 0};
}

GridPoint Belief2::sample(Rng& rng) const {
    double total = 0.0;
    for (double v : p_) total += v;
    if (total <= 0.0) throw EmptyBelief("belief has no mass to sample");
    const double u = rng.uniform() * total;
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < p_.size(); ++i) {
        if (p_[i] <= 0.0) continue;
        acc += p_[i];
        last = i;
        if (u < acc) break;
    }
    return {static_cast<int>(last % width_), static_cast<int>(last / width_), 0};
}

void detection_update(Belief2& b, const GridMap2& map, double res,
                      const cos::Pose2& viewpoint, const cos::DetectionParams& dm,
                      const std::optional<GridPoint>& z) {
    const int fan_cells =
        cos::fan_range_count(viewpoint, dm.fov, dm.range, res, map);
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x) {
            if (b.at(x, y) == 0.0) continue;
            b.at(x, y) *= cos::detection_prob(z, {x, y, 0}, viewpoint, dm, res,
                                              fan_cells);
        }
    b.normalize();
}

void correlated_update(Belief2& b, const GridMap2& map, double res,
                       const cos::Pose2& viewpoint, const cos::DetectionParams& dm,
                       const cos::CorrelationParams& cm,
                       const std::optional<GridPoint>& z) {
    const int w = map.width(), h = map.height();
    const int fan_cells =
        cos::fan_range_count(viewpoint, dm.fov, dm.range, res, map);

    // Detector likelihood of this reading for every candidate object cell.
    std::vector<double> like(static_cast<std::size_t>(w) * h, 0.0);
    double like_total = 0.0;
    int free_total = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!map.free({x, y, 0})) continue;
            const double v =
                cos::detection_prob(z, {x, y, 0}, viewpoint, dm, res, fan_cells);
            like[static_cast<std::size_t>(y) * w + x] = v;
            like_total += v;
            ++free_total;
        }

    const int radius = static_cast<int>(std::ceil(cm.dist / res));
    bool any_support = false;
    for (int ty = 0; ty < h; ++ty)
        for (int tx = 0; tx < w; ++tx) {
            if (b.at(tx, ty) == 0.0) continue;
            // Scan the bounding box of the expected-distance disk once; the
            // Far case reuses it as the piece to subtract from the totals.
            double disk_sum = 0.0;
            int disk_n = 0;
            for (int y = std::max(0, ty - radius); y <= std::min(h - 1, ty + radius);
                 ++y)
                for (int x = std::max(0, tx - radius);
                     x <= std::min(w - 1, tx + radius); ++x) {
                    if (!map.free({x, y, 0})) continue;
                    const double d =
                        res * std::hypot(static_cast<double>(x - tx),
                                         static_cast<double>(y - ty));
                    const bool inside = cm.close ? d < cm.dist : d <= cm.dist;
                    if (!inside) continue;
                    disk_sum += like[static_cast<std::size_t>(y) * w + x];
                    ++disk_n;
                }
            double sum;
            int n;
            if (cm.close) {
                sum = disk_sum;
                n = disk_n;
            } else {
                sum = like_total - disk_sum;
                n = free_total - disk_n;
            }
            if (n == 0) {
                b.at(tx, ty) = 0.0;
                continue;
            }
            any_support = true;
            b.at(tx, ty) *= sum / static_cast<double>(n);
        }
    if (!any_support)
        throw DegenerateCorrelation(
            "relation has empty support at every candidate target cell");
    b.normalize();
}

}  // namespace mos::grid2
