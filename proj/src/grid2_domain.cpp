#include "mos/grid2/domain.hpp"

#include <algorithm>
#include <cmath>

namespace mos::grid2 {

namespace {

// Cells of the map inside the fan and within detector range, scanned over
// the bounding box of the range disk rather than the whole map.
std::vector<GridPoint> fan_cells_in_range(const GridMap2& map,
                                          const cos::Pose2& s,
                                          const cos::DetectionParams& dm,
                                          double res) {
    std::vector<GridPoint> out;
    const int radius = static_cast<int>(std::ceil(dm.range / res));
    for (int y = std::max(0, s.pos.y - radius);
         y <= std::min(map.height() - 1, s.pos.y + radius); ++y)
        for (int x = std::max(0, s.pos.x - radius);
             x <= std::min(map.width() - 1, s.pos.x + radius); ++x) {
            const GridPoint c{x, y, 0};
            const double d = res * std::hypot(static_cast<double>(x - s.pos.x),
                                              static_cast<double>(y - s.pos.y));
            if (d <= dm.range && cos::in_fan(s, c, dm.fov, res)) out.push_back(c);
        }
    return out;
}

std::optional<GridPoint> sample_detector(const GridMap2& map, const cos::Pose2& s,
                                         const cos::DetectionParams& dm, double res,
                                         const GridPoint& object, Rng& rng) {
    if (cos::in_fan(s, object, dm.fov, res)) {
        if (rng.bernoulli(dm.tp)) return object;
        return std::nullopt;
    }
    if (rng.bernoulli(dm.fp)) {
        const auto cells = fan_cells_in_range(map, s, dm, res);
        if (!cells.empty())
            return cells[rng.uniform_index(cells.size())];
    }
    return std::nullopt;
}

// Draw a location for a correlated object given the target location.  Close
// relations enumerate the disk strictly inside the expected distance; Far
// relations rejection-sample the complement with a full-scan fallback.
std::optional<GridPoint> sample_relation(const GridMap2& map,
                                         const cos::CorrelationParams& cm,
                                         double res, const GridPoint& target,
                                         Rng& rng) {
    if (cm.close) {
        std::vector<GridPoint> support;
        const int radius = static_cast<int>(std::ceil(cm.dist / res));
        for (int y = std::max(0, target.y - radius);
             y <= std::min(map.height() - 1, target.y + radius); ++y)
            for (int x = std::max(0, target.x - radius);
                 x <= std::min(map.width() - 1, target.x + radius); ++x) {
                const GridPoint c{x, y, 0};
                if (!map.free(c)) continue;
                if (cos::correlation_prob(c, target, cm, res) > 0.0)
                    support.push_back(c);
            }
        if (support.empty()) return std::nullopt;
        return support[rng.uniform_index(support.size())];
    }
    const auto cells = map.free_cells();
    if (cells.empty()) return std::nullopt;
    for (int tries = 0; tries < 64; ++tries) {
        const auto& c = cells[rng.uniform_index(cells.size())];
        if (cos::correlation_prob(c, target, cm, res) > 0.0) return c;
    }
    std::vector<GridPoint> support;
    for (const auto& c : cells)
        if (cos::correlation_prob(c, target, cm, res) > 0.0) support.push_back(c);
    if (support.empty()) return std::nullopt;
    return support[rng.uniform_index(support.size())];
}

}  // namespace

SearchObservation sample_search_observation(const GridMap2& map,
                                            const SearchConfig& cfg,
                                            const cos::Pose2& viewpoint,
                                            const GridPoint& target, Rng& rng) {
    SearchObservation z;
    z.detections.reserve(1 + cfg.correlated.size());
    z.detections.push_back(sample_detector(map, viewpoint, cfg.target_detector,
                                           cfg.res, target, rng));
    for (const auto& cls : cfg.correlated) {
        const auto placed = sample_relation(map, cls.relation, cfg.res, target, rng);
        if (!placed) {
            z.detections.push_back(std::nullopt);
            continue;
        }
        z.detections.push_back(
            sample_detector(map, viewpoint, cls.detector, cfg.res, *placed, rng));
    }
    return z;
}

}  // namespace mos::grid2
