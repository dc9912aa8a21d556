#include "mos/sensing/observation.hpp"

namespace mos::sensing {

namespace {

bool voxel_overlaps_box(const GridPoint& v, const BoxDetection& det) {
    for (int i = 0; i < 3; ++i) {
        const double vlo = (i == 0 ? v.x : i == 1 ? v.y : v.z);
        const double vhi = vlo + 1.0;
        const double blo = det.center[i] - det.extents[i] / 2.0;
        const double bhi = det.center[i] + det.extents[i] / 2.0;
        if (std::max(vlo, blo) >= std::min(vhi, bhi)) return false;
    }
    return true;
}

VolumetricObservation from_sorted_visible(std::vector<GridPoint> visible,
                                          const auto& label_fn) {
    // visible_voxels emits (z,y,x) order; observations sort by GridPoint.
    std::sort(visible.begin(), visible.end());
    VolumetricObservation obs;
    obs.labels.reserve(visible.size());
    for (const auto& v : visible) obs.labels.emplace_back(v, label_fn(v));
    return obs;
}

}  // namespace

VolumetricObservation synthesize_boxes(const FrustumFov& fov,
                                       const OccupancyGrid& occ,
                                       std::span<const BoxDetection> detections) {
    return from_sorted_visible(visible_voxels(fov, occ), [&](const GridPoint& v) {
        for (const auto& det : detections)
            if (voxel_overlaps_box(v, det)) return det.id;
        return VolumetricObservation::kFree;
    });
}

VolumetricObservation synthesize_label_only(const FrustumFov& fov,
                                            const OccupancyGrid& occ, int id) {
    return from_sorted_visible(visible_voxels(fov, occ),
                               [&](const GridPoint&) { return id; });
}

VolumetricObservation synthesize_synthetic(const FrustumFov& fov,
                                           const OccupancyGrid& occ,
                                           const std::map<int, GridPoint>& objects,
                                           double alpha, Rng& rng) {
    auto visible = visible_voxels(fov, occ);
    std::sort(visible.begin(), visible.end());
    std::map<GridPoint, int> hits;
    for (const auto& [id, g] : objects) {
        if (!std::binary_search(visible.begin(), visible.end(), g)) continue;
        if (!rng.bernoulli(alpha)) continue;
        hits.try_emplace(g, id);  // lowest id wins a shared voxel
    }
    VolumetricObservation obs;
    obs.labels.reserve(visible.size());
    for (const auto& v : visible) {
        auto it = hits.find(v);
        obs.labels.emplace_back(
            v, it == hits.end() ? VolumetricObservation::kFree : it->second);
    }
    return obs;
}

}  // namespace mos::sensing
