#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <vector>

#include "mos/core/grid.hpp"
#include "mos/core/rng.hpp"
#include "mos/sensing/frustum.hpp"
#include "mos/sensing/occupancy.hpp"
#include "mos/sensing/visibility.hpp"

namespace mos::sensing {

// Per-voxel labeling of the visible portion of a frustum.  Voxels inside
// the frustum but occluded, and voxels outside the frustum, carry no entry
// and read back as kUnknown; belief updates must leave them untouched.
struct VolumetricObservation {
    static constexpr int kFree = -1;
    static constexpr int kUnknown = -2;

    // Sorted by voxel; labels are kFree or an object id >= 0.
    std::vector<std::pair<GridPoint, int>> labels;

    int label_of(const GridPoint& g) const {
        auto it = std::lower_bound(
            labels.begin(), labels.end(), g,
            [](const auto& entry, const GridPoint& key) { return entry.first < key; });
        if (it == labels.end() || !(it->first == g)) return kUnknown;
        return it->second;
    }

    bool operator==(const VolumetricObservation& o) const = default;

    std::size_t hash() const noexcept {
        std::uint64_t h = 1469598103934665603ull;
        for (const auto& [g, label] : labels) {
            h = hash_combine(h, GridPointHash{}(g));
            h = hash_combine(h, static_cast<std::uint64_t>(
                                    static_cast<std::uint32_t>(label)));
        }
        return static_cast<std::size_t>(h);
    }
};

struct VolumetricObservationHash {
    std::size_t operator()(const VolumetricObservation& o) const noexcept {
        return o.hash();
    }
};

// Axis-aligned detection box in the grid frame; extents are full side
// lengths.
struct BoxDetection {
    int id = 0;
    Vec3 center = Vec3::Zero();
    Vec3 extents = Vec3::Ones();
};

// Visible voxels overlapping a detection box get that detection's id (first
// detection in list order wins); every other visible voxel is free.
VolumetricObservation synthesize_boxes(const FrustumFov& fov,
                                       const OccupancyGrid& occ,
                                       std::span<const BoxDetection> detections);

// Detector reported `id` with no localization: every visible voxel is
// labeled with the id.
VolumetricObservation synthesize_label_only(const FrustumFov& fov,
                                            const OccupancyGrid& occ, int id);

// Ground-truth simulation: each object whose voxel is visible is labeled at
// that voxel with probability alpha (one draw per visible object, in id
// order); all other visible voxels are free.
VolumetricObservation synthesize_synthetic(const FrustumFov& fov,
                                           const OccupancyGrid& occ,
                                           const std::map<int, GridPoint>& objects,
                                           double alpha, Rng& rng);

}  // namespace mos::sensing
