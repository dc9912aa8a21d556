#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>

namespace mos {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

// Integer voxel / cell coordinate.  Grid frame convention: one unit equals
// one voxel edge, voxel (x,y,z) spans [x,x+1)x[y,y+1)x[z,z+1), center at
// (x+.5, y+.5, z+.5).
struct GridPoint {
    int x = 0, y = 0, z = 0;

    friend bool operator==(const GridPoint&, const GridPoint&) = default;
    friend auto operator<=>(const GridPoint&, const GridPoint&) = default;

    Vec3 center() const { return {x + 0.5, y + 0.5, z + 0.5}; }

    friend std::ostream& operator<<(std::ostream& os, const GridPoint& p) {
        return os << "(" << p.x << "," << p.y << "," << p.z << ")";
    }
};

inline int chebyshev(const GridPoint& a, const GridPoint& b) {
    return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y),
                     std::abs(a.z - b.z)});
}

inline double euclidean(const GridPoint& a, const GridPoint& b) {
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
}

struct GridPointHash {
    std::size_t operator()(const GridPoint& p) const noexcept {
        std::uint64_t h = 1469598103934665603ull;
        h = hash_combine(h, static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.x)));
        h = hash_combine(h, static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.y)));
        h = hash_combine(h, static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.z)));
        return static_cast<std::size_t>(h);
    }
};

// Maps a metric world frame to the grid frame of a cubic search region.
// The region is an axis-aligned cube of `size_m` meters centered at
// `center`; `res` meters per voxel.  cell = floor((w - center + size/2)/res).
struct RegionFrame {
    Vec3 center = Vec3::Zero();
    double size_m = 1.0;
    double res = 0.1;

    GridPoint world_to_cell(const Vec3& w) const {
        const Vec3 g = world_to_grid(w);
        return {static_cast<int>(std::floor(g.x())),
                static_cast<int>(std::floor(g.y())),
                static_cast<int>(std::floor(g.z()))};
    }

    // Continuous grid coordinates (units of voxels).
    Vec3 world_to_grid(const Vec3& w) const {
        return Vec3((w.x() - center.x() + size_m / 2.0) / res,
                    (w.y() - center.y() + size_m / 2.0) / res,
                    (w.z() - center.z() + size_m / 2.0) / res);
    }

    Vec3 cell_to_world(const GridPoint& c) const {  // voxel center
        return grid_to_world(c.center());
    }

    Vec3 grid_to_world(const Vec3& g) const {
        return Vec3(g.x() * res - size_m / 2.0 + center.x(),
                    g.y() * res - size_m / 2.0 + center.y(),
                    g.z() * res - size_m / 2.0 + center.z());
    }

    int dim() const { return static_cast<int>(std::llround(size_m / res)); }
};

}  // namespace mos

namespace std {
template <>
struct hash<mos::GridPoint> {
    size_t operator()(const mos::GridPoint& p) const noexcept {
        return mos::GridPointHash{}(p);
    }
};
}  // namespace std
