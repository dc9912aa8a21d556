#include "mos/sensing/visibility.hpp"

#include <cmath>
#include <limits>

namespace mos::sensing {

namespace {
constexpr double kTieTol = 1e-12;
}

std::vector<GridPoint> ray_voxels(const Vec3& a, const Vec3& b) {
    std::vector<GridPoint> out;
    const Vec3 d = b - a;
    int cur[3] = {static_cast<int>(std::floor(a.x())),
                  static_cast<int>(std::floor(a.y())),
                  static_cast<int>(std::floor(a.z()))};
    const int end[3] = {static_cast<int>(std::floor(b.x())),
                        static_cast<int>(std::floor(b.y())),
                        static_cast<int>(std::floor(b.z()))};
    int step[3];
    double tmax[3], tdelta[3];
    for (int i = 0; i < 3; ++i) {
        if (d[i] > 0.0) {
            step[i] = 1;
            tdelta[i] = 1.0 / d[i];
            tmax[i] = (std::floor(a[i]) + 1.0 - a[i]) / d[i];
        } else if (d[i] < 0.0) {
            step[i] = -1;
            tdelta[i] = -1.0 / d[i];
            tmax[i] = (a[i] - std::floor(a[i])) / -d[i];
        } else {
            step[i] = 0;
            tdelta[i] = std::numeric_limits<double>::infinity();
            tmax[i] = std::numeric_limits<double>::infinity();
        }
    }
    const int guard = 4 * (std::abs(end[0] - cur[0]) + std::abs(end[1] - cur[1]) +
                           std::abs(end[2] - cur[2]) + 2);
    for (int it = 0; it < guard; ++it) {
        out.push_back({cur[0], cur[1], cur[2]});
        if (cur[0] == end[0] && cur[1] == end[1] && cur[2] == end[2]) break;
        const double t = std::min({tmax[0], tmax[1], tmax[2]});
        if (t > 1.0 + kTieTol) break;  // numeric safety; should have hit end
        // Advance every axis whose boundary coincides with the nearest one:
        // a tie means the segment passes through an edge or corner, and the
        // voxels touched only at that boundary are skipped.
        for (int i = 0; i < 3; ++i) {
            if (step[i] != 0 && tmax[i] <= t + kTieTol) {
                cur[i] += step[i];
                tmax[i] += tdelta[i];
            }
        }
    }
    return out;
}

bool voxel_visible(const FrustumFov& fov, const OccupancyGrid& occ,
                   const GridPoint& target) {
    for (const auto& v : ray_voxels(fov.pos, target.center())) {
        if (v == target) break;
        if (occ.occupied(v)) return false;
    }
    return true;
}

std::vector<GridPoint> visible_voxels(const FrustumFov& fov,
                                      const OccupancyGrid& occ) {
    std::vector<GridPoint> out;
    const int m = occ.dim();
    for (int z = 0; z < m; ++z)
        for (int y = 0; y < m; ++y)
            for (int x = 0; x < m; ++x) {
                const GridPoint v{x, y, z};
                if (!fov.contains(v.center())) continue;
                if (voxel_visible(fov, occ, v)) out.push_back(v);
            }
    return out;
}

}  // namespace mos::sensing
