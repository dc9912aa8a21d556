#pragma once

#include <vector>

#include "mos/core/grid.hpp"
#include "mos/sensing/frustum.hpp"
#include "mos/sensing/occupancy.hpp"

namespace mos::sensing {

// Voxels whose open interior the segment from `a` to `b` crosses, in order
// of traversal.  Crossings exactly through a face enter both voxels; exact
// edge or corner grazes (within 1e-12 of the parameter tie) skip the voxels
// touched only at their boundary.
std::vector<GridPoint> ray_voxels(const Vec3& a, const Vec3& b);

// True when the segment camera -> voxel center crosses no occupied voxel
// strictly before the target; the target itself never blocks, so occupied
// voxels are visible when unobstructed.  The camera's own voxel does block.
bool voxel_visible(const FrustumFov& fov, const OccupancyGrid& occ,
                   const GridPoint& target);

// All voxels of the grid whose center lies in the frustum and which are
// visible per voxel_visible.  Ordered by (z, y, x) ascending.
std::vector<GridPoint> visible_voxels(const FrustumFov& fov,
                                      const OccupancyGrid& occ);

}  // namespace mos::sensing
