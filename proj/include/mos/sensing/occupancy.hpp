#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mos/core/error.hpp"
#include "mos/core/grid.hpp"

namespace mos::sensing {

// Binary occupancy over a cubic grid of dimension m (a power of two), with
// an any-reduce pyramid so occupancy of a level-k node (any occupied ground
// voxel beneath it) is an O(1) lookup.
class OccupancyGrid {
public:
    explicit OccupancyGrid(int dim);

    // Marks the voxel containing each point; points are in the continuous
    // grid frame (units of voxels).  Out-of-bounds points are dropped.
    // inflate_radius >= 1 then dilates by that Chebyshev radius.
    static OccupancyGrid from_points(std::span<const Vec3> points, int dim,
                                     int inflate_radius = 0);

    int dim() const { return dim_; }
    int levels() const { return levels_; }  // ground = level 0, root = levels()

    bool in_bounds(const GridPoint& p) const {
        return p.x >= 0 && p.y >= 0 && p.z >= 0 && p.x < dim_ && p.y < dim_ &&
               p.z < dim_;
    }

    void set(const GridPoint& p, bool occupied = true);
    bool occupied(const GridPoint& p) const;          // out of bounds -> false
    bool occupied_at(int level, const GridPoint& p) const;

    void inflate(int radius);  // Chebyshev dilation

    std::size_t occupied_count() const { return count_; }

private:
    void rebuild_pyramid() const;

    int dim_;
    int levels_;
    std::size_t count_ = 0;
    std::vector<std::uint8_t> ground_;
    // Pyramid is rebuilt lazily on first coarse query after a mutation.
    mutable bool dirty_ = false;
    mutable std::vector<std::vector<std::uint8_t>> pyramid_;
};

}  // namespace mos::sensing
