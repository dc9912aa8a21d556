#pragma once

#include <cstdint>
#include <vector>

#include "mos/core/grid.hpp"

namespace mos::grid2 {

// Flat 2D occupancy map.  Positions reuse GridPoint with z = 0; metric
// scaling (meters per cell) is carried by the callers that need it.
class GridMap2 {
public:
    GridMap2() = default;
    GridMap2(int width, int height)
        : width_(width), height_(height),
          blocked_(static_cast<std::size_t>(width) * height, 0) {}

    int width() const { return width_; }
    int height() const { return height_; }

    bool in_bounds(const GridPoint& g) const {
        return g.x >= 0 && g.x < width_ && g.y >= 0 && g.y < height_ && g.z == 0;
    }

    bool blocked(const GridPoint& g) const {
        return blocked_[static_cast<std::size_t>(g.y) * width_ + g.x] != 0;
    }
    bool free(const GridPoint& g) const { return in_bounds(g) && !blocked(g); }

    void set_blocked(const GridPoint& g, bool v = true) {
        blocked_[static_cast<std::size_t>(g.y) * width_ + g.x] = v ? 1 : 0;
    }

    std::vector<GridPoint> free_cells() const {
        std::vector<GridPoint> out;
        for (int y = 0; y < height_; ++y)
            for (int x = 0; x < width_; ++x)
                if (!blocked({x, y, 0})) out.push_back({x, y, 0});
        return out;
    }

private:
    int width_ = 0, height_ = 0;
    std::vector<std::uint8_t> blocked_;
};

}  // namespace mos::grid2
