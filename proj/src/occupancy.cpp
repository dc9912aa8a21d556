#include "mos/sensing/occupancy.hpp"

#include <cmath>

namespace mos::sensing {

namespace {
int log2_exact(int dim) {
    int l = 0, d = dim;
    while (d > 1) {
        if (d % 2 != 0) throw InvalidConfig("grid dimension must be a power of two");
        d /= 2;
        ++l;
    }
    return l;
}
}  // namespace

OccupancyGrid::OccupancyGrid(int dim)
    : dim_(dim), levels_(log2_exact(dim)),
      ground_(static_cast<std::size_t>(dim) * dim * dim, 0) {
    if (dim < 1) throw InvalidConfig("grid dimension must be positive");
    pyramid_.resize(levels_);
    for (int l = 1; l <= levels_; ++l) {
        const int d = dim_ >> l;
        pyramid_[l - 1].assign(static_cast<std::size_t>(d) * d * d, 0);
    }
}

OccupancyGrid OccupancyGrid::from_points(std::span<const Vec3> points, int dim,
                                         int inflate_radius) {
    OccupancyGrid g(dim);
    for (const auto& p : points) {
        const GridPoint c{static_cast<int>(std::floor(p.x())),
                          static_cast<int>(std::floor(p.y())),
                          static_cast<int>(std::floor(p.z()))};
        if (g.in_bounds(c)) g.set(c);
    }
    if (inflate_radius > 0) g.inflate(inflate_radius);
    return g;
}

void OccupancyGrid::set(const GridPoint& p, bool occupied) {
    if (!in_bounds(p)) return;
    auto& cell = ground_[(static_cast<std::size_t>(p.z) * dim_ + p.y) * dim_ + p.x];
    if (cell == static_cast<std::uint8_t>(occupied)) return;
    count_ += occupied ? 1 : -1;
    cell = occupied ? 1 : 0;
    dirty_ = true;
}

bool OccupancyGrid::occupied(const GridPoint& p) const {
    if (!in_bounds(p)) return false;
    return ground_[(static_cast<std::size_t>(p.z) * dim_ + p.y) * dim_ + p.x] != 0;
}

bool OccupancyGrid::occupied_at(int level, const GridPoint& p) const {
    if (level == 0) return occupied(p);
    if (level < 1 || level > levels_) throw InvalidConfig("bad occupancy level");
    if (dirty_) rebuild_pyramid();
    const int d = dim_ >> level;
    if (p.x < 0 || p.y < 0 || p.z < 0 || p.x >= d || p.y >= d || p.z >= d)
        return false;
    return pyramid_[level - 1][(static_cast<std::size_t>(p.z) * d + p.y) * d + p.x] != 0;
}

void OccupancyGrid::inflate(int radius) {
    if (radius <= 0) return;
    std::vector<GridPoint> seeds;
    for (int z = 0; z < dim_; ++z)
        for (int y = 0; y < dim_; ++y)
            for (int x = 0; x < dim_; ++x)
                if (occupied({x, y, z})) seeds.push_back({x, y, z});
    for (const auto& s : seeds) {
        for (int dz = -radius; dz <= radius; ++dz)
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx) {
                    const GridPoint q{s.x + dx, s.y + dy, s.z + dz};
                    if (!in_bounds(q) || occupied(q)) continue;
                    ground_[(static_cast<std::size_t>(q.z) * dim_ + q.y) * dim_ +
                            q.x] = 1;
                    ++count_;
                }
    }
    dirty_ = true;
}

void OccupancyGrid::rebuild_pyramid() const {
    dirty_ = false;
    for (int l = 1; l <= levels_; ++l) {
        const int d = dim_ >> l;
        auto& level = pyramid_[l - 1];
        for (int z = 0; z < d; ++z)
            for (int y = 0; y < d; ++y)
                for (int x = 0; x < d; ++x) {
                    bool any = false;
                    for (int o = 0; o < 8 && !any; ++o) {
                        const GridPoint c{2 * x + (o & 1), 2 * y + ((o >> 1) & 1),
                                          2 * z + ((o >> 2) & 1)};
                        any = l == 1 ? occupied(c) : occupied_at(l - 1, c);
                    }
                    level[(static_cast<std::size_t>(z) * d + y) * d + x] = any ? 1 : 0;
                }
    }
}

}  // namespace mos::sensing
