#pragma once

#include <optional>
#include <vector>

#include "mos/core/grid.hpp"
#include "mos/core/rng.hpp"
#include "mos/cos/models.hpp"
#include "mos/grid2/gridmap.hpp"

namespace mos::grid2 {

// Histogram over target locations, aligned row-major with a GridMap2.
// Blocked cells always carry zero mass.
class Belief2 {
public:
    Belief2() = default;
    Belief2(int width, int height)
        : width_(width), height_(height),
          p_(static_cast<std::size_t>(width) * height, 0.0) {}

    static Belief2 uniform(const GridMap2& map);
    static Belief2 point(const GridMap2& map, const GridPoint& cell);

    int width() const { return width_; }
    int height() const { return height_; }

    double prob(const GridPoint& g) const {
        return p_[static_cast<std::size_t>(g.y) * width_ + g.x];
    }
    double& at(int x, int y) {
        return p_[static_cast<std::size_t>(y) * width_ + x];
    }
    double at(int x, int y) const {
        return p_[static_cast<std::size_t>(y) * width_ + x];
    }

    // Rescales to total mass one; throws ZeroMass when nothing is left.
    void normalize();

    // Highest-probability cell; ties break toward the lowest row-major index.
    GridPoint argmax() const;

    GridPoint sample(Rng& rng) const;

    friend bool operator==(const Belief2&, const Belief2&) = default;

private:
    int width_ = 0, height_ = 0;
    std::vector<double> p_;
};

// Bayes step for a target-detector reading: multiply each candidate cell by
// the detection likelihood and renormalize.
void detection_update(Belief2& b, const GridMap2& map, double res,
                      const cos::Pose2& viewpoint, const cos::DetectionParams& dm,
                      const std::optional<GridPoint>& z);

// Bayes step for a correlated-object reading: each target cell is weighted
// by the marginal probability of the reading under the spatial relation.
// Close relations sum the detector likelihood over the disk of cells
// strictly inside the expected distance; Far relations use the complement,
// computed by subtracting the disk from a map-wide running sum.
void correlated_update(Belief2& b, const GridMap2& map, double res,
                       const cos::Pose2& viewpoint, const cos::DetectionParams& dm,
                       const cos::CorrelationParams& cm,
                       const std::optional<GridPoint>& z);

}  // namespace mos::grid2
