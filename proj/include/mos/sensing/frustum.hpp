#pragma once

#include <cmath>

#include "mos/core/grid.hpp"

namespace mos::sensing {

// Viewing frustum approximated as a cone: a point is inside when its range
// from the camera lies in [near_range, far_range] (inclusive) and the angle
// between it and the view axis is at most fov_deg / 2.  All coordinates are
// in the continuous grid frame.  The view axis is the camera's +X rotated
// by `orient`.
struct FrustumFov {
    Vec3 pos = Vec3::Zero();
    Quat orient = Quat::Identity();
    double fov_deg = 60.0;
    double near_range = 0.0;
    double far_range = 10.0;

    Vec3 axis() const { return orient * Vec3::UnitX(); }

    bool contains(const Vec3& p) const {
        const Vec3 v = p - pos;
        const double r = v.norm();
        if (r < near_range || r > far_range) return false;
        if (r == 0.0) return true;  // at the apex, inside iff near_range == 0
        const double cos_half = std::cos(fov_deg * 0.5 * M_PI / 180.0);
        return v.dot(axis()) / r >= cos_half - 1e-12;
    }

    // Orientation that points the view axis from `from` toward `to`.
    static Quat look_at(const Vec3& from, const Vec3& to) {
        const Vec3 d = to - from;
        if (d.squaredNorm() == 0.0) return Quat::Identity();
        return Quat::FromTwoVectors(Vec3::UnitX(), d);
    }
};

}  // namespace mos::sensing
