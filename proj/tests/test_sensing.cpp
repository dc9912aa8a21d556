#include <doctest.h>

#include <cmath>
#include <set>

#include "mos/sensing/observation.hpp"
#include "mos/sensing/visibility.hpp"

using namespace mos;
using namespace mos::sensing;

namespace {

// ---------------------------------------------------------------------------
// Independent visibility oracle: a voxel is visible iff its center is in the
// frustum and no other voxel (except the target) has its OPEN box interior
// crossed by the camera-to-center segment.  Intersection by the slab method
// with strict inequalities; shares nothing with the DDA traversal.
// ---------------------------------------------------------------------------
bool segment_hits_open_box(const Vec3& a, const Vec3& b, const GridPoint& v) {
    double tmin = 0.0, tmax = 1.0;
    for (int i = 0; i < 3; ++i) {
        const double lo = (i == 0 ? v.x : i == 1 ? v.y : v.z);
        const double hi = lo + 1.0;
        const double ai = a[i], di = b[i] - a[i];
        if (di == 0.0) {
            if (ai <= lo || ai >= hi) return false;
        } else {
            double t1 = (lo - ai) / di, t2 = (hi - ai) / di;
            if (t1 > t2) std::swap(t1, t2);
            tmin = std::max(tmin, t1);
            tmax = std::min(tmax, t2);
        }
    }
    return tmin < tmax;
}

std::set<GridPoint> oracle_visible(const FrustumFov& fov, const OccupancyGrid& occ) {
    std::set<GridPoint> out;
    const int m = occ.dim();
    for (int z = 0; z < m; ++z)
        for (int y = 0; y < m; ++y)
            for (int x = 0; x < m; ++x) {
                const GridPoint target{x, y, z};
                if (!fov.contains(target.center())) continue;
                bool blocked = false;
                for (int bz = 0; bz < m && !blocked; ++bz)
                    for (int by = 0; by < m && !blocked; ++by)
                        for (int bx = 0; bx < m && !blocked; ++bx) {
                            const GridPoint blocker{bx, by, bz};
                            if (blocker == target || !occ.occupied(blocker)) continue;
                            if (segment_hits_open_box(fov.pos, target.center(),
                                                      blocker))
                                blocked = true;
                        }
                if (!blocked) out.insert(target);
            }
    return out;
}

}  // namespace

TEST_CASE("frustum: cone angle and range bounds") {
    FrustumFov fov;
    fov.pos = Vec3(0.0, 0.0, 0.0);
    fov.fov_deg = 60.0;
    fov.near_range = 1.0;
    fov.far_range = 5.0;

    CHECK(fov.contains(Vec3(3.0, 0.0, 0.0)));
    CHECK(!fov.contains(Vec3(-3.0, 0.0, 0.0)));   // behind
    CHECK(!fov.contains(Vec3(0.5, 0.0, 0.0)));    // closer than near
    CHECK(!fov.contains(Vec3(6.0, 0.0, 0.0)));    // beyond far
    CHECK(fov.contains(Vec3(1.0, 0.0, 0.0)));     // inclusive near
    CHECK(fov.contains(Vec3(5.0, 0.0, 0.0)));     // inclusive far

    // 30 degrees off-axis is the cone boundary for a 60 degree FOV.
    const double r = 3.0;
    const double inside = 29.0 * M_PI / 180.0, outside = 31.0 * M_PI / 180.0;
    CHECK(fov.contains(Vec3(r * std::cos(inside), r * std::sin(inside), 0.0)));
    CHECK(!fov.contains(Vec3(r * std::cos(outside), r * std::sin(outside), 0.0)));

    // look_at points the axis at the target.
    FrustumFov aimed = fov;
    aimed.orient = FrustumFov::look_at(Vec3(0, 0, 0), Vec3(0, 0, 9));
    CHECK(aimed.contains(Vec3(0, 0, 3)));
    CHECK(!aimed.contains(Vec3(3, 0, 0)));
}

TEST_CASE("ray voxels: straight axis run") {
    const auto cells = ray_voxels(Vec3(0.5, 0.5, 0.5), Vec3(3.5, 0.5, 0.5));
    REQUIRE(cells.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(cells[i] == GridPoint{i, 0, 0});
}

TEST_CASE("ray voxels: exact diagonal skips edge-adjacent voxels") {
    // Corner-to-corner diagonal of a 2x2 block passes through the shared
    // corner; only the two diagonal voxels are crossed.
    const auto cells = ray_voxels(Vec3(0.5, 0.5, 0.5), Vec3(1.5, 1.5, 0.5));
    REQUIRE(cells.size() == 2);
    CHECK(cells[0] == GridPoint{0, 0, 0});
    CHECK(cells[1] == GridPoint{1, 1, 0});
}

TEST_CASE("visibility: a wall occludes what is behind it") {
    OccupancyGrid occ(8);
    for (int y = 0; y < 8; ++y)
        for (int z = 0; z < 8; ++z) occ.set({3, y, z});  // wall plane x=3

    FrustumFov fov;
    fov.pos = Vec3(0.5, 1.5, 1.5);
    fov.orient = FrustumFov::look_at(fov.pos, Vec3(7.5, 1.5, 1.5));
    fov.fov_deg = 70.0;
    fov.near_range = 0.0;
    fov.far_range = 12.0;

    CHECK(voxel_visible(fov, occ, {1, 1, 1}));
    CHECK(voxel_visible(fov, occ, {3, 1, 1}));   // wall voxel itself
    CHECK(!voxel_visible(fov, occ, {4, 1, 1}));  // directly behind the wall
    CHECK(!voxel_visible(fov, occ, {6, 1, 1}));

    const auto vis = visible_voxels(fov, occ);
    const std::set<GridPoint> vis_set(vis.begin(), vis.end());
    CHECK(vis_set.count({1, 1, 1}) == 1);
    CHECK(vis_set.count({5, 1, 1}) == 0);
}

TEST_CASE("visibility: DDA agrees exactly with the open-box oracle") {
    Rng rng(314);
    for (int config = 0; config < 10; ++config) {
        OccupancyGrid occ(16);
        for (int z = 0; z < 16; ++z)
            for (int y = 0; y < 16; ++y)
                for (int x = 0; x < 16; ++x)
                    if (rng.bernoulli(0.08)) occ.set({x, y, z});

        FrustumFov fov;
        fov.pos = Vec3(rng.uniform(0.2, 15.8), rng.uniform(0.2, 15.8),
                       rng.uniform(0.2, 15.8));
        const Vec3 target(rng.uniform(0.0, 16.0), rng.uniform(0.0, 16.0),
                          rng.uniform(0.0, 16.0));
        fov.orient = FrustumFov::look_at(fov.pos, target);
        fov.fov_deg = 60.0;
        fov.near_range = 0.2;
        fov.far_range = 12.0;

        const auto vis = visible_voxels(fov, occ);
        const std::set<GridPoint> impl(vis.begin(), vis.end());
        const auto oracle = oracle_visible(fov, occ);
        CAPTURE(config);
        REQUIRE(impl == oracle);
    }
}

TEST_CASE("observations: box labels, free elsewhere, unknown when unseen") {
    OccupancyGrid occ(8);
    for (int y = 0; y < 8; ++y)
        for (int z = 0; z < 8; ++z) occ.set({3, y, z});

    FrustumFov fov;
    fov.pos = Vec3(0.5, 1.5, 1.5);
    fov.orient = FrustumFov::look_at(fov.pos, Vec3(7.5, 1.5, 1.5));
    fov.fov_deg = 70.0;
    fov.far_range = 12.0;

    BoxDetection det;
    det.id = 5;
    det.center = Vec3(1.5, 1.5, 1.5);
    det.extents = Vec3(1.0, 1.0, 1.0);
    const auto obs = synthesize_boxes(fov, occ, std::span(&det, 1));

    CHECK(obs.label_of({1, 1, 1}) == 5);
    CHECK(obs.label_of({2, 1, 1}) == VolumetricObservation::kFree);
    CHECK(obs.label_of({5, 1, 1}) == VolumetricObservation::kUnknown);  // occluded
    CHECK(obs.label_of({0, 7, 7}) == VolumetricObservation::kUnknown);  // outside

    // label_only is a superset labeling of the boxes observation.
    const auto lab = synthesize_label_only(fov, occ, 5);
    for (const auto& [g, label] : obs.labels) {
        CHECK(lab.label_of(g) == 5);
        if (label == 5) CHECK(lab.label_of(g) == label);
    }
    CHECK(lab.labels.size() == obs.labels.size());
}

TEST_CASE("observations: synthetic detector follows alpha") {
    OccupancyGrid occ(8);
    FrustumFov fov;
    fov.pos = Vec3(0.5, 4.5, 4.5);
    fov.orient = FrustumFov::look_at(fov.pos, Vec3(7.5, 4.5, 4.5));
    fov.fov_deg = 80.0;
    fov.far_range = 12.0;

    std::map<int, GridPoint> objects{{0, {4, 4, 4}}, {1, {0, 0, 0}}};

    Rng rng(1);
    const auto always = synthesize_synthetic(fov, occ, objects, 1.0, rng);
    CHECK(always.label_of({4, 4, 4}) == 0);
    CHECK(always.label_of({0, 0, 0}) == VolumetricObservation::kUnknown);  // not in FOV

    const auto never = synthesize_synthetic(fov, occ, objects, 0.0, rng);
    CHECK(never.label_of({4, 4, 4}) == VolumetricObservation::kFree);

    int hits = 0;
    const int trials = 2000;
    for (int i = 0; i < trials; ++i) {
        const auto o = synthesize_synthetic(fov, occ, objects, 0.7, rng);
        if (o.label_of({4, 4, 4}) == 0) ++hits;
    }
    CHECK(hits / double(trials) == doctest::Approx(0.7).epsilon(0.05));
}

TEST_CASE("observations: equality and hashing are label-set based") {
    OccupancyGrid occ(4);
    FrustumFov fov;
    fov.pos = Vec3(0.5, 2.0, 2.0);
    fov.orient = FrustumFov::look_at(fov.pos, Vec3(3.5, 2.0, 2.0));
    fov.far_range = 8.0;

    Rng r1(5), r2(5);
    const auto a = synthesize_synthetic(fov, occ, {{0, {2, 2, 2}}}, 0.5, r1);
    const auto b = synthesize_synthetic(fov, occ, {{0, {2, 2, 2}}}, 0.5, r2);
    CHECK(a == b);
    CHECK(a.hash() == b.hash());
    const auto c = synthesize_label_only(fov, occ, 0);
    CHECK(!(a == c));
}
