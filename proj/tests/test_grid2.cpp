#include <doctest.h>

#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "mos/core/error.hpp"
#include "mos/grid2/agent2.hpp"
#include "mos/grid2/belief2.hpp"
#include "mos/grid2/domain.hpp"

using namespace mos;
using namespace mos::grid2;

namespace {

SearchConfig test_config() {
    SearchConfig cfg;
    cfg.res = 1.0;
    cfg.target_detector.tp = 0.8;
    cfg.target_detector.fp = 0.05;
    cfg.target_detector.range = 2.0;
    cfg.target_detector.sigma = 0.5;
    cfg.target_detector.fov = {90.0, 4.0};
    return cfg;
}

}  // namespace

TEST_CASE("headings: steps, rotation and facing quantization") {
    CHECK(heading_step(0) == GridPoint{1, 0, 0});
    CHECK(heading_step(2) == GridPoint{0, 1, 0});
    CHECK(heading_step(3) == GridPoint{-1, 1, 0});
    CHECK(heading_step(4) == GridPoint{-1, 0, 0});
    CHECK(heading_step(6) == GridPoint{0, -1, 0});

    CHECK(facing_dir({0, 0, 0}, {5, 0, 0}) == 0);
    CHECK(facing_dir({0, 0, 0}, {3, 3, 0}) == 1);
    CHECK(facing_dir({0, 0, 0}, {0, 2, 0}) == 2);
    CHECK(facing_dir({0, 0, 0}, {-2, 0, 0}) == 4);
    CHECK(facing_dir({0, 0, 0}, {0, -1, 0}) == 6);
    // 26.6 degrees rounds to the 45 degree spoke.
    CHECK(facing_dir({0, 0, 0}, {2, 1, 0}) == 1);
    // 22.5 degrees is the tie; lround rounds it up, away from zero.
    CHECK(facing_dir({0, 0, 0}, {0, 0, 0}, 5) == 5);

    GridMap2 map(4, 4);
    map.set_blocked({2, 1, 0});
    RobotPose r{{1, 1, 0}, 0};
    CHECK(apply_move(r, Action2::kRotateLeft, map, 1).dir == 1);
    CHECK(apply_move(r, Action2::kRotateRight, map, 1).dir == 7);
    CHECK(apply_move({{1, 1, 0}, 7}, Action2::kRotateLeft, map, 1).dir == 0);
    CHECK(apply_move(r, Action2::kMoveAhead, map, 1).pos == GridPoint{1, 1, 0});
    CHECK(apply_move({{1, 1, 0}, 2}, Action2::kMoveAhead, map, 1).pos ==
          GridPoint{1, 2, 0});
    CHECK(apply_move({{0, 0, 0}, 4}, Action2::kMoveAhead, map, 1).pos ==
          GridPoint{0, 0, 0});  // map edge
    // 90 degree rotation steps.
    CHECK(apply_move(r, Action2::kRotateLeft, map, 2).dir == 2);
}

TEST_CASE("declare predicate needs both range and visibility") {
    SearchConfig cfg = test_config();
    cfg.target_detector.fov.fov_deg = 45.0;
    cfg.found_dist = 1.0;
    RobotPose r{{3, 3, 0}, 0};
    CHECK(target_found(r, {4, 3, 0}, cfg));
    CHECK(target_found(r, {3, 3, 0}, cfg));        // standing on it
    CHECK(!target_found(r, {5, 3, 0}, cfg));       // too far
    CHECK(!target_found(r, {2, 3, 0}, cfg));       // behind
    CHECK(!target_found(r, {4, 4, 0}, cfg));       // sqrt(2) m away
    cfg.res = 0.5;
    RobotPose diag{{3, 3, 0}, 1};
    CHECK(target_found(diag, {4, 4, 0}, cfg));     // 0.71 m, facing it
}

TEST_CASE("belief histogram: init, argmax, sampling") {
    GridMap2 map(4, 3);
    map.set_blocked({1, 1, 0});
    auto b = Belief2::uniform(map);
    double sum = 0.0;
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 4; ++x) sum += b.at(x, y);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(b.at(1, 1) == 0.0);
    CHECK(b.at(0, 0) == doctest::Approx(1.0 / 11).epsilon(1e-12));

    auto pt = Belief2::point(map, {2, 1, 0});
    CHECK(pt.prob({2, 1, 0}) == 1.0);
    CHECK_THROWS_AS(Belief2::point(map, {1, 1, 0}), EmptyBelief);

    // Ties break to the lowest row-major cell.
    Belief2 tie(4, 3);
    tie.at(2, 0) = 0.5;
    tie.at(1, 2) = 0.5;
    CHECK(tie.argmax() == GridPoint{2, 0, 0});

    Rng rng(3);
    for (int i = 0; i < 50; ++i) CHECK(pt.sample(rng) == GridPoint{2, 1, 0});

    Belief2 zero(4, 3);
    CHECK_THROWS_AS(zero.normalize(), ZeroMass);
}

TEST_CASE("detection update matches the per-cell likelihood product") {
    GridMap2 map(6, 6);
    const SearchConfig cfg = test_config();
    const cos::Pose2 vp{{1, 1, 0}, 0.0};

    for (const std::optional<GridPoint> z :
         {std::optional<GridPoint>{}, std::optional<GridPoint>{{3, 1, 0}}}) {
        auto b = Belief2::uniform(map);
        detection_update(b, map, cfg.res, vp, cfg.target_detector, z);

        std::vector<double> expected(36, 0.0);
        double total = 0.0;
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 6; ++x) {
                expected[y * 6 + x] =
                    cos::detection_prob(z, {x, y, 0}, vp, cfg.target_detector,
                                        cfg.res, map) /
                    36.0;
                total += expected[y * 6 + x];
            }
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 6; ++x)
                CHECK(b.at(x, y) ==
                      doctest::Approx(expected[y * 6 + x] / total).epsilon(1e-12));
    }
}

TEST_CASE("null reading shifts mass out of the fan") {
    GridMap2 map(7, 7);
    const SearchConfig cfg = test_config();
    const cos::Pose2 vp{{3, 3, 0}, 0.0};
    auto b = Belief2::uniform(map);
    detection_update(b, map, cfg.res, vp, cfg.target_detector, std::nullopt);
    // (5,3) sits inside the fan, (1,3) behind the robot.
    const double ratio = b.prob({5, 3, 0}) / b.prob({1, 3, 0});
    CHECK(ratio == doctest::Approx((1.0 - 0.8) / (1.0 - 0.05)).epsilon(1e-12));
}

TEST_CASE("correlated update agrees with the marginal model cell by cell") {
    GridMap2 map(7, 7);
    map.set_blocked({2, 2, 0});
    const SearchConfig cfg = test_config();
    const cos::Pose2 vp{{3, 3, 0}, M_PI / 2};
    const auto cells = map.free_cells();

    const std::vector<cos::CorrelationParams> relations = {
        {true, 2.5}, {false, 2.5}};
    const std::vector<std::optional<GridPoint>> readings = {
        std::nullopt, GridPoint{3, 5, 0}};
    for (const auto& cm : relations) {
        for (const auto& z : readings) {
            auto b = Belief2::uniform(map);
            correlated_update(b, map, cfg.res, vp, cfg.target_detector, cm, z);

            std::vector<double> expected(49, 0.0);
            double total = 0.0;
            for (const auto& c : cells) {
                expected[c.y * 7 + c.x] = cos::correlational_observation_prob(
                    z, c, vp, cfg.target_detector, cm, cells, cfg.res, map);
                total += expected[c.y * 7 + c.x];
            }
            for (const auto& c : cells)
                CHECK(b.prob(c) ==
                      doctest::Approx(expected[c.y * 7 + c.x] / total)
                          .epsilon(1e-9));
        }
    }
}

TEST_CASE("globally empty relation support raises an error") {
    GridMap2 map(4, 4);
    auto b = Belief2::uniform(map);
    // Far at a distance no cell pair on a 4x4 map can exceed.
    CHECK_THROWS_AS(correlated_update(b, map, 1.0, {{0, 0, 0}, 0.0},
                                      test_config().target_detector,
                                      {false, 100.0}, std::nullopt),
                    DegenerateCorrelation);
}

TEST_CASE("generative detections: rates and support") {
    GridMap2 map(9, 9);
    SearchConfig cfg = test_config();
    const cos::Pose2 vp{{4, 4, 0}, 0.0};
    Rng rng(11);

    // Target inside the fan: detections are true positives at its cell.
    int hits = 0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) {
        const auto z = sample_search_observation(map, cfg, vp, {6, 4, 0}, rng);
        REQUIRE(z.detections.size() == 1);
        if (z.detections[0]) {
            ++hits;
            CHECK(*z.detections[0] == GridPoint{6, 4, 0});
        }
    }
    CHECK(std::abs(hits / static_cast<double>(n) - cfg.target_detector.tp) < 0.03);

    // Target behind the robot: only false positives, landing in the fan.
    hits = 0;
    for (int i = 0; i < n; ++i) {
        const auto z = sample_search_observation(map, cfg, vp, {1, 4, 0}, rng);
        if (z.detections[0]) {
            ++hits;
            CHECK(cos::in_fan(vp, *z.detections[0], cfg.target_detector.fov,
                              cfg.res));
        }
    }
    CHECK(std::abs(hits / static_cast<double>(n) - cfg.target_detector.fp) < 0.015);

    // A close-correlated object is placed strictly within the relation
    // distance before being run through its own detector.
    cfg.correlated.push_back({"companion", cfg.target_detector, {true, 2.0}});
    for (int i = 0; i < 500; ++i) {
        const auto z = sample_search_observation(map, cfg, vp, {5, 4, 0}, rng);
        REQUIRE(z.detections.size() == 2);
        if (z.detections[1]) {
            const double d = std::hypot(z.detections[1]->x - 5.0,
                                        z.detections[1]->y - 4.0);
            // True positives sit within the relation disk; false positives
            // can land anywhere in the fan.
            CHECK((d < 2.0 ||
                   cos::in_fan(vp, *z.detections[1], cfg.target_detector.fov,
                               cfg.res)));
        }
    }
}

TEST_CASE("search domain: rewards, terminality and observation slots") {
    GridMap2 map(7, 7);
    SearchConfig cfg = test_config();
    cfg.found_dist = 1.0;
    SearchDomain dom(map, cfg);
    Rng rng(5);

    const SearchState s{{{3, 3, 0}, 0}, {4, 3, 0}, false};
    CHECK(dom.actions(s).size() == 4);
    CHECK(!dom.terminal(s));

    auto found = dom.step(s, Action2::kFind, rng);
    CHECK(found.reward == cfg.find_reward);
    CHECK(found.state.done);
    CHECK(dom.terminal(found.state));

    const SearchState far{{{3, 3, 0}, 0}, {0, 0, 0}, false};
    auto missed = dom.step(far, Action2::kFind, rng);
    CHECK(missed.reward == cfg.find_penalty);

    auto moved = dom.step(s, Action2::kMoveAhead, rng);
    CHECK(moved.reward == cfg.step_cost);
    CHECK(moved.state.robot.pos == GridPoint{4, 3, 0});
    CHECK(moved.state.target == s.target);
    CHECK(moved.obs.detections.size() == 1);

    SearchObservation a{{std::optional<GridPoint>{{1, 2, 0}}, std::nullopt}};
    SearchObservation b{{std::optional<GridPoint>{{1, 2, 0}}, std::nullopt}};
    SearchObservation c{{std::nullopt, std::optional<GridPoint>{{1, 2, 0}}}};
    CHECK(a == b);
    CHECK(a.hash() == b.hash());
    CHECK(!(a == c));
}

TEST_CASE("flat agent finds a known target") {
    GridMap2 map(7, 7);
    SearchConfig cfg = test_config();
    cfg.target_detector.tp = 0.95;
    cfg.target_detector.fov.fov_deg = 90.0;
    planning::PouctConfig pouct;
    pouct.num_sims = 300;
    pouct.max_depth = 12;
    pouct.rmax = cfg.find_reward;
    pouct.rmin = cfg.find_penalty;

    const GridPoint target{5, 3, 0};
    SearchAgent2 agent(map, {{1, 3, 0}, 0}, cfg, pouct, 17);
    agent.set_belief(Belief2::point(map, target));

    Rng world(99);
    bool declared = false, correct = false;
    RobotPose actual{{1, 3, 0}, 0};
    for (int step = 0; step < 25 && !declared; ++step) {
        const Action2 a = agent.plan();
        if (a == Action2::kFind) {
            declared = true;
            correct = target_found(agent.pose(), target, cfg);
        }
        actual = apply_move(actual, a, map, cfg.rotate_step);
        const auto z =
            sample_search_observation(map, cfg, to_pose2(actual), target, world);
        agent.update(a, z);
        CHECK(agent.pose() == actual);
    }
    CHECK(declared);
    CHECK(correct);
}
