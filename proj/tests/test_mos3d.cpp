#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "mos/mos3d/agent.hpp"
#include "mos/mos3d/domain.hpp"
#include "mos/mos3d/mos3d.hpp"

using namespace mos;
using namespace mos::mos3d;
using octree::NodeId;
using octree::OctreeBelief;
using sensing::OccupancyGrid;

namespace {

OctreeBelief uniform_belief(int dim) {
    std::vector<GridPoint> cells;
    for (int z = 0; z < dim; ++z)
        for (int y = 0; y < dim; ++y)
            for (int x = 0; x < dim; ++x) cells.push_back({x, y, z});
    return octree::init_octree_belief_from_cells(dim, cells, {});
}

OctreeBelief point_belief(int dim, const GridPoint& g) {
    return octree::init_octree_belief_from_cells(dim, {g}, {});
}

}  // namespace

TEST_CASE("view graph: single free cell gives a single node and no edges") {
    OccupancyGrid occ(8);
    for (int z = 0; z < 8; ++z)
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x)
                if (!(x == 5 && y == 2 && z == 3)) occ.set({x, y, z});
    auto bel = uniform_belief(8);
    const auto g = sample_view_graph({&bel}, occ, {});
    REQUIRE(g.nodes.size() == 1);
    CHECK(g.nodes[0] == GridPoint{5, 2, 3});
    CHECK(g.edges.empty());
    CHECK(g.connected());
}

TEST_CASE("view graph: no free cell throws") {
    OccupancyGrid occ(4);
    for (int z = 0; z < 4; ++z)
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x) occ.set({x, y, z});
    auto bel = uniform_belief(4);
    CHECK_THROWS_AS(sample_view_graph({&bel}, occ, {}), NoFreeSpace);
}

TEST_CASE("view graph: uniform scores fall back to position order") {
    OccupancyGrid occ(8);
    auto bel = uniform_belief(8);
    ViewGraphConfig cfg;
    cfg.k = 4;
    cfg.sep = 3.0;
    const auto g = sample_view_graph({&bel}, occ, cfg);
    REQUIRE(g.nodes.size() == 4);
    // All scores tie, so the first node is the lexicographically smallest
    // cell and the rest follow greedily under the separation constraint.
    CHECK(g.nodes[0] == GridPoint{0, 0, 0});
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        for (std::size_t j = i + 1; j < g.nodes.size(); ++j)
            CHECK((g.nodes[i].center() - g.nodes[j].center()).norm() >= cfg.sep);
    const auto again = sample_view_graph({&bel}, occ, cfg);
    CHECK(again.nodes == g.nodes);
}

TEST_CASE("view graph: kept nodes dominate every rejected candidate") {
    // Exhaustive check on an 8^3 grid with a lumpy random belief.
    Rng rng(99);
    OccupancyGrid occ(8);
    for (int i = 0; i < 40; ++i)
        occ.set({static_cast<int>(rng.uniform_index(8)),
                 static_cast<int>(rng.uniform_index(8)),
                 static_cast<int>(rng.uniform_index(8))});
    std::vector<GridPoint> cells;
    for (int i = 0; i < 200; ++i)
        cells.push_back({static_cast<int>(rng.uniform_index(8)),
                         static_cast<int>(rng.uniform_index(8)),
                         static_cast<int>(rng.uniform_index(8))});
    std::vector<octree::PriorEntry> prior{{NodeId{1, 3, 3, 3}, 64.0}};
    auto bel = octree::init_octree_belief_from_cells(8, cells, prior);

    ViewGraphConfig cfg;
    cfg.k = 6;
    cfg.sep = 2.0;
    cfg.level = 1;
    const auto g = sample_view_graph({&bel}, occ, cfg);
    REQUIRE(g.nodes.size() == 6);
    CHECK(g.connected());
    for (int i = 0; i < 6; ++i) CHECK(g.degree(i) <= cfg.max_degree);

    // Independent scoring pass over all candidates.
    auto score_of = [&](const GridPoint& p) {
        return bel.prob(NodeId{cfg.level, p.x >> cfg.level, p.y >> cfg.level,
                               p.z >> cfg.level});
    };
    const double min_kept =
        *std::min_element(g.scores.begin(), g.scores.end());
    const std::set<GridPoint> kept(g.nodes.begin(), g.nodes.end());
    for (int z = 0; z < 8; ++z)
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) {
                const GridPoint p{x, y, z};
                if (occ.occupied(p) || kept.count(p)) continue;
                // A rejected candidate either scores no higher than every
                // kept node, or was blocked by a kept node within sep that
                // scores at least as much.
                if (score_of(p) <= min_kept + 1e-12) continue;
                bool blocked = false;
                for (const auto& n : g.nodes)
                    if ((n.center() - p.center()).norm() < cfg.sep &&
                        score_of(n) >= score_of(p) - 1e-12)
                        blocked = true;
                CAPTURE(p.x);
                CAPTURE(p.y);
                CAPTURE(p.z);
                CHECK(blocked);
            }
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        CHECK(g.scores[i] == doctest::Approx(score_of(g.nodes[i])).epsilon(1e-12));
}

TEST_CASE("coverage: threshold zero never resamples, point mass is covered") {
    OccupancyGrid occ(8);
    auto bel = uniform_belief(8);
    ViewGraphConfig cfg;
    const auto g = sample_view_graph({&bel}, occ, cfg);
    CHECK(!should_resample(g, {&bel}, 0.0));

    auto point = point_belief(8, g.nodes[0]);
    CHECK(covered_probability(g, {&point}) == doctest::Approx(1.0));
    CHECK(!should_resample(g, {&point}, 0.4));
}

TEST_CASE("coverage: mass split across known coarse cells") {
    // Belief: 3/4 of the mass in the level-1 cell at (0,0,0), 1/4 in the
    // level-1 cell at (3,3,3).  A graph whose nodes cover only the first
    // cell covers exactly 0.75.
    std::vector<GridPoint> cells{{0, 0, 0}, {1, 1, 1}, {0, 1, 0}, {7, 7, 7}};
    std::vector<octree::PriorEntry> prior{{NodeId{1, 0, 0, 0}, 3.0},
                                          {NodeId{1, 3, 3, 3}, 1.0}};
    auto bel = octree::init_octree_belief_from_cells(8, cells, prior);

    ViewPositionGraph g;
    g.level = 1;
    g.nodes = {{0, 0, 0}, {1, 1, 0}};  // same level-1 cell, counted once
    CHECK(covered_probability(g, {&bel}) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(should_resample(g, {&bel}, 0.8));
    CHECK(!should_resample(g, {&bel}, 0.7));

    g.nodes.push_back({6, 6, 6});
    CHECK(covered_probability(g, {&bel}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("transition: find adds visible objects, move reorients") {
    OccupancyGrid occ(8);
    Mos3dConfig cfg;
    cfg.far_range = 6.0;

    Mos3dState s;
    s.robot = {{0, 4, 4}, quantize_dir(Vec3(1, 0, 0))};
    s.objects = {{4, 4, 4}, {7, 0, 0}};

    SUBCASE("find with an object in view adds exactly that object") {
        const auto s2 = transition(s, Mos3dAction::find(), occ, cfg);
        CHECK(s2.is_found(0));
        CHECK(!s2.is_found(1));
        CHECK(s2.robot == s.robot);
        CHECK(reward(s, Mos3dAction::find(), occ, cfg) == 100.0);
    }
    SUBCASE("find with nothing in view is penalized and changes nothing") {
        Mos3dState away = s;
        away.robot.dir = quantize_dir(Vec3(0, 0, -1));
        const auto s2 = transition(away, Mos3dAction::find(), occ, cfg);
        CHECK(s2.found == 0);
        CHECK(reward(away, Mos3dAction::find(), occ, cfg) == -100.0);
    }
    SUBCASE("find when everything is already found is penalized") {
        Mos3dState done = s;
        done.found = 0b11;
        CHECK(reward(done, Mos3dAction::find(), occ, cfg) == -100.0);
        CHECK(transition(done, Mos3dAction::find(), occ, cfg).found == 0b11);
    }
    SUBCASE("move to the current cell keeps position, updates orientation") {
        Mos3dState off = s;
        off.robot.dir = quantize_dir(Vec3(0, 0, 1));
        const auto s2 = transition(off, Mos3dAction::move(off.robot.pos), occ, cfg);
        CHECK(s2.robot.pos == off.robot.pos);
        CHECK(s2.robot.dir == quantize_dir(Vec3(1, 0, 0)));  // toward object 0
        CHECK(reward(off, Mos3dAction::move(off.robot.pos), occ, cfg) == -1.0);
    }
    SUBCASE("move one cell costs one step") {
        CHECK(reward(s, Mos3dAction::move({1, 4, 4}), occ, cfg) == -1.0);
        CHECK(reward(s, Mos3dAction::move({3, 4, 4}), occ, cfg) == -3.0);
    }
    SUBCASE("orientation targets the nearest unfound object") {
        Mos3dState half = s;
        half.found = 0b01;  // object 0 found, only (7,0,0) remains
        const auto s2 = transition(half, Mos3dAction::move({6, 1, 1}), occ, cfg);
        CHECK(s2.robot.dir == quantize_dir(Vec3(1, -1, -1)));
    }
    SUBCASE("found set is monotone along any action sequence") {
        Rng rng(3);
        Mos3dState cur = s;
        for (int step = 0; step < 60; ++step) {
            const bool move = rng.bernoulli(0.5);
            const Mos3dAction a =
                move ? Mos3dAction::move({static_cast<int>(rng.uniform_index(8)),
                                          static_cast<int>(rng.uniform_index(8)),
                                          static_cast<int>(rng.uniform_index(8))})
                     : Mos3dAction::find();
            const auto nxt = transition(cur, a, occ, cfg);
            CHECK((nxt.found & cur.found) == cur.found);
            cur = nxt;
        }
    }
}

TEST_CASE("observation density follows per-voxel agreement") {
    Mos3dState s;
    s.objects = {{2, 2, 2}, {5, 5, 5}};
    const double a = 0.9;
    using VO = sensing::VolumetricObservation;

    VO correct;
    correct.labels = {{{1, 2, 2}, VO::kFree}, {{2, 2, 2}, 0}, {{3, 2, 2}, VO::kFree}};
    std::sort(correct.labels.begin(), correct.labels.end());
    CHECK(observation_density(correct, s, a) == doctest::Approx(a).epsilon(1e-12));

    VO missed;  // object voxel read back as free
    missed.labels = {{{2, 2, 2}, VO::kFree}};
    CHECK(observation_density(missed, s, a) == doctest::Approx(1.0 - a));

    VO wrong;  // disagreement at k=3 voxels
    wrong.labels = {{{2, 2, 2}, VO::kFree}, {{5, 5, 5}, 0}, {{0, 0, 0}, 1}};
    std::sort(wrong.labels.begin(), wrong.labels.end());
    CHECK(observation_density(wrong, s, a) ==
          doctest::Approx(std::pow(1.0 - a, 3)).epsilon(1e-12));

    CHECK(observation_density(VO{}, s, a) == 1.0);  // all unknown
}

TEST_CASE("baselines: single node graphs and detection handling") {
    ViewPositionGraph g;
    g.nodes = {{3, 3, 3}};
    auto bel = point_belief(8, {7, 7, 7});
    Rng rng(1);
    CHECK(greedy_action({&bel}, g, false) == Mos3dAction::move({3, 3, 3}));
    CHECK(random_action(g, false, rng) == Mos3dAction::move({3, 3, 3}));
    CHECK(greedy_action({&bel}, g, true) == Mos3dAction::find());
    CHECK(random_action(g, true, rng) == Mos3dAction::find());
}

TEST_CASE("baselines: greedy picks the node nearest the belief argmax") {
    Rng rng(12);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<GridPoint> cells;
        for (int i = 0; i < 60; ++i)
            cells.push_back({static_cast<int>(rng.uniform_index(8)),
                             static_cast<int>(rng.uniform_index(8)),
                             static_cast<int>(rng.uniform_index(8))});
        const GridPoint peak{static_cast<int>(rng.uniform_index(8)),
                             static_cast<int>(rng.uniform_index(8)),
                             static_cast<int>(rng.uniform_index(8))};
        for (int i = 0; i < 20; ++i) cells.push_back(peak);  // dedup keeps one
        auto bel = octree::init_octree_belief_from_cells(8, cells, {});
        bel.multiply_ground(peak, 50.0);

        ViewPositionGraph g;
        for (int i = 0; i < 6; ++i)
            g.nodes.push_back({static_cast<int>(rng.uniform_index(8)),
                               static_cast<int>(rng.uniform_index(8)),
                               static_cast<int>(rng.uniform_index(8))});

        const auto a = greedy_action({&bel}, g, false);
        REQUIRE(a.kind == Mos3dAction::kMove);
        // Exhaustive nearest-node check against the known argmax cell.
        double best = std::numeric_limits<double>::infinity();
        GridPoint best_node{0, 0, 0};
        for (const auto& n : g.nodes) {
            const double d = (n.center() - peak.center()).norm();
            if (d < best) {
                best = d;
                best_node = n;
            }
        }
        CHECK(a.target == best_node);
    }
}

TEST_CASE("planning domain: terminal, actions, and deterministic steps") {
    OccupancyGrid occ(8);
    auto bel = uniform_belief(8);
    const auto g = sample_view_graph({&bel}, occ, {});
    Mos3dConfig cfg;
    Mos3dDomain dom(occ, g, cfg);

    Mos3dState s;
    s.robot = {{0, 0, 0}, quantize_dir(Vec3(1, 1, 1))};
    s.objects = {{4, 4, 4}};
    CHECK(!dom.terminal(s));
    s.found = 1;
    CHECK(dom.terminal(s));
    s.found = 0;

    const auto acts = dom.actions(s);
    REQUIRE(acts.size() == g.nodes.size() + 1);
    CHECK(acts.back() == Mos3dAction::find());

    Rng r1(7), r2(7);
    const auto o1 = dom.step(s, acts[0], r1);
    const auto o2 = dom.step(s, acts[0], r2);
    CHECK(o1.state == o2.state);
    CHECK(o1.obs == o2.obs);
    CHECK(o1.reward == o2.reward);
}

TEST_CASE("agent: point-mass belief leads to finding the object") {
    // Single object, belief already concentrated on the true cell; the
    // planner should navigate into view and take Find within a few actions.
    OccupancyGrid occ(8);
    const GridPoint target{6, 6, 2};
    std::vector<octree::OctreeBelief> beliefs;
    beliefs.push_back(point_belief(8, target));

    AgentSetup setup;
    setup.model.far_range = 5.0;
    setup.pouct.num_sims = 400;
    setup.pouct.max_depth = 8;
    setup.pouct.rmax = 100.0;
    setup.pouct.rmin = -100.0;

    Mos3dAgent agent(occ, std::move(beliefs), {{0, 0, 0}, 25}, setup, 42);

    bool found = false;
    Mos3dState truth;
    truth.robot = agent.pose();
    truth.objects = {target};
    for (int step = 0; step < 8 && !found; ++step) {
        const auto plan = agent.plan();
        truth.robot = agent.pose();
        const auto next = transition(truth, plan.action, occ, setup.model);
        if (plan.action.kind == Mos3dAction::kFind && next.is_found(0)) found = true;
        truth = next;
        agent.set_pose(truth.robot);
        agent.set_found(truth.found);
    }
    CHECK(found);
}

TEST_CASE("agent: planning is reproducible for a fixed seed") {
    OccupancyGrid occ(8);
    auto make_agent = [&]() {
        std::vector<octree::OctreeBelief> beliefs;
        beliefs.push_back(uniform_belief(8));
        AgentSetup setup;
        setup.pouct.num_sims = 200;
        setup.pouct.max_depth = 5;
        return Mos3dAgent(occ, std::move(beliefs), {{0, 0, 0}, 25}, setup, 9);
    };
    auto a1 = make_agent();
    auto a2 = make_agent();
    const auto p1 = a1.plan();
    const auto p2 = a2.plan();
    CHECK(p1.action == p2.action);
    REQUIRE(p1.stats.size() == p2.stats.size());
    for (std::size_t i = 0; i < p1.stats.size(); ++i) {
        CHECK(p1.stats[i].n == p2.stats[i].n);
        CHECK(p1.stats[i].v == p2.stats[i].v);
    }
}

TEST_CASE("agent: volumetric updates concentrate belief on the detection") {
    OccupancyGrid occ(8);
    std::vector<octree::OctreeBelief> beliefs;
    beliefs.push_back(uniform_belief(8));
    AgentSetup setup;
    setup.pouct.num_sims = 50;
    Mos3dAgent agent(occ, std::move(beliefs), {{0, 4, 4}, quantize_dir(Vec3(1, 0, 0))},
                     setup, 5);

    // A full-coverage frame: detection at one voxel, free everywhere else.
    // Unlabeled voxels keep their mass untouched, so concentration toward
    // the detection needs the free evidence to actually cover the grid.
    const GridPoint seen{3, 4, 4};
    sensing::VolumetricObservation z;
    for (int zz = 0; zz < 8; ++zz)
        for (int yy = 0; yy < 8; ++yy)
            for (int xx = 0; xx < 8; ++xx)
                z.labels.push_back(
                    {{xx, yy, zz}, GridPoint{xx, yy, zz} == seen ? 0 : -1});
    std::sort(z.labels.begin(), z.labels.end());

    const double before = agent.beliefs()[0].prob(seen);
    agent.update(z);
    const double after = agent.beliefs()[0].prob(seen);
    CHECK(after > before);
    CHECK(agent.beliefs()[0].argmax_cell() == seen);

    // A free reading drops mass in view and pushes it elsewhere.
    const GridPoint probe{5, 4, 4};
    sensing::VolumetricObservation miss;
    miss.labels = {{probe, -1}};
    const double at5 = agent.beliefs()[0].prob(probe);
    agent.update(miss);
    CHECK(agent.beliefs()[0].prob(probe) < at5);
}
