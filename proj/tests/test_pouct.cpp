#include <doctest.h>

#include <vector>

#include "mos/planning/pouct.hpp"
#include "mos/planning/tabular_domain.hpp"
#include "mos/pomdp/exact.hpp"
#include "mos/pomdp/tabular.hpp"

using namespace mos;
using namespace mos::pomdp;
using namespace mos::planning;

namespace {

// Two arms, deterministic rewards 1 and 0, single dummy observation.
TabularPomdp bandit() {
    TabularPomdp m(1, 2, 1, 0.5);
    for (int a = 0; a < 2; ++a) {
        m.trans(0, a, 0) = 1.0;
        m.obs(0, a, 0) = 1.0;
        m.reward(0, a) = a == 0 ? 1.0 : 0.0;
    }
    m.validate();
    return m;
}

// Classic two-door listen/open problem; opening ends the episode.
TabularPomdp tiger() {
    TabularPomdp m(3, 3, 2, 0.95);
    for (int s = 0; s < 2; ++s) {
        m.trans(s, 0, s) = 1.0;
        m.reward(s, 0) = -1.0;
        m.obs(s, 0, s) = 0.85;
        m.obs(s, 0, 1 - s) = 0.15;
        for (int a = 1; a <= 2; ++a) {
            m.trans(s, a, 2) = 1.0;
            const int opened = a - 1;  // door index
            m.reward(s, a) = (opened == s) ? -100.0 : 10.0;
            m.obs(s, a, 0) = 0.5;
            m.obs(s, a, 1) = 0.5;
        }
    }
    m.set_terminal(2);
    for (int a = 0; a < 3; ++a) {
        m.trans(2, a, 2) = 1.0;
        m.obs(2, a, 0) = 0.5;
        m.obs(2, a, 1) = 0.5;
    }
    m.validate();
    return m;
}

}  // namespace

TEST_CASE("pouct: identifies the better bandit arm with truncated value") {
    const auto m = bandit();
    TabularDomain dom(m);
    PouctConfig cfg;
    cfg.num_sims = 500;
    cfg.max_depth = 3;  // rewards through depth 3: 1 + .5 + .25 + .125
    cfg.rmax = 1.0;
    cfg.rmin = 0.0;
    Pouct<TabularDomain> planner(dom, cfg);
    Rng rng(1);
    const auto res = planner.plan([](Rng&) { return 0; }, rng);
    CHECK(res.action == 0);
    CHECK(res.stats.size() == 2);
    CHECK(res.stats[0].v == doctest::Approx(1.875).epsilon(0.05 / 1.875));
    CHECK(res.sims == 500);
    CHECK(res.stats[0].n + res.stats[1].n == 500 - 1);  // expansion visit excluded
}

TEST_CASE("pouct: agrees with exact argmax on tiger across seeds") {
    const auto m = tiger();
    TabularDomain dom(m);
    const Belief b{0.5, 0.5, 0.0};
    const int exact_a = exact_best_action(m, b, {.horizon = 4});
    CHECK(exact_a == 0);  // listen first

    int agree = 0;
    for (int seed = 0; seed < 100; ++seed) {
        PouctConfig cfg;
        cfg.num_sims = 2000;
        cfg.max_depth = 3;  // 4 actions deep, same horizon as exact
        cfg.rmax = 10.0;
        cfg.rmin = -100.0;
        Pouct<TabularDomain> planner(dom, cfg);
        Rng rng(seed);
        const auto res =
            planner.plan([](Rng& r) { return r.bernoulli(0.5) ? 1 : 0; }, rng);
        if (res.action == exact_a) ++agree;
    }
    CHECK(agree >= 95);
}

TEST_CASE("pouct: bit-reproducible for identical seeds") {
    const auto m = tiger();
    TabularDomain dom(m);
    PouctConfig cfg;
    cfg.num_sims = 1500;
    cfg.max_depth = 5;
    cfg.rmax = 10.0;
    cfg.rmin = -100.0;

    auto run = [&](std::uint64_t seed) {
        Pouct<TabularDomain> planner(dom, cfg);
        Rng rng(seed);
        auto res = planner.plan([](Rng& r) { return r.bernoulli(0.5) ? 1 : 0; }, rng);
        planner.prune_to(res.action, 0);
        Rng rng2(seed + 1);
        auto res2 = planner.plan([](Rng& r) { return r.bernoulli(0.5) ? 1 : 0; }, rng2);
        return std::pair{res, res2};
    };
    const auto [a1, a2] = run(99);
    const auto [b1, b2] = run(99);
    CHECK(a1.action == b1.action);
    CHECK(a2.action == b2.action);
    REQUIRE(a1.stats.size() == b1.stats.size());
    for (std::size_t i = 0; i < a1.stats.size(); ++i) {
        CHECK(a1.stats[i].n == b1.stats[i].n);
        CHECK(a1.stats[i].v == b1.stats[i].v);  // exact bit equality
        CHECK(a2.stats[i].n == b2.stats[i].n);
        CHECK(a2.stats[i].v == b2.stats[i].v);
    }
}

TEST_CASE("pouct: timeout budget alone drives the loop") {
    const auto m = bandit();
    TabularDomain dom(m);
    PouctConfig cfg;
    cfg.num_sims = 0;
    cfg.timeout_s = 0.05;
    cfg.max_depth = 3;
    cfg.rmax = 1.0;
    cfg.rmin = 0.0;
    Pouct<TabularDomain> planner(dom, cfg);
    Rng rng(3);
    const auto res = planner.plan([](Rng&) { return 0; }, rng);
    CHECK(res.sims > 0);
    CHECK(res.elapsed_s >= 0.05);
    CHECK(res.action == 0);
}

TEST_CASE("pouct: empty belief propagates") {
    const auto m = bandit();
    TabularDomain dom(m);
    PouctConfig cfg;
    cfg.num_sims = 10;
    cfg.rmax = 1.0;
    cfg.rmin = 0.0;
    Pouct<TabularDomain> planner(dom, cfg);
    Rng rng(0);
    CHECK_THROWS_AS(
        (void)planner.plan([](Rng&) -> int { throw EmptyBelief("no particles"); },
                           rng),
        EmptyBelief);
}

TEST_CASE("pouct: rejects config without any budget") {
    const auto m = bandit();
    TabularDomain dom(m);
    PouctConfig cfg;
    cfg.num_sims = 0;
    cfg.timeout_s = 0.0;
    CHECK_THROWS_AS(Pouct<TabularDomain>(dom, cfg), InvalidConfig);
}
