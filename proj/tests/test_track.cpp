#include <algorithm>
#include <array>
#include <map>
#include <set>

#include "common.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "rtlab/track.hpp"

using namespace rtlab;
using namespace rtlab::testing;

TEST_CASE("parse_map accepts a minimal track") {
    const TrackMap m = parse_map("ggg\n...\nsss", "mini");
    CHECK(m.width == 3);
    CHECK(m.height == 3);
    CHECK(m.goal_cells == std::vector<std::pair<int, int>>{{0, 0}, {1, 0}, {2, 0}});
    CHECK(m.start_cells == std::vector<std::pair<int, int>>{{0, 2}, {1, 2}, {2, 2}});
    CHECK(m.traversable(1, 1));
    CHECK(m.traversable(0, 0));
    CHECK_FALSE(m.traversable(-1, 0));
    CHECK_FALSE(m.traversable(0, 3));
}

TEST_CASE("parse_map reports errors with positions") {
    try {
        parse_map("s.\n..q\n.g", "m");
        FAIL("expected throw");
    } catch (const MapParseError& e) {
        CHECK(e.code == MapParseError::Code::RaggedLines);
    }
    try {
        parse_map("sq\n.g", "m");
        FAIL("expected throw");
    } catch (const MapParseError& e) {
        CHECK(e.code == MapParseError::Code::UnknownCharacter);
        CHECK(e.line == 1);
        CHECK(e.column == 2);
    }
    CHECK_THROWS_AS(parse_map("ss\n..", "m"), MapParseError);  // no goal
    CHECK_THROWS_AS(parse_map("gg\n..", "m"), MapParseError);  // no start
    CHECK_THROWS_AS(parse_map("", "m"), MapParseError);
}

TEST_CASE("bundled maps parse and fingerprints are stable") {
    for (const char* name : {"corr7", "lshape", "block"}) {
        const TrackMap m = load_bundled(name);
        CHECK(!m.start_cells.empty());
        CHECK(!m.goal_cells.empty());
    }
    CHECK(map_fingerprint(load_bundled("corr7")) == map_fingerprint(corr7()));
    CHECK(map_fingerprint(load_bundled("corr7")) != map_fingerprint(load_bundled("lshape")));
}

TEST_CASE("round_div_half_away rounds halves away from zero") {
    CHECK(round_div_half_away(1, 2) == 1);
    CHECK(round_div_half_away(-1, 2) == -1);
    CHECK(round_div_half_away(1, 3) == 0);
    CHECK(round_div_half_away(2, 3) == 1);
    CHECK(round_div_half_away(-2, 3) == -1);
    CHECK(round_div_half_away(3, 2) == 2);
    CHECK(round_div_half_away(-3, 2) == -2);
    CHECK(round_div_half_away(0, 5) == 0);
}

TEST_CASE("compute_trajectory covers all five movement cases") {
    CHECK(compute_trajectory(2, 3, 0, 0) == Trajectory{{2, 3}});
    CHECK(compute_trajectory(2, 1, 3, 0) == Trajectory{{2, 1}, {3, 1}, {4, 1}, {5, 1}});
    CHECK(compute_trajectory(4, 4, 0, -2) == Trajectory{{4, 4}, {4, 3}, {4, 2}});
    CHECK(compute_trajectory(0, 0, 3, 1) == Trajectory{{0, 0}, {1, 0}, {2, 1}, {3, 1}});
    CHECK(compute_trajectory(0, 0, -1, -3) == Trajectory{{0, 0}, {0, -1}, {-1, -2}, {-1, -3}});
    CHECK(compute_trajectory(0, 0, 2, 2) == Trajectory{{0, 0}, {1, 1}, {2, 2}});
}

TEST_CASE("compute_trajectory matches the interpolation oracle") {
    for (int x = -3; x <= 3; ++x)
        for (int y = -3; y <= 3; ++y)
            for (int vx = -6; vx <= 6; ++vx)
                for (int vy = -6; vy <= 6; ++vy) {
                    CAPTURE(x);
                    CAPTURE(y);
                    CAPTURE(vx);
                    CAPTURE(vy);
                    REQUIRE(compute_trajectory(x, y, vx, vy) ==
                            interpolation_trajectory(x, y, vx, vy));
                }
}

TEST_CASE("trajectory endpoints and length invariants") {
    Rng rng(7);
    for (int i = 0; i < 2000; ++i) {
        const int x = rng.uniform_int(-20, 20);
        const int y = rng.uniform_int(-20, 20);
        const int vx = rng.uniform_int(-9, 9);
        const int vy = rng.uniform_int(-9, 9);
        const Trajectory t = compute_trajectory(x, y, vx, vy);
        const std::size_t n = static_cast<std::size_t>(std::max(std::abs(vx), std::abs(vy)));
        REQUIRE(t.size() == n + 1);
        REQUIRE(t.front() == std::pair{x, y});
        REQUIRE(t.back() == std::pair{x + vx, y + vy});
        for (std::size_t k = 0; k + 1 < t.size(); ++k) REQUIRE(t[k] != t[k + 1]);
    }
}

TEST_CASE("step_outcome: goal beats wall along the trajectory") {
    const TrackMap m = corr7();
    SUBCASE("crossing the goal column wins even if the segment ends in wall") {
        const StepOutcome o = step_outcome(m, State{2, 1, 0, 0}, 4, 0);
        CHECK(o.kind == StepOutcome::Kind::ReachedGoal);
    }
    SUBCASE("hitting a wall before any goal crashes") {
        const StepOutcome o = step_outcome(m, State{2, 1, 0, 0}, 0, -1);
        CHECK(o.kind == StepOutcome::Kind::Crashed);
    }
    SUBCASE("plain move lands on the endpoint") {
        const StepOutcome o = step_outcome(m, State{2, 1, 0, 0}, 1, 0);
        CHECK(o.kind == StepOutcome::Kind::Moved);
        CHECK(o.next == State{3, 1, 1, 0});
    }
    SUBCASE("zero velocity stays put") {
        const StepOutcome o = step_outcome(m, State{2, 2, 0, 0}, 0, 0);
        CHECK(o.kind == StepOutcome::Kind::Moved);
        CHECK(o.next == State{2, 2, 0, 0});
    }
    SUBCASE("origin cell is skipped during the scan") {
        const StepOutcome o = step_outcome(m, State{4, 1, 0, 0}, -1, 0);
        CHECK(o.kind == StepOutcome::Kind::Moved);
        CHECK(o.next == State{3, 1, -1, 0});
    }
}

TEST_CASE("apply_action rewards and determinism") {
    const TrackMap m = corr7();
    SUBCASE("goal reward") {
        Rng r(1);
        const StepResult res = apply_action(m, State{4, 1, 2, 0}, Action{1, 0}, false, r);
        CHECK(res.outcome.kind == StepOutcome::Kind::ReachedGoal);
        CHECK(res.reward == 100);
        CHECK_FALSE(res.noise_applied);
    }
    SUBCASE("crash reward") {
        Rng r(1);
        const StepResult res = apply_action(m, State{2, 1, 0, 0}, Action{0, -1}, false, r);
        CHECK(res.outcome.kind == StepOutcome::Kind::Crashed);
        CHECK(res.reward == -50);
    }
    SUBCASE("move reward is zero") {
        Rng r(1);
        const StepResult res = apply_action(m, State{2, 1, 0, 0}, Action{1, 0}, false, r);
        CHECK(res.reward == 0);
    }
    SUBCASE("noise replaces the acceleration, not the velocity") {
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            Rng r(seed);
            const StepResult res = apply_action(m, State{2, 1, 1, 0}, Action{1, 0}, true, r);
            if (res.noise_applied) {
                REQUIRE(res.outcome.kind == StepOutcome::Kind::Moved);
                REQUIRE(res.outcome.next == State{3, 1, 1, 0});
                return;
            }
        }
        FAIL("noise never triggered in 200 seeds");
    }
}

TEST_CASE("noise frequency is close to 0.1") {
    const TrackMap m = corr7();
    Rng rng(99);
    int noisy = 0;
    const int trials = 20000;
    for (int i = 0; i < trials; ++i) {
        const StepResult res = apply_action(m, State{2, 2, 0, 0}, Action{0, 0}, true, rng);
        if (res.noise_applied) ++noisy;
    }
    const double frac = static_cast<double>(noisy) / trials;
    CHECK(frac > 0.09);
    CHECK(frac < 0.11);
}

TEST_CASE("canonical action ordering") {
    CHECK(kActions.size() == 9);
    CHECK(kActions.front() == Action{-1, -1});
    CHECK(kActions[4] == Action{0, 0});
    CHECK(kActions.back() == Action{1, 1});
    for (std::size_t i = 0; i < kActions.size(); ++i)
        CHECK(action_index(kActions[i]) == static_cast<int>(i));
}

TEST_CASE("encode_features on corr7") {
    const TrackMap m = corr7();
    const FeatureVector f = encode_features(m, State{2, 2, 1, 0});
    CHECK(f[0] == doctest::Approx(2));
    CHECK(f[1] == doctest::Approx(2));
    CHECK(f[2] == doctest::Approx(1));
    CHECK(f[3] == doctest::Approx(0));
    // Direction order is the canonical action order minus (0,0):
    // (-1,-1),(-1,0),(-1,1),(0,-1),(0,1),(1,-1),(1,0),(1,1)
    CHECK(f[4] == doctest::Approx(1));
    CHECK(f[5] == doctest::Approx(1));
    CHECK(f[6] == doctest::Approx(1));
    CHECK(f[7] == doctest::Approx(1));
    CHECK(f[8] == doctest::Approx(1));
    CHECK(f[9] == doctest::Approx(1));
    CHECK(f[10] == doctest::Approx(3));  // right: (3,2),(4,2),(5,2)
    CHECK(f[11] == doctest::Approx(1));
    // Nearest goal: (5,2) at Manhattan distance 3.
    CHECK(f[12] == doctest::Approx(3));
    CHECK(f[13] == doctest::Approx(0));
    CHECK(f[14] == doctest::Approx(3));
}

TEST_CASE("encode_features goal tie-break prefers smaller y then smaller x") {
    const TrackMap m = corr7();
    const FeatureVector f = encode_features(m, State{4, 2, 0, 0});
    CHECK(f[12] == doctest::Approx(1));
    CHECK(f[13] == doctest::Approx(0));
    const TrackMap t = parse_map("g.g\n.s.", "tie");
    const FeatureVector g = encode_features(t, State{1, 1, 0, 0});
    CHECK(g[12] == doctest::Approx(-1));  // picks (0,0) over (2,0)
    CHECK(g[13] == doctest::Approx(-1));
    CHECK(g[14] == doctest::Approx(2));
}

TEST_CASE("features depend only on the state") {
    const TrackMap m = corr7();
    CHECK(encode_features(m, State{3, 1, -2, 4}) == encode_features(m, State{3, 1, -2, 4}));
}

TEST_CASE("sample_initial_state honours the preset flags") {
    const TrackMap m = corr7();
    SUBCASE("NS-ZV draws only start cells at rest") {
        Rng rng(3);
        SimConfig cfg;
        cfg.random_start = false;
        cfg.random_velocity = false;
        std::set<std::pair<int, int>> seen;
        for (int i = 0; i < 500; ++i) {
            const State s = sample_initial_state(m, cfg, rng);
            CHECK(s.vx == 0);
            CHECK(s.vy == 0);
            CHECK(m.is_start(s.x, s.y));
            seen.insert({s.x, s.y});
        }
        CHECK(seen.size() == m.start_cells.size());
    }
    SUBCASE("RS-ZV draws uniformly over traversable cells") {
        Rng rng(4);
        SimConfig cfg;
        cfg.random_start = true;
        cfg.random_velocity = false;
        std::map<std::pair<int, int>, int> counts;
        const int n = 15000;
        for (int i = 0; i < n; ++i) {
            const State s = sample_initial_state(m, cfg, rng);
            CHECK(s.vx == 0);
            CHECK(s.vy == 0);
            counts[{s.x, s.y}]++;
        }
        CHECK(counts.size() == m.traversable_cells.size());
        for (const auto& [cell, c] : counts) {
            const double frac = static_cast<double>(c) / n;
            CHECK(frac > 1.0 / 15 - 0.02);
            CHECK(frac < 1.0 / 15 + 0.02);
        }
    }
    SUBCASE("RS-RV with a predicate only yields accepted states") {
        Planner planner(m);
        Rng rng(5);
        SimConfig cfg;
        cfg.random_start = true;
        cfg.random_velocity = true;
        for (int i = 0; i < 200; ++i) {
            const State s = sample_initial_state(
                m, cfg, rng, [&](const State& q) { return planner.is_solvable(q); });
            CHECK(std::abs(s.vx) <= cfg.velocity_bound);
            CHECK(std::abs(s.vy) <= cfg.velocity_bound);
            CHECK(planner.is_solvable(s));
        }
    }
    SUBCASE("NS with RV is rejected") {
        SimConfig cfg;
        cfg.random_start = false;
        cfg.random_velocity = true;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
}

TEST_CASE("rng reproducibility and derive_seed separation") {
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    CHECK(Rng(42).next_u64() != c.next_u64());
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
    Rng u(9);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.uniform();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
        const int k = u.uniform_int(-2, 7);
        CHECK(k >= -2);
        CHECK(k <= 7);
    }
}
