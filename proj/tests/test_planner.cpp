#include <algorithm>
#include <set>

#include "common.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "rtlab/planner.hpp"

using namespace rtlab;
using namespace rtlab::testing;

TEST_CASE("heuristic matches hand-computed values on corr7") {
    const TrackMap m = corr7();
    Planner p(m);
    CHECK(p.heuristic(State{5, 1, 0, 0}) == 0);  // already on a goal cell
    CHECK(p.heuristic(State{2, 1, 0, 0}) == 2);  // distance 3: 1 + 2
    CHECK(p.heuristic(State{2, 1, 3, 0}) == 1);  // one step at v=3 covers it
    CHECK(p.heuristic(State{1, 1, 0, 0}) == 3);  // distance 4: 1 + 2 < 4 <= 1 + 2 + 3
}

TEST_CASE("heuristic closed form: smallest k with k*v + k(k+1)/2 >= d") {
    const TrackMap m = corr7();
    Planner p(m);
    // From (1,2) the nearest goal is (5,2), axis distance 4, v=0: k=2 gives 3,
    // k=3 gives 6 -> heuristic 3... but via velocity the map allows faster
    // plans only if already moving.
    CHECK(p.heuristic(State{1, 2, 0, 0}) == 3);
    CHECK(p.heuristic(State{1, 2, 2, 0}) == 2);  // 2: 3+4 >= 4 after k=1? k=1: 2+1=3 <4; k=2: 4+3=7 >=4
    CHECK(p.heuristic(State{1, 2, 4, 0}) == 1);
}

TEST_CASE("heuristic is admissible on sampled solvable states") {
    for (const char* name : {"corr7", "lshape"}) {
        const TrackMap m = load_bundled(name);
        Planner p(m);
        Rng rng(11);
        int checked = 0;
        while (checked < 40) {
            const std::size_t i = rng.uniform_index(m.traversable_cells.size());
            State s{m.traversable_cells[i].first, m.traversable_cells[i].second,
                    rng.uniform_int(-3, 3), rng.uniform_int(-3, 3)};
            const auto plan = p.astar(s);
            if (!plan) continue;
            CHECK(p.heuristic(s) <= plan->length);
            ++checked;
        }
    }
}

TEST_CASE("astar on corr7 matches hand-checked plans") {
    const TrackMap m = corr7();
    Planner p(m);
    SUBCASE("three steps from the middle start at rest") {
        const auto plan = p.astar(State{1, 1, 0, 0});
        REQUIRE(plan.has_value());
        CHECK(plan->length == 3);
        CHECK(plan->witness.size() == 3);
        // Every witness action must be optimal at its state.
        State s{1, 1, 0, 0};
        for (const Action a : plan->witness) {
            CHECK(p.classify_action(s, a) == ActionQuality::Optimal);
            const StepOutcome o = step_outcome(m, s, s.vx + a.ax, s.vy + a.ay);
            if (o.kind == StepOutcome::Kind::Moved) s = o.next;
        }
    }
    SUBCASE("one accelerating step suffices near the goal") {
        const auto plan = p.astar(State{4, 1, 2, 0});
        REQUIRE(plan.has_value());
        CHECK(plan->length == 1);
    }
    SUBCASE("fast incoming velocity still crosses the goal column") {
        const auto plan = p.astar(State{4, 1, 4, 0});
        REQUIRE(plan.has_value());
        CHECK(plan->length == 1);
    }
    SUBCASE("a state on the goal line still needs one goal-reaching step") {
        const auto plan = p.astar(State{5, 2, 0, 0});
        REQUIRE(plan.has_value());
        CHECK(plan->length == 1);  // slide along the goal column
    }
}

TEST_CASE("first_actions is exactly the optimal-action set in canonical order") {
    const TrackMap m = corr7();
    Planner p(m);
    const State s{2, 1, 0, 0};
    const auto plan = p.astar(s);
    REQUIRE(plan.has_value());
    std::vector<Action> expected;
    for (const Action a : kActions) {
        const StepOutcome o = step_outcome(m, s, s.vx + a.ax, s.vy + a.ay);
        if (o.kind == StepOutcome::Kind::Crashed) continue;
        if (o.kind == StepOutcome::Kind::ReachedGoal) {
            if (plan->length == 1) expected.push_back(a);
            continue;
        }
        const auto sub = p.astar(o.next);
        if (sub && 1 + sub->length == plan->length) expected.push_back(a);
    }
    CHECK(plan->first_actions == expected);
    CHECK(!plan->first_actions.empty());
    CHECK(std::is_sorted(plan->first_actions.begin(), plan->first_actions.end(),
                         [](Action a, Action b) { return action_index(a) < action_index(b); }));
}

TEST_CASE("is_solvable on corr7") {
    const TrackMap m = corr7();
    Planner p(m);
    CHECK(p.is_solvable(State{1, 1, 0, 0}));
    CHECK(p.is_solvable(State{4, 1, 4, 0}));
    // Velocity slamming into the left wall regardless of the acceleration.
    CHECK_FALSE(p.is_solvable(State{1, 1, -8, 0}));
    // Velocity pointing down through the bottom wall.
    CHECK_FALSE(p.is_solvable(State{1, 3, 0, 5}));
    // Wall cells are not solvable states.
    CHECK_FALSE(p.is_solvable(State{0, 0, 0, 0}));
}

TEST_CASE("classify_action covers all three classes") {
    const TrackMap m = corr7();
    Planner p(m);
    CHECK(p.classify_action(State{4, 1, 2, 0}, Action{1, 0}) == ActionQuality::Optimal);
    CHECK(p.classify_action(State{2, 1, 0, 0}, Action{0, -1}) == ActionQuality::Fatal);
    // Idling at rest wastes a step but keeps the state solvable.
    CHECK(p.classify_action(State{1, 1, 0, 0}, Action{0, 0}) == ActionQuality::Secure);
    // Moving into an unsolvable successor is fatal even without a crash.
    // On lshape, racing down the right arm too fast to brake before the wall.
    const TrackMap l = load_bundled("lshape");
    Planner pl(l);
    bool found_fatal_move = false;
    Rng rng(13);
    for (int i = 0; i < 4000 && !found_fatal_move; ++i) {
        const std::size_t ci = rng.uniform_index(l.traversable_cells.size());
        const State s{l.traversable_cells[ci].first, l.traversable_cells[ci].second,
                      rng.uniform_int(-4, 4), rng.uniform_int(-4, 4)};
        if (!pl.is_solvable(s)) continue;
        for (const Action a : kActions) {
            const StepOutcome o = step_outcome(l, s, s.vx + a.ax, s.vy + a.ay);
            if (o.kind != StepOutcome::Kind::Moved || pl.is_solvable(o.next)) continue;
            CHECK(pl.classify_action(s, a) == ActionQuality::Fatal);
            found_fatal_move = true;
            break;
        }
    }
    CHECK(found_fatal_move);
}

TEST_CASE("every solvable state has at least one non-fatal classification partition") {
    const TrackMap m = load_bundled("lshape");
    Planner p(m);
    Rng rng(17);
    int checked = 0;
    while (checked < 30) {
        const std::size_t ci = rng.uniform_index(m.traversable_cells.size());
        const State s{m.traversable_cells[ci].first, m.traversable_cells[ci].second,
                      rng.uniform_int(-3, 3), rng.uniform_int(-3, 3)};
        if (!p.is_solvable(s)) continue;
        int optimal = 0;
        for (const Action a : kActions)
            if (p.classify_action(s, a) == ActionQuality::Optimal) ++optimal;
        CHECK(optimal >= 1);
        ++checked;
    }
}

TEST_CASE("optimal_trace replays the witness to the goal") {
    const TrackMap m = corr7();
    Planner p(m);
    const auto trace = p.optimal_trace(State{1, 1, 0, 0});
    REQUIRE(trace.size() == 3);
    State s = trace.front().first;
    CHECK(s == State{1, 1, 0, 0});
    for (std::size_t i = 0; i < trace.size(); ++i) {
        CHECK(trace[i].first == s);
        CHECK(p.is_solvable(trace[i].first));
        const Action a = trace[i].second;
        const StepOutcome o = step_outcome(m, s, s.vx + a.ax, s.vy + a.ay);
        if (i + 1 == trace.size()) {
            CHECK(o.kind == StepOutcome::Kind::ReachedGoal);
        } else {
            REQUIRE(o.kind == StepOutcome::Kind::Moved);
            s = o.next;
        }
    }
    CHECK(p.optimal_trace(State{4, 1, 2, 0}).size() == 1);
}

TEST_CASE("astar agrees with the brute-force search oracle") {
    Rng rng(23);
    for (const char* name : {"corr7", "lshape"}) {
        const TrackMap m = load_bundled(name);
        Planner p(m);
        int checked = 0;
        while (checked < 60) {
            const std::size_t ci = rng.uniform_index(m.traversable_cells.size());
            const State s{m.traversable_cells[ci].first, m.traversable_cells[ci].second,
                          rng.uniform_int(-3, 3), rng.uniform_int(-3, 3)};
            const auto oracle = bfs_plan_length(m, s);
            const auto plan = p.astar(s);
            CAPTURE(name);
            CAPTURE(s.x);
            CAPTURE(s.y);
            CAPTURE(s.vx);
            CAPTURE(s.vy);
            REQUIRE(plan.has_value() == oracle.has_value());
            if (plan) REQUIRE(plan->length == *oracle);
            ++checked;
        }
    }
}

TEST_CASE("planner results are stable under memoization") {
    const TrackMap m = corr7();
    Planner p(m);
    const State s{1, 2, 0, 0};
    const auto first = p.astar(s);
    const auto again = p.astar(s);
    REQUIRE(first.has_value());
    REQUIRE(again.has_value());
    CHECK(first->length == again->length);
    CHECK(first->first_actions == again->first_actions);
    CHECK(first->witness == again->witness);
    Planner fresh(m);
    const auto cold = fresh.astar(s);
    CHECK(cold->length == first->length);
    CHECK(cold->first_actions == first->first_actions);
    CHECK(cold->witness == first->witness);
}
