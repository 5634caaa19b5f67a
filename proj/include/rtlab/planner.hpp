#pragma once

#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rtlab/track.hpp"

namespace rtlab {

struct Plan {
    int length = 0;
    std::vector<Action> first_actions;  // canonical order
    std::vector<Action> witness;
};

enum class ActionQuality { Optimal, Secure, Fatal };

// A*-based expert under deterministic dynamics. Queries are memoized per map;
// memoization never changes observable results.
class Planner {
public:
    explicit Planner(const TrackMap& map) : map_(map) {}

    // Max over axes of the minimal steps needed to cover the axis distance to
    // the nearest goal cell with |acceleration| <= 1 per step, ignoring
    // walls. Admissible for the unit-cost deterministic problem.
    int heuristic(const State& state) const;

    // Minimal step count, the set of optimal first actions and one witness
    // plan (canonical tie-breaking); nullopt when the goal is unreachable.
    std::optional<Plan> astar(const State& state);

    bool is_solvable(const State& state);

    // Precondition: state is solvable.
    ActionQuality classify_action(const State& state, Action action);

    // Witness plan unrolled as (state, action) pairs. Precondition: solvable.
    std::vector<std::pair<State, Action>> optimal_trace(const State& state);

    const TrackMap& map() const { return map_; }

private:
    int solve_length(const State& state);  // -1 when unsolvable
    std::optional<Action> first_optimal_action(const State& state, int length);

    const TrackMap& map_;
    std::unordered_map<State, int, StateHash> length_cache_;
};

}  // namespace rtlab
