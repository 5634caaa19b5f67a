#include "rtlab/planner.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <queue>
#include <stdexcept>

namespace rtlab {

namespace {

// Minimal number of steps after which the car, starting at axis velocity v,
// can have covered at least distance d (walls ignored). With k steps the
// maximal displacement is k*v + k*(k+1)/2.
int axis_steps(int d, int v) {
    if (d < 0) {
        d = -d;
        v = -v;
    }
    if (d == 0) return 0;
    int k = 0;
    long long reach = 0;
    while (reach < d) {
        ++k;
        reach = static_cast<long long>(k) * v + static_cast<long long>(k) * (k + 1) / 2;
    }
    return k;
}

struct OpenEntry {
    int f;
    long long seq;  // insertion order keeps expansion deterministic
    State s;
    int g;
};

struct OpenCompare {
    bool operator()(const OpenEntry& a, const OpenEntry& b) const {
        if (a.f != b.f) return a.f > b.f;
        return a.seq > b.seq;
    }
};

}  // namespace

int Planner::heuristic(const State& state) const {
    int best = std::numeric_limits<int>::max();
    for (const auto& [gx, gy] : map_.goal_cells) {
        const int h = std::max(axis_steps(gx - state.x, state.vx), axis_steps(gy - state.y, state.vy));
        if (h < best) best = h;
    }
    return best;
}

int Planner::solve_length(const State& state) {
    if (auto it = length_cache_.find(state); it != length_cache_.end()) return it->second;
    if (!map_.traversable(state.x, state.y)) {
        length_cache_[state] = -1;
        return -1;
    }

    std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenCompare> open;
    std::unordered_map<State, int, StateHash> best_g;
    long long seq = 0;
    int best_goal = std::numeric_limits<int>::max();

    open.push({heuristic(state), seq++, state, 0});
    best_g[state] = 0;

    while (!open.empty()) {
        const OpenEntry cur = open.top();
        open.pop();
        if (cur.f >= best_goal) break;  // admissible heuristic: nothing better left
        if (auto it = best_g.find(cur.s); it != best_g.end() && cur.g > it->second) continue;

        for (const Action a : kActions) {
            const StepOutcome out = step_outcome(map_, cur.s, cur.s.vx + a.ax, cur.s.vy + a.ay);
            if (out.kind == StepOutcome::Kind::ReachedGoal) {
                if (cur.g + 1 < best_goal) best_goal = cur.g + 1;
            } else if (out.kind == StepOutcome::Kind::Moved) {
                const int g = cur.g + 1;
                auto it = best_g.find(out.next);
                if (it == best_g.end() || g < it->second) {
                    best_g[out.next] = g;
                    open.push({g + heuristic(out.next), seq++, out.next, g});
                }
            }
        }
    }

    const int result = best_goal == std::numeric_limits<int>::max() ? -1 : best_goal;
    length_cache_[state] = result;
    return result;
}

std::optional<Action> Planner::first_optimal_action(const State& state, int length) {
    for (const Action a : kActions) {
        const StepOutcome out = step_outcome(map_, state, state.vx + a.ax, state.vy + a.ay);
        if (out.kind == StepOutcome::Kind::ReachedGoal) {
            if (length == 1) return a;
        } else if (out.kind == StepOutcome::Kind::Moved) {
            if (solve_length(out.next) == length - 1) return a;
        }
    }
    return std::nullopt;
}

std::optional<Plan> Planner::astar(const State& state) {
    const int length = solve_length(state);
    if (length < 0) return std::nullopt;

    Plan plan;
    plan.length = length;
    for (const Action a : kActions) {
        const StepOutcome out = step_outcome(map_, state, state.vx + a.ax, state.vy + a.ay);
        if (out.kind == StepOutcome::Kind::ReachedGoal) {
            if (length == 1) plan.first_actions.push_back(a);
        } else if (out.kind == StepOutcome::Kind::Moved) {
            if (solve_length(out.next) == length - 1) plan.first_actions.push_back(a);
        }
    }

    State cur = state;
    for (int remaining = length; remaining > 0; --remaining) {
        const auto a = first_optimal_action(cur, remaining);
        if (!a) throw std::logic_error("optimal plan unroll lost the goal");
        plan.witness.push_back(*a);
        const StepOutcome out = step_outcome(map_, cur, cur.vx + a->ax, cur.vy + a->ay);
        if (out.kind == StepOutcome::Kind::ReachedGoal) break;
        cur = out.next;
    }
    return plan;
}

bool Planner::is_solvable(const State& state) { return solve_length(state) >= 0; }

ActionQuality Planner::classify_action(const State& state, Action action) {
    const int length = solve_length(state);
    if (length < 0) throw std::invalid_argument("classify_action queried on an unsolvable state");

    const StepOutcome out = step_outcome(map_, state, state.vx + action.ax, state.vy + action.ay);
    switch (out.kind) {
        case StepOutcome::Kind::Crashed:
            return ActionQuality::Fatal;
        case StepOutcome::Kind::ReachedGoal:
            // a goal-reaching step is a length-1 plan, minimal by definition
            return ActionQuality::Optimal;
        case StepOutcome::Kind::Moved: {
            const int next_length = solve_length(out.next);
            if (next_length < 0) return ActionQuality::Fatal;
            if (1 + next_length == length) return ActionQuality::Optimal;
            return ActionQuality::Secure;
        }
    }
    return ActionQuality::Secure;
}

std::vector<std::pair<State, Action>> Planner::optimal_trace(const State& state) {
    const int length = solve_length(state);
    if (length < 0) throw std::invalid_argument("optimal_trace queried on an unsolvable state");

    std::vector<std::pair<State, Action>> trace;
    trace.reserve(static_cast<std::size_t>(length));
    State cur = state;
    for (int remaining = length; remaining > 0; --remaining) {
        const auto a = first_optimal_action(cur, remaining);
        if (!a) throw std::logic_error("optimal plan unroll lost the goal");
        trace.emplace_back(cur, *a);
        const StepOutcome out = step_outcome(map_, cur, cur.vx + a->ax, cur.vy + a->ay);
        if (out.kind == StepOutcome::Kind::ReachedGoal) break;
        cur = out.next;
    }
    return trace;
}

}  // namespace rtlab
