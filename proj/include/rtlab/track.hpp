#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rtlab/rng.hpp"

namespace rtlab {

enum class CellKind : std::uint8_t { Wall, Free, Start, Goal };

struct MapParseError : std::runtime_error {
    enum class Code { RaggedLines, UnknownCharacter, NoStartCells, NoGoalCells, Empty };
    MapParseError(Code c, int line, int column, const std::string& msg)
        : std::runtime_error(msg), code(c), line(line), column(column) {}
    Code code;
    int line;    // 1-based, 0 if not applicable
    int column;  // 1-based, 0 if not applicable
};

// Grid map. x is the column, y is the row, y grows downward. Everything
// outside the grid counts as wall.
struct TrackMap {
    int width = 0;
    int height = 0;
    std::vector<CellKind> cells;  // row-major
    std::string id;

    // canonical cell order: smaller y first, then smaller x
    std::vector<std::pair<int, int>> start_cells;
    std::vector<std::pair<int, int>> goal_cells;
    std::vector<std::pair<int, int>> traversable_cells;

    CellKind at(int x, int y) const {
        if (x < 0 || x >= width || y < 0 || y >= height) return CellKind::Wall;
        return cells[static_cast<std::size_t>(y) * width + x];
    }
    bool traversable(int x, int y) const { return at(x, y) != CellKind::Wall; }
    bool is_goal(int x, int y) const { return at(x, y) == CellKind::Goal; }
    bool is_start(int x, int y) const { return at(x, y) == CellKind::Start; }
};

// Map alphabet: '#' wall, '.' free, 's' start, 'g' goal.
TrackMap parse_map(const std::string& text, const std::string& id = "");
TrackMap load_map_file(const std::string& path);
// FNV-1a over the normalized map text; stable map fingerprint for manifests.
std::uint64_t map_fingerprint(const TrackMap& map);

struct Action {
    int ax = 0;
    int ay = 0;
    bool operator==(const Action&) const = default;
};

// Canonical total order: (ax, ay) lexicographic with -1 < 0 < 1.
inline constexpr std::array<Action, 9> kActions = {{
    {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 0}, {0, 1}, {1, -1}, {1, 0}, {1, 1},
}};

inline int action_index(Action a) { return (a.ax + 1) * 3 + (a.ay + 1); }

struct State {
    int x = 0;
    int y = 0;
    int vx = 0;
    int vy = 0;
    bool operator==(const State&) const = default;
};

struct StateHash {
    std::size_t operator()(const State& s) const {
        std::uint64_t k = (static_cast<std::uint64_t>(static_cast<std::uint16_t>(s.x)) << 48) |
                          (static_cast<std::uint64_t>(static_cast<std::uint16_t>(s.y)) << 32) |
                          (static_cast<std::uint64_t>(static_cast<std::uint16_t>(s.vx)) << 16) |
                          static_cast<std::uint64_t>(static_cast<std::uint16_t>(s.vy));
        k ^= k >> 33;
        k *= 0xff51afd7ed558ccdULL;
        k ^= k >> 33;
        return static_cast<std::size_t>(k);
    }
};

using Trajectory = std::vector<std::pair<int, int>>;

// round(num/den) with ties going half away from zero; den > 0
inline int round_div_half_away(long long num, long long den) {
    if (num >= 0) return static_cast<int>((2 * num + den) / (2 * den));
    return -static_cast<int>((2 * -num + den) / (2 * den));
}

// Cells visited while moving from (x, y) with the applied velocity. Five
// cases: zero velocity, the two axis-aligned ones, and the two diagonal ones
// with max(|vx|, |vy|) + 1 equidistant interpolation points, the minor
// coordinate rounded to the nearest cell.
Trajectory compute_trajectory(int x, int y, int vx, int vy);

struct StepOutcome {
    enum class Kind { Moved, ReachedGoal, Crashed };
    Kind kind = Kind::Moved;
    State next;  // meaningful only when kind == Moved
    int applied_vx = 0;
    int applied_vy = 0;
    Trajectory trajectory;
};

// Scans the transition trajectory in order (skipping the known-valid origin);
// the first goal or wall cell decides the outcome.
StepOutcome step_outcome(const TrackMap& map, const State& state, int applied_vx, int applied_vy);

struct StepResult {
    StepOutcome outcome;
    int reward = 0;
    bool noise_applied = false;
};

inline constexpr int kRewardGoal = 100;
inline constexpr int kRewardCrash = -50;
inline constexpr double kNoiseProbability = 0.1;

// Applies the acceleration (with probability 0.1 it is ignored when noisy),
// updates the velocity and delegates to step_outcome.
StepResult apply_action(const TrackMap& map, const State& state, Action action, bool noisy, Rng& rng);

struct SimConfig {
    bool random_start = false;     // RS vs NS
    bool random_velocity = false;  // RV vs ZV
    bool noisy = false;            // N vs D
    int velocity_bound = 5;
    void validate() const;
};

struct NoSolvableState : std::runtime_error {
    NoSolvableState() : std::runtime_error("no solvable initial state found within 100000 draws") {}
};

using SolvablePred = std::function<bool(const State&)>;

// Position uniform over start cells (NS) or all traversable cells (RS);
// velocity zero (ZV) or componentwise uniform in [-bound, bound] (RV). When a
// solvability predicate is given, draws failing it are rejected and resampled.
State sample_initial_state(const TrackMap& map, const SimConfig& cfg, Rng& rng,
                           const SolvablePred& solvable = {});

// 15 features: x, y, vx, vy, wall distances in the 8 directions (canonical
// action order without (0,0)), signed offset to the nearest goal cell, and
// its Manhattan norm.
using FeatureVector = std::array<double, 15>;

inline constexpr std::array<std::pair<int, int>, 8> kFeatureDirections = {{
    {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1},
}};

FeatureVector encode_features(const TrackMap& map, const State& state);

}  // namespace rtlab
