#include "rtlab/track.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace rtlab {

namespace {

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            if (!cur.empty() && cur.back() == '\r') cur.pop_back();
            lines.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty() && cur.back() == '\r') cur.pop_back();
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

}  // namespace

TrackMap parse_map(const std::string& text, const std::string& id) {
    auto lines = split_lines(text);
    if (lines.empty()) throw MapParseError(MapParseError::Code::Empty, 0, 0, "empty map text");

    TrackMap map;
    map.id = id;
    map.height = static_cast<int>(lines.size());
    map.width = static_cast<int>(lines[0].size());
    map.cells.reserve(static_cast<std::size_t>(map.width) * map.height);

    for (int y = 0; y < map.height; ++y) {
        const std::string& row = lines[y];
        if (static_cast<int>(row.size()) != map.width) {
            std::ostringstream msg;
            msg << "ragged line " << (y + 1) << ": length " << row.size() << " != " << map.width;
            throw MapParseError(MapParseError::Code::RaggedLines, y + 1, 0, msg.str());
        }
        for (int x = 0; x < map.width; ++x) {
            CellKind k;
            switch (row[x]) {
                case '#': k = CellKind::Wall; break;
                case '.': k = CellKind::Free; break;
                case 's': k = CellKind::Start; break;
                case 'g': k = CellKind::Goal; break;
                default: {
                    std::ostringstream msg;
                    msg << "unknown character '" << row[x] << "' at line " << (y + 1)
                        << ", column " << (x + 1);
                    throw MapParseError(MapParseError::Code::UnknownCharacter, y + 1, x + 1, msg.str());
                }
            }
            map.cells.push_back(k);
            if (k != CellKind::Wall) map.traversable_cells.emplace_back(x, y);
            if (k == CellKind::Start) map.start_cells.emplace_back(x, y);
            if (k == CellKind::Goal) map.goal_cells.emplace_back(x, y);
        }
    }

    if (map.start_cells.empty())
        throw MapParseError(MapParseError::Code::NoStartCells, 0, 0, "map has no start cells");
    if (map.goal_cells.empty())
        throw MapParseError(MapParseError::Code::NoGoalCells, 0, 0, "map has no goal cells");
    return map;
}

TrackMap load_map_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open map file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_map(buf.str(), std::filesystem::path(path).stem().string());
}

std::uint64_t map_fingerprint(const TrackMap& map) {
    std::string text;
    text.reserve(static_cast<std::size_t>(map.width + 1) * map.height);
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            switch (map.at(x, y)) {
                case CellKind::Wall: text += '#'; break;
                case CellKind::Free: text += '.'; break;
                case CellKind::Start: text += 's'; break;
                case CellKind::Goal: text += 'g'; break;
            }
        }
        text += '\n';
    }
    return fnv1a64(text);
}

Trajectory compute_trajectory(int x, int y, int vx, int vy) {
    Trajectory t;
    if (vx == 0 && vy == 0) {
        t.emplace_back(x, y);
        return t;
    }
    const int n = std::max(std::abs(vx), std::abs(vy));
    const int sx = (vx > 0) - (vx < 0);
    const int sy = (vy > 0) - (vy < 0);
    t.reserve(static_cast<std::size_t>(n) + 1);
    if (vy == 0) {
        for (int i = 0; i <= n; ++i) t.emplace_back(x + i * sx, y);
    } else if (vx == 0) {
        for (int i = 0; i <= n; ++i) t.emplace_back(x, y + i * sy);
    } else if (std::abs(vx) >= std::abs(vy)) {
        // minor coordinate follows y + i * vy/|vx|, rounded half away from zero
        for (int i = 0; i <= n; ++i)
            t.emplace_back(x + i * sx, y + round_div_half_away(static_cast<long long>(i) * vy, std::abs(vx)));
    } else {
        for (int i = 0; i <= n; ++i)
            t.emplace_back(x + round_div_half_away(static_cast<long long>(i) * vx, std::abs(vy)), y + i * sy);
    }
    return t;
}

StepOutcome step_outcome(const TrackMap& map, const State& state, int applied_vx, int applied_vy) {
    StepOutcome out;
    out.applied_vx = applied_vx;
    out.applied_vy = applied_vy;
    out.trajectory = compute_trajectory(state.x, state.y, applied_vx, applied_vy);
    // index 0 is the origin cell, valid by the state invariant
    for (std::size_t i = 1; i < out.trajectory.size(); ++i) {
        const auto [px, py] = out.trajectory[i];
        if (map.is_goal(px, py)) {
            out.kind = StepOutcome::Kind::ReachedGoal;
            return out;
        }
        if (!map.traversable(px, py)) {
            out.kind = StepOutcome::Kind::Crashed;
            return out;
        }
    }
    out.kind = StepOutcome::Kind::Moved;
    out.next = State{state.x + applied_vx, state.y + applied_vy, applied_vx, applied_vy};
    return out;
}

StepResult apply_action(const TrackMap& map, const State& state, Action action, bool noisy, Rng& rng) {
    StepResult res;
    Action applied = action;
    if (noisy && rng.bernoulli(kNoiseProbability)) {
        applied = Action{0, 0};
        res.noise_applied = true;
    }
    res.outcome = step_outcome(map, state, state.vx + applied.ax, state.vy + applied.ay);
    switch (res.outcome.kind) {
        case StepOutcome::Kind::ReachedGoal: res.reward = kRewardGoal; break;
        case StepOutcome::Kind::Crashed: res.reward = kRewardCrash; break;
        case StepOutcome::Kind::Moved: res.reward = 0; break;
    }
    return res;
}

void SimConfig::validate() const {
    if (!random_start && random_velocity)
        throw std::invalid_argument("NS+RV simulation configuration is not supported");
    if (velocity_bound < 0) throw std::invalid_argument("velocity_bound must be non-negative");
}

State sample_initial_state(const TrackMap& map, const SimConfig& cfg, Rng& rng,
                           const SolvablePred& solvable) {
    cfg.validate();
    const auto& pool = cfg.random_start ? map.traversable_cells : map.start_cells;
    for (int attempt = 0; attempt < 100000; ++attempt) {
        const auto [x, y] = pool[rng.uniform_index(pool.size())];
        State s{x, y, 0, 0};
        if (cfg.random_velocity) {
            s.vx = rng.uniform_int(-cfg.velocity_bound, cfg.velocity_bound);
            s.vy = rng.uniform_int(-cfg.velocity_bound, cfg.velocity_bound);
        }
        if (!solvable || solvable(s)) return s;
    }
    throw NoSolvableState();
}

FeatureVector encode_features(const TrackMap& map, const State& state) {
    FeatureVector f{};
    f[0] = state.x;
    f[1] = state.y;
    f[2] = state.vx;
    f[3] = state.vy;
    for (std::size_t d = 0; d < kFeatureDirections.size(); ++d) {
        const auto [dx, dy] = kFeatureDirections[d];
        int count = 0;
        while (map.traversable(state.x + (count + 1) * dx, state.y + (count + 1) * dy)) ++count;
        f[4 + d] = count;
    }
    // nearest goal by Manhattan distance; canonical cell order breaks ties
    int best = -1, bx = 0, by = 0;
    for (const auto& [gx, gy] : map.goal_cells) {
        const int dist = std::abs(gx - state.x) + std::abs(gy - state.y);
        if (best < 0 || dist < best) {
            best = dist;
            bx = gx;
            by = gy;
        }
    }
    f[12] = bx - state.x;
    f[13] = by - state.y;
    f[14] = std::abs(f[12]) + std::abs(f[13]);
    return f;
}

}  // namespace rtlab
