#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rtlab/agents.hpp"
#include "rtlab/planner.hpp"
#include "rtlab/track.hpp"

namespace rtlab {

enum class EvalPreset { NS_ZV_D, NS_ZV_N, RS_ZV_D, RS_ZV_N, RS_RV_D, RS_RV_N };

EvalPreset parse_eval_preset(const std::string& name);
std::string eval_preset_name(EvalPreset preset);
bool eval_preset_noisy(EvalPreset preset);

struct EvalConfig {
    EvalPreset preset = EvalPreset::NS_ZV_D;
    std::size_t runs = 10000;
    int step_cap = 1000;
    double gamma = 0.99;
    std::uint64_t master_seed = 0;
    int velocity_bound = 5;
};

struct StepRecord {
    State state;    // before the step
    Action chosen;  // pre-noise
    bool noise_applied = false;
    StepOutcome::Kind outcome = StepOutcome::Kind::Moved;
    int reward = 0;
};

struct EpisodeTrace {
    enum class Result { Win, Loss, Timeout };
    Result result = Result::Timeout;
    std::vector<StepRecord> steps;
    double return_raw = 0.0;
};

EpisodeTrace run_episode(Agent& agent, const TrackMap& map, const State& start, bool noisy,
                         int step_cap, Rng& rng);

// JSON-lines step records, one object per step.
void write_trace_jsonl(const EpisodeTrace& trace, const std::string& path);
// Positions visited by an episode read back from a trace file (for renders).
std::vector<std::pair<int, int>> read_trace_positions(const std::string& path);

struct AgentReport {
    std::string agent;
    std::string config;
    std::size_t runs = 0;
    std::size_t wins = 0;
    std::size_t losses = 0;
    std::size_t timeouts = 0;
    double win_rate = 0.0;
    double loss_rate = 0.0;
    double timeout_rate = 0.0;
    double avg_return_disc = 0.0;
    double avg_return_raw = 0.0;
    double avg_steps_wins = 0.0;  // meaningful only when has_steps
    bool has_steps = false;
    double solvable_start_frac = 0.0;
};

// Shared pre-drawn start states across agents; per (run, agent) derived rng
// streams. Start states are not filtered for solvability.
std::vector<AgentReport> evaluate_agents(const std::vector<Agent*>& agents, const TrackMap& map,
                                         Planner& planner, const EvalConfig& config, int jobs = 1);

enum class QualityPreset { NS_ZV, RS_ZV, RS_RV };

QualityPreset parse_quality_preset(const std::string& name);
std::string quality_preset_name(QualityPreset preset);

struct QualityReport {
    std::string agent;
    std::string config;
    std::size_t decisions = 0;
    std::size_t optimal = 0;
    std::size_t secure = 0;
    std::size_t fatal = 0;
    std::size_t excluded_unsolvable = 0;
};

// Deterministic episodes; each chosen action at a solvable state is
// classified by the expert, decisions at unsolvable states are counted apart.
QualityReport action_quality(Agent& agent, const TrackMap& map, Planner& planner,
                             QualityPreset preset, std::size_t runs, int step_cap,
                             std::uint64_t master_seed, int velocity_bound = 5);

void export_reports_csv(const std::vector<AgentReport>& reports, const std::string& path);
void export_reports_json(const std::vector<AgentReport>& reports, const std::string& path);
void export_quality_csv(const std::vector<QualityReport>& reports, const std::string& path);

}  // namespace rtlab
