#include "rtlab/eval.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace rtlab {

using nlohmann::json;

EvalPreset parse_eval_preset(const std::string& name) {
    if (name == "NS-ZV-D") return EvalPreset::NS_ZV_D;
    if (name == "NS-ZV-N") return EvalPreset::NS_ZV_N;
    if (name == "RS-ZV-D") return EvalPreset::RS_ZV_D;
    if (name == "RS-ZV-N") return EvalPreset::RS_ZV_N;
    if (name == "RS-RV-D") return EvalPreset::RS_RV_D;
    if (name == "RS-RV-N") return EvalPreset::RS_RV_N;
    throw std::invalid_argument("unknown evaluation preset: " + name);
}

std::string eval_preset_name(EvalPreset preset) {
    switch (preset) {
        case EvalPreset::NS_ZV_D: return "NS-ZV-D";
        case EvalPreset::NS_ZV_N: return "NS-ZV-N";
        case EvalPreset::RS_ZV_D: return "RS-ZV-D";
        case EvalPreset::RS_ZV_N: return "RS-ZV-N";
        case EvalPreset::RS_RV_D: return "RS-RV-D";
        case EvalPreset::RS_RV_N: return "RS-RV-N";
    }
    throw std::invalid_argument("invalid evaluation preset value");
}

bool eval_preset_noisy(EvalPreset preset) {
    return preset == EvalPreset::NS_ZV_N || preset == EvalPreset::RS_ZV_N ||
           preset == EvalPreset::RS_RV_N;
}

namespace {

SimConfig eval_sim_config(EvalPreset preset, int velocity_bound) {
    SimConfig sim;
    sim.random_start = preset != EvalPreset::NS_ZV_D && preset != EvalPreset::NS_ZV_N;
    sim.random_velocity = preset == EvalPreset::RS_RV_D || preset == EvalPreset::RS_RV_N;
    sim.noisy = eval_preset_noisy(preset);
    sim.velocity_bound = velocity_bound;
    return sim;
}

const char* outcome_name(StepOutcome::Kind kind) {
    switch (kind) {
        case StepOutcome::Kind::Moved: return "moved";
        case StepOutcome::Kind::ReachedGoal: return "goal";
        case StepOutcome::Kind::Crashed: return "crashed";
    }
    return "moved";
}

}  // namespace

EpisodeTrace run_episode(Agent& agent, const TrackMap& map, const State& start, bool noisy,
                         int step_cap, Rng& rng) {
    EpisodeTrace trace;
    State s = start;
    for (int step = 0; step < step_cap; ++step) {
        const Action a = agent.act(map, s, rng);
        const StepResult r = apply_action(map, s, a, noisy, rng);
        trace.steps.push_back({s, a, r.noise_applied, r.outcome.kind, r.reward});
        trace.return_raw += r.reward;
        if (r.outcome.kind == StepOutcome::Kind::ReachedGoal) {
            trace.result = EpisodeTrace::Result::Win;
            return trace;
        }
        if (r.outcome.kind == StepOutcome::Kind::Crashed) {
            trace.result = EpisodeTrace::Result::Loss;
            return trace;
        }
        s = r.outcome.next;
    }
    trace.result = EpisodeTrace::Result::Timeout;
    return trace;
}

void write_trace_jsonl(const EpisodeTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open trace file for writing: " + path);
    for (const StepRecord& r : trace.steps) {
        json j;
        j["x"] = r.state.x;
        j["y"] = r.state.y;
        j["vx"] = r.state.vx;
        j["vy"] = r.state.vy;
        j["ax"] = r.chosen.ax;
        j["ay"] = r.chosen.ay;
        j["noise_applied"] = r.noise_applied;
        j["outcome"] = outcome_name(r.outcome);
        j["reward"] = r.reward;
        out << j.dump() << '\n';
    }
}

std::vector<std::pair<int, int>> read_trace_positions(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trace file: " + path);
    std::vector<std::pair<int, int>> positions;
    std::string line;
    int last_vx = 0, last_vy = 0, last_ax = 0, last_ay = 0;
    bool last_noise = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        positions.emplace_back(j.at("x").get<int>(), j.at("y").get<int>());
        last_vx = j.at("vx").get<int>();
        last_vy = j.at("vy").get<int>();
        last_ax = j.at("ax").get<int>();
        last_ay = j.at("ay").get<int>();
        last_noise = j.at("noise_applied").get<bool>();
    }
    if (!positions.empty()) {
        // final position from the last applied velocity
        const int avx = last_vx + (last_noise ? 0 : last_ax);
        const int avy = last_vy + (last_noise ? 0 : last_ay);
        positions.emplace_back(positions.back().first + avx, positions.back().second + avy);
    }
    return positions;
}

std::vector<AgentReport> evaluate_agents(const std::vector<Agent*>& agents, const TrackMap& map,
                                         Planner& planner, const EvalConfig& config, int jobs) {
    if (agents.empty()) throw std::invalid_argument("evaluate_agents needs at least one agent");
    const SimConfig sim = eval_sim_config(config.preset, config.velocity_bound);
    const bool noisy = sim.noisy;

    // shared start states across agents
    std::vector<State> starts;
    starts.reserve(config.runs);
    {
        Rng start_rng(derive_seed(config.master_seed, fnv1a64("eval-starts")));
        for (std::size_t i = 0; i < config.runs; ++i)
            starts.push_back(sample_initial_state(map, sim, start_rng));
    }
    std::size_t solvable = 0;
    for (const State& s : starts) solvable += planner.is_solvable(s) ? 1 : 0;

    struct RunResult {
        EpisodeTrace::Result result;
        double ret_raw;
        double ret_disc;
        int steps;
    };

    std::vector<AgentReport> reports;
    for (Agent* agent : agents) {
        const std::uint64_t agent_key = fnv1a64(agent->id());
        std::vector<RunResult> run_results(config.runs);

        auto worker = [&](std::size_t begin, std::size_t end) {
            for (std::size_t run = begin; run < end; ++run) {
                Rng rng(derive_seed(config.master_seed, run, agent_key));
                const EpisodeTrace t =
                    run_episode(*agent, map, starts[run], noisy, config.step_cap, rng);
                double disc = 0.0;
                double g = 1.0;
                for (const StepRecord& r : t.steps) {
                    disc += g * r.reward;
                    g *= config.gamma;
                }
                run_results[run] = {t.result, t.return_raw, disc, static_cast<int>(t.steps.size())};
            }
        };

        if (jobs <= 1) {
            worker(0, config.runs);
        } else {
            std::vector<std::thread> threads;
            const std::size_t chunk = (config.runs + jobs - 1) / jobs;
            for (int j = 0; j < jobs; ++j) {
                const std::size_t begin = std::min(config.runs, j * chunk);
                const std::size_t end = std::min(config.runs, begin + chunk);
                if (begin < end) threads.emplace_back(worker, begin, end);
            }
            for (auto& t : threads) t.join();
        }

        // fixed reduction order keeps outputs identical for any job count
        AgentReport rep;
        rep.agent = agent->id();
        rep.config = eval_preset_name(config.preset);
        rep.runs = config.runs;
        double steps_wins = 0.0;
        for (const RunResult& r : run_results) {
            switch (r.result) {
                case EpisodeTrace::Result::Win:
                    ++rep.wins;
                    steps_wins += r.steps;
                    break;
                case EpisodeTrace::Result::Loss: ++rep.losses; break;
                case EpisodeTrace::Result::Timeout: ++rep.timeouts; break;
            }
            rep.avg_return_raw += r.ret_raw;
            rep.avg_return_disc += r.ret_disc;
        }
        const double n = static_cast<double>(config.runs);
        rep.win_rate = rep.wins / n;
        rep.loss_rate = rep.losses / n;
        rep.timeout_rate = rep.timeouts / n;
        rep.avg_return_raw /= n;
        rep.avg_return_disc /= n;
        rep.has_steps = rep.wins > 0;
        if (rep.has_steps) rep.avg_steps_wins = steps_wins / static_cast<double>(rep.wins);
        rep.solvable_start_frac = solvable / n;
        reports.push_back(std::move(rep));
    }
    return reports;
}

QualityPreset parse_quality_preset(const std::string& name) {
    if (name == "NS-ZV") return QualityPreset::NS_ZV;
    if (name == "RS-ZV") return QualityPreset::RS_ZV;
    if (name == "RS-RV") return QualityPreset::RS_RV;
    if (name == "NS-ZV-N" || name == "RS-ZV-N" || name == "RS-RV-N")
        throw std::invalid_argument("action quality is only defined for deterministic presets");
    throw std::invalid_argument("unknown quality preset: " + name);
}

std::string quality_preset_name(QualityPreset preset) {
    switch (preset) {
        case QualityPreset::NS_ZV: return "NS-ZV";
        case QualityPreset::RS_ZV: return "RS-ZV";
        case QualityPreset::RS_RV: return "RS-RV";
    }
    throw std::invalid_argument("invalid quality preset value");
}

QualityReport action_quality(Agent& agent, const TrackMap& map, Planner& planner,
                             QualityPreset preset, std::size_t runs, int step_cap,
                             std::uint64_t master_seed, int velocity_bound) {
    SimConfig sim;
    sim.random_start = preset != QualityPreset::NS_ZV;
    sim.random_velocity = preset == QualityPreset::RS_RV;
    sim.velocity_bound = velocity_bound;

    QualityReport rep;
    rep.agent = agent.id();
    rep.config = quality_preset_name(preset);

    Rng start_rng(derive_seed(master_seed, fnv1a64("quality-starts")));
    const std::uint64_t agent_key = fnv1a64(agent.id());

    for (std::size_t run = 0; run < runs; ++run) {
        State s = sample_initial_state(map, sim, start_rng);
        Rng rng(derive_seed(master_seed, run, agent_key));
        for (int step = 0; step < step_cap; ++step) {
            const Action a = agent.act(map, s, rng);
            if (planner.is_solvable(s)) {
                ++rep.decisions;
                switch (planner.classify_action(s, a)) {
                    case ActionQuality::Optimal: ++rep.optimal; break;
                    case ActionQuality::Secure: ++rep.secure; break;
                    case ActionQuality::Fatal: ++rep.fatal; break;
                }
            } else {
                ++rep.excluded_unsolvable;
            }
            const StepResult r = apply_action(map, s, a, false, rng);
            if (r.outcome.kind != StepOutcome::Kind::Moved) break;
            s = r.outcome.next;
        }
    }
    return rep;
}

namespace {

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

json report_to_json(const AgentReport& r) {
    json j;
    j["agent"] = r.agent;
    j["config"] = r.config;
    j["runs"] = r.runs;
    j["wins"] = r.wins;
    j["losses"] = r.losses;
    j["timeouts"] = r.timeouts;
    j["win_rate"] = r.win_rate;
    j["loss_rate"] = r.loss_rate;
    j["timeout_rate"] = r.timeout_rate;
    j["avg_return_disc"] = r.avg_return_disc;
    j["avg_return_raw"] = r.avg_return_raw;
    if (r.has_steps) j["avg_steps_wins"] = r.avg_steps_wins;
    j["solvable_start_frac"] = r.solvable_start_frac;
    return j;
}

}  // namespace

void export_reports_csv(const std::vector<AgentReport>& reports, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open report file for writing: " + path);
    out << "agent,config,runs,wins,losses,timeouts,win_rate,loss_rate,timeout_rate,"
           "avg_return_disc,avg_return_raw,avg_steps_wins,solvable_start_frac\n";
    for (const AgentReport& r : reports) {
        out << r.agent << ',' << r.config << ',' << r.runs << ',' << r.wins << ',' << r.losses
            << ',' << r.timeouts << ',' << format_double(r.win_rate) << ','
            << format_double(r.loss_rate) << ',' << format_double(r.timeout_rate) << ','
            << format_double(r.avg_return_disc) << ',' << format_double(r.avg_return_raw) << ','
            << (r.has_steps ? format_double(r.avg_steps_wins) : std::string()) << ','
            << format_double(r.solvable_start_frac) << '\n';
    }
}

void export_reports_json(const std::vector<AgentReport>& reports, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open report file for writing: " + path);
    json arr = json::array();
    for (const AgentReport& r : reports) arr.push_back(report_to_json(r));
    out << arr.dump(2) << '\n';
}

void export_quality_csv(const std::vector<QualityReport>& reports, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open quality file for writing: " + path);
    out << "agent,config,decisions,optimal,secure,fatal,excluded_unsolvable\n";
    for (const QualityReport& r : reports)
        out << r.agent << ',' << r.config << ',' << r.decisions << ',' << r.optimal << ','
            << r.secure << ',' << r.fatal << ',' << r.excluded_unsolvable << '\n';
}

}  // namespace rtlab
