// rtlab: Racetrack lab command-line tool.
//
// Subcommands: gen-data, train (pil-nn | pil-lda | pil-lr | dagger | dqn),
// evaluate, quality, plan, render.
//
// Exit codes: 0 success, 1 usage/config error, 2 domain-level negative
// result (e.g. unsolvable state), 3 runtime failure.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "json.hpp"

#include "rtlab/agents.hpp"
#include "rtlab/dataset.hpp"
#include "rtlab/eval.hpp"
#include "rtlab/models.hpp"
#include "rtlab/planner.hpp"
#include "rtlab/render.hpp"
#include "rtlab/track.hpp"
#include "rtlab/trainers.hpp"
#include "rtlab/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rtlab;

namespace {

std::uint64_t default_seed() {
    if (const char* env = std::getenv("RTLAB_SEED")) return std::strtoull(env, nullptr, 10);
    return 0;
}

char hex_digit(std::uint64_t v) { return "0123456789abcdef"[v & 0xf]; }

std::string hex64(std::uint64_t v) {
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[i] = hex_digit(v);
    return s;
}

void write_manifest(const std::string& subcommand, const json& config, std::uint64_t seed,
                    const TrackMap* map, const std::vector<std::string>& outputs,
                    const std::string& path) {
    json m;
    m["subcommand"] = subcommand;
    m["config"] = config;
    m["seed"] = seed;
    if (map) {
        m["map_id"] = map->id;
        m["map_fingerprint"] = hex64(map_fingerprint(*map));
    }
    m["tool_version"] = kVersion;
    m["outputs"] = outputs;
    m["timestamp"] = static_cast<std::int64_t>(
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << m.dump(2) << '\n';
}

json load_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    json j;
    in >> j;
    if (!j.is_object()) throw std::invalid_argument("config file must hold a JSON object");
    return j;
}

// flags win over config-file values
template <typename T>
void config_fallback(const json& cfg, const CLI::App* cmd, const std::string& flag,
                     const std::string& key, T& var) {
    if (cmd->count(flag) == 0 && cfg.contains(key)) var = cfg.at(key).get<T>();
}

struct AgentSpec {
    std::unique_ptr<Agent> owned;
    Agent* ptr = nullptr;
};

std::unique_ptr<Agent> resolve_agent(const std::string& spec, Planner& planner) {
    if (spec == "expert") return std::make_unique<ExpertAgent>(planner);
    if (spec == "random") return std::make_unique<RandomAgent>();
    if (spec == "idle") return std::make_unique<IdleAgent>();
    if (!fs::exists(spec)) throw std::runtime_error("checkpoint not found: " + spec);
    return make_model_agent(load_model(spec), fs::path(spec).stem().string());
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
}

std::vector<LabeledSample> load_samples(const std::string& path, const std::string& expected_map_id) {
    return read_dataset(path, expected_map_id).samples;
}

void write_loss_trace(const std::vector<double>& losses, const char* column, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open trace file for writing: " + path);
    out << column << ",loss\n";
    out.precision(17);
    for (std::size_t i = 0; i < losses.size(); ++i) out << (i + 1) << ',' << losses[i] << '\n';
}

int run(int argc, char** argv) {
    CLI::App app{"Racetrack learning laboratory"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; command-line flags win on conflict");

    // ---- gen-data ----
    auto* gen = app.add_subcommand("gen-data", "Generate an expert-labeled data set");
    std::string gen_map, gen_preset, gen_out;
    std::uint64_t gen_size = 1000, gen_seed = default_seed();
    int gen_vb = 5;
    gen->add_option("--map", gen_map, "map file")->required();
    gen->add_option("--preset", gen_preset,
                    "RS-RV | NS-ZV-T | RS-ZV-T | RS-RV-T | RS-RV-E | RS-RV-U")
        ->required();
    gen->add_option("--size", gen_size, "number of samples");
    gen->add_option("--seed", gen_seed, "master seed (default: RTLAB_SEED or 0)");
    gen->add_option("--velocity-bound", gen_vb, "bound for random start velocities");
    gen->add_option("--out", gen_out, "output JSONL file")->required();
    gen->add_option("--jobs", "worker count (accepted for interface parity; generation is serial)");

    // ---- train ----
    auto* train = app.add_subcommand("train", "Train an agent");
    train->require_subcommand(1);

    auto* pil_nn = train->add_subcommand("pil-nn", "Passive imitation learning, neural network");
    std::string pil_dataset, pil_out_dir = ".";
    int pil_epochs = 20, pil_batch = 32;
    double pil_lr = 1e-3;
    std::uint64_t pil_seed = default_seed();
    pil_nn->add_option("--dataset", pil_dataset, "labeled JSONL data set")->required();
    pil_nn->add_option("--epochs", pil_epochs, "training epochs (one checkpoint each)");
    pil_nn->add_option("--lr", pil_lr, "gradient step size");
    pil_nn->add_option("--batch-size", pil_batch, "mini-batch size");
    pil_nn->add_option("--seed", pil_seed, "master seed");
    pil_nn->add_option("--out-dir", pil_out_dir, "checkpoint directory");

    auto* pil_lda = train->add_subcommand("pil-lda", "Passive imitation learning, LDA");
    auto* pil_lr_cmd = train->add_subcommand("pil-lr", "Passive imitation learning, logistic regression");
    std::string lin_dataset, lin_out;
    for (auto* cmd : {pil_lda, pil_lr_cmd}) {
        cmd->add_option("--dataset", lin_dataset, "labeled JSONL data set")->required();
        cmd->add_option("--out", lin_out, "output model file")->required();
    }

    auto* dagger = train->add_subcommand("dagger", "Active imitation learning (dataset aggregation)");
    std::string dag_map, dag_pretrain, dag_out_dir = ".";
    int dag_iters = 20, dag_samples = 5000, dag_epochs = 8, dag_batch = 32, dag_cap = 1000;
    double dag_lr = 1e-3;
    bool dag_noisy = false, dag_random_start = false;
    std::uint64_t dag_seed = default_seed();
    dagger->add_option("--map", dag_map, "map file")->required();
    dagger->add_option("--pretrain", dag_pretrain, "pretraining JSONL data set")->required();
    dagger->add_option("--iters", dag_iters, "aggregation iterations (one checkpoint each)");
    dagger->add_option("--samples-per-iter", dag_samples, "visited states collected per iteration");
    dagger->add_option("--epochs-per-iter", dag_epochs, "training epochs per iteration");
    dagger->add_option("--lr", dag_lr, "gradient step size");
    dagger->add_option("--batch-size", dag_batch, "mini-batch size");
    dagger->add_option("--step-cap", dag_cap, "rollout episode step cap");
    dagger->add_flag("--rollout-noisy", dag_noisy, "roll out in the noisy environment");
    dagger->add_flag("--rollout-random-start", dag_random_start, "roll out from random map positions");
    dagger->add_option("--seed", dag_seed, "master seed");
    dagger->add_option("--out-dir", dag_out_dir, "checkpoint directory");

    auto* dqn = train->add_subcommand("dqn", "Deep Q-learning");
    std::string dqn_map, dqn_mode = "NS-D", dqn_out_dir = ".";
    DqnConfig dqn_cfg;
    std::uint64_t dqn_seed = default_seed();
    dqn->add_option("--map", dqn_map, "map file")->required();
    dqn->add_option("--mode", dqn_mode, "NS-D | NS-N | RS-D | RS-N");
    dqn->add_option("--episodes", dqn_cfg.episodes, "training episodes");
    dqn->add_option("--buffer", dqn_cfg.buffer_capacity, "replay buffer capacity");
    dqn->add_option("--gamma", dqn_cfg.gamma, "discount factor");
    dqn->add_option("--lambda", dqn_cfg.lambda, "per-episode epsilon decay factor");
    dqn->add_option("--epsilon-end", dqn_cfg.epsilon_end, "epsilon decay floor");
    dqn->add_option("--batch-size", dqn_cfg.batch_size, "replay batch size");
    dqn->add_option("--sync-interval", dqn_cfg.target_sync_interval,
                    "gradient steps between target network copies");
    dqn->add_option("--train-interval", dqn_cfg.train_interval,
                    "environment steps between gradient steps");
    dqn->add_option("--reward-scale", dqn_cfg.reward_scale,
                    "reward multiplier applied to regression targets");
    dqn->add_option("--lr", dqn_cfg.step_size, "gradient step size");
    dqn->add_option("--step-cap", dqn_cfg.step_cap, "episode step cap");
    dqn->add_option("--seed", dqn_seed, "master seed");
    dqn->add_option("--out-dir", dqn_out_dir, "checkpoint directory");

    // ---- evaluate ----
    auto* eval = app.add_subcommand("evaluate", "Evaluate agents on shared start states");
    std::string eval_map, eval_preset = "NS-ZV-D", eval_out, eval_format = "csv", eval_trace_dir;
    std::vector<std::string> eval_agents;
    std::uint64_t eval_seed = default_seed();
    std::size_t eval_runs = 10000;
    int eval_cap = 1000, eval_vb = 5, eval_jobs = 1;
    double eval_gamma = 0.99;
    eval->add_option("--map", eval_map, "map file")->required();
    eval->add_option("--preset", eval_preset, "NS-ZV-D | NS-ZV-N | RS-ZV-D | RS-ZV-N | RS-RV-D | RS-RV-N");
    eval->add_option("--agents", eval_agents,
                     "checkpoint paths or built-ins: expert, random, idle")
        ->required()
        ->expected(-1);
    eval->add_option("--runs", eval_runs, "simulation runs per agent");
    eval->add_option("--step-cap", eval_cap, "episode step cap");
    eval->add_option("--gamma", eval_gamma, "discount for the discounted-return column");
    eval->add_option("--velocity-bound", eval_vb, "bound for RV start velocities");
    eval->add_option("--seed", eval_seed, "master seed");
    eval->add_option("--jobs", eval_jobs, "parallel workers (any value gives identical output)");
    eval->add_option("--format", eval_format, "csv | json");
    eval->add_option("--trace-out", eval_trace_dir, "directory for run-0 episode traces per agent");
    eval->add_option("--out", eval_out, "report file")->required();

    // ---- quality ----
    auto* qual = app.add_subcommand("quality", "Classify an agent's action choices");
    std::string q_map, q_agent, q_preset = "NS-ZV", q_out;
    std::uint64_t q_seed = default_seed();
    std::size_t q_runs = 1000;
    int q_cap = 1000, q_vb = 5;
    qual->add_option("--map", q_map, "map file")->required();
    qual->add_option("--agent", q_agent, "checkpoint path or built-in")->required();
    qual->add_option("--preset", q_preset, "NS-ZV | RS-ZV | RS-RV (deterministic only)");
    qual->add_option("--runs", q_runs, "episodes");
    qual->add_option("--step-cap", q_cap, "episode step cap");
    qual->add_option("--velocity-bound", q_vb, "bound for RV start velocities");
    qual->add_option("--seed", q_seed, "master seed");
    qual->add_option("--out", q_out, "quality CSV file")->required();

    // ---- plan ----
    auto* plan = app.add_subcommand("plan", "Query the expert planner");
    std::string plan_map;
    int plan_x = 0, plan_y = 0, plan_vx = 0, plan_vy = 0;
    plan->add_option("--map", plan_map, "map file")->required();
    plan->add_option("x", plan_x)->required();
    plan->add_option("y", plan_y)->required();
    plan->add_option("vx", plan_vx)->required();
    plan->add_option("vy", plan_vy)->required();

    // ---- render ----
    auto* render = app.add_subcommand("render", "Render episode traces to SVG");
    std::string r_map, r_out;
    std::vector<std::string> r_traces;
    render->add_option("--map", r_map, "map file")->required();
    render->add_option("--trace", r_traces, "episode trace JSONL file(s)")->required()->expected(-1);
    render->add_option("--out", r_out, "output SVG file")->required();

    CLI11_PARSE(app, argc, argv);
    const json cfg = load_config_file(config_path);

    if (gen->parsed()) {
        config_fallback(cfg, gen, "--size", "size", gen_size);
        config_fallback(cfg, gen, "--seed", "seed", gen_seed);
        config_fallback(cfg, gen, "--velocity-bound", "velocity_bound", gen_vb);
        const TrackMap map = load_map_file(gen_map);
        Planner planner(map);
        DatasetConfig dc;
        dc.preset = parse_preset(gen_preset);
        dc.size = gen_size;
        dc.velocity_bound = gen_vb;
        Rng rng(derive_seed(gen_seed, fnv1a64("gen-data")));
        const auto samples = generate(map, planner, dc, rng);
        DatasetHeader header{map.id, gen_preset, gen_size, gen_seed, gen_vb};
        write_dataset(samples, header, gen_out);
        write_manifest("gen-data",
                       {{"map", gen_map}, {"preset", gen_preset}, {"size", gen_size},
                        {"velocity_bound", gen_vb}},
                       gen_seed, &map, {gen_out}, gen_out + ".manifest.json");
        std::cout << "wrote " << samples.size() << " samples to " << gen_out << '\n';
        return 0;
    }

    if (pil_nn->parsed()) {
        const auto samples = load_samples(pil_dataset, "");
        PilConfig pc{pil_epochs, pil_lr, pil_batch};
        Rng rng(derive_seed(pil_seed, fnv1a64("train-pil")));
        const PilResult res = train_pil(samples, pc, rng);
        fs::create_directories(pil_out_dir);
        std::vector<std::string> outputs;
        for (const Checkpoint& c : res.checkpoints.checkpoints) {
            const std::string path = (fs::path(pil_out_dir) / ("pil-nn-" + c.tag + ".json")).string();
            save_model(c.model, path);
            outputs.push_back(path);
        }
        const std::string trace = (fs::path(pil_out_dir) / "pil-nn-trace.csv").string();
        write_loss_trace(res.epoch_losses, "epoch", trace);
        outputs.push_back(trace);
        write_manifest("train pil-nn",
                       {{"dataset", pil_dataset}, {"epochs", pil_epochs}, {"lr", pil_lr},
                        {"batch_size", pil_batch}},
                       pil_seed, nullptr, outputs,
                       (fs::path(pil_out_dir) / "pil-nn.manifest.json").string());
        std::cout << "wrote " << res.checkpoints.checkpoints.size() << " checkpoints to "
                  << pil_out_dir << '\n';
        return 0;
    }

    if (pil_lda->parsed() || pil_lr_cmd->parsed()) {
        const auto samples = load_samples(lin_dataset, "");
        std::vector<std::pair<FeatureVector, int>> pairs;
        pairs.reserve(samples.size());
        for (const auto& s : samples) pairs.emplace_back(s.features, action_index(s.labels.front()));
        const LinearKind kind = pil_lda->parsed() ? LinearKind::Lda : LinearKind::LogisticRegression;
        const LinearModel model = linear_fit(kind, pairs);
        save_model(model, lin_out);
        write_manifest(pil_lda->parsed() ? "train pil-lda" : "train pil-lr",
                       {{"dataset", lin_dataset}}, 0, nullptr, {lin_out},
                       lin_out + ".manifest.json");
        std::cout << "wrote model to " << lin_out << '\n';
        return 0;
    }

    if (dagger->parsed()) {
        const TrackMap map = load_map_file(dag_map);
        Planner planner(map);
        const auto pretrain = load_samples(dag_pretrain, map.id);
        DaggerConfig dc;
        dc.iterations = dag_iters;
        dc.samples_per_iteration = dag_samples;
        dc.epochs_per_iteration = dag_epochs;
        dc.step_size = dag_lr;
        dc.batch_size = dag_batch;
        dc.step_cap = dag_cap;
        dc.rollout.random_start = dag_random_start;
        dc.rollout.noisy = dag_noisy;
        Rng rng(derive_seed(dag_seed, fnv1a64("train-dagger")));
        const DaggerResult res = train_dagger(map, planner, pretrain, dc, rng);
        fs::create_directories(dag_out_dir);
        std::vector<std::string> outputs;
        for (const Checkpoint& c : res.checkpoints.checkpoints) {
            const std::string path = (fs::path(dag_out_dir) / ("dagger-" + c.tag + ".json")).string();
            save_model(c.model, path);
            outputs.push_back(path);
        }
        const std::string trace = (fs::path(dag_out_dir) / "dagger-trace.csv").string();
        {
            std::ofstream out(trace, std::ios::binary);
            out << "iteration,aggregate_size,skipped_unsolvable,loss\n";
            out.precision(17);
            for (std::size_t i = 0; i < res.aggregate_sizes.size(); ++i)
                out << (i + 1) << ',' << res.aggregate_sizes[i] << ','
                    << (i + 1 == res.aggregate_sizes.size() ? res.skipped_unsolvable : 0) << ','
                    << res.iteration_losses[i] << '\n';
        }
        outputs.push_back(trace);
        write_manifest("train dagger",
                       {{"map", dag_map}, {"pretrain", dag_pretrain}, {"iters", dag_iters},
                        {"samples_per_iter", dag_samples}, {"epochs_per_iter", dag_epochs},
                        {"lr", dag_lr}},
                       dag_seed, &map, outputs,
                       (fs::path(dag_out_dir) / "dagger.manifest.json").string());
        std::cout << "wrote " << res.checkpoints.checkpoints.size() << " checkpoints to "
                  << dag_out_dir << " (skipped unsolvable: " << res.skipped_unsolvable << ")\n";
        return 0;
    }

    if (dqn->parsed()) {
        const TrackMap map = load_map_file(dqn_map);
        dqn_cfg.mode = parse_dqn_mode(dqn_mode);
        Rng rng(derive_seed(dqn_seed, fnv1a64("train-dqn")));
        const DqnResult res = train_dqn(map, dqn_cfg, rng);
        fs::create_directories(dqn_out_dir);
        const std::string best = (fs::path(dqn_out_dir) / "dqn-best.json").string();
        const std::string fin = (fs::path(dqn_out_dir) / "dqn-final.json").string();
        const std::string trace = (fs::path(dqn_out_dir) / "dqn-trace.csv").string();
        save_model(res.best, best);
        save_model(res.final, fin);
        write_training_trace(res.trace, trace);
        write_manifest("train dqn",
                       {{"map", dqn_map}, {"mode", dqn_mode}, {"episodes", dqn_cfg.episodes},
                        {"gamma", dqn_cfg.gamma}, {"lambda", dqn_cfg.lambda},
                        {"best_episode", res.best_episode},
                        {"best_trailing100", res.best_trailing100}},
                       dqn_seed, &map, {best, fin, trace},
                       (fs::path(dqn_out_dir) / "dqn.manifest.json").string());
        std::cout << "best trailing-100 return " << res.best_trailing100 << " at episode "
                  << res.best_episode << '\n';
        return 0;
    }

    if (eval->parsed()) {
        const TrackMap map = load_map_file(eval_map);
        Planner planner(map);
        std::vector<std::unique_ptr<Agent>> owned;
        std::vector<Agent*> agents;
        for (const std::string& spec : eval_agents) {
            owned.push_back(resolve_agent(spec, planner));
            agents.push_back(owned.back().get());
        }
        EvalConfig ec;
        ec.preset = parse_eval_preset(eval_preset);
        ec.runs = eval_runs;
        ec.step_cap = eval_cap;
        ec.gamma = eval_gamma;
        ec.master_seed = eval_seed;
        ec.velocity_bound = eval_vb;
        const auto reports = evaluate_agents(agents, map, planner, ec, eval_jobs);
        if (eval_format == "csv")
            export_reports_csv(reports, eval_out);
        else if (eval_format == "json")
            export_reports_json(reports, eval_out);
        else
            throw std::invalid_argument("unknown report format: " + eval_format);
        std::vector<std::string> outputs{eval_out};
        if (!eval_trace_dir.empty()) {
            fs::create_directories(eval_trace_dir);
            SimConfig sim;
            sim.random_start = ec.preset != EvalPreset::NS_ZV_D && ec.preset != EvalPreset::NS_ZV_N;
            sim.random_velocity = ec.preset == EvalPreset::RS_RV_D || ec.preset == EvalPreset::RS_RV_N;
            sim.velocity_bound = eval_vb;
            Rng start_rng(derive_seed(eval_seed, fnv1a64("eval-starts")));
            const State start = sample_initial_state(map, sim, start_rng);
            for (Agent* a : agents) {
                Rng rng(derive_seed(eval_seed, 0, fnv1a64(a->id())));
                const EpisodeTrace t =
                    run_episode(*a, map, start, eval_preset_noisy(ec.preset), eval_cap, rng);
                const std::string path =
                    (fs::path(eval_trace_dir) / (a->id() + "-run0.jsonl")).string();
                write_trace_jsonl(t, path);
                outputs.push_back(path);
            }
        }
        write_manifest("evaluate",
                       {{"map", eval_map}, {"preset", eval_preset}, {"runs", eval_runs},
                        {"agents", eval_agents}, {"gamma", eval_gamma}, {"jobs", eval_jobs}},
                       eval_seed, &map, outputs, eval_out + ".manifest.json");
        for (const auto& r : reports)
            std::cout << r.agent << ": win " << r.win_rate << " loss " << r.loss_rate << " timeout "
                      << r.timeout_rate << '\n';
        return 0;
    }

    if (qual->parsed()) {
        const TrackMap map = load_map_file(q_map);
        Planner planner(map);
        const auto agent = resolve_agent(q_agent, planner);
        const QualityReport rep = action_quality(*agent, map, planner, parse_quality_preset(q_preset),
                                                 q_runs, q_cap, q_seed, q_vb);
        export_quality_csv({rep}, q_out);
        write_manifest("quality",
                       {{"map", q_map}, {"agent", q_agent}, {"preset", q_preset}, {"runs", q_runs}},
                       q_seed, &map, {q_out}, q_out + ".manifest.json");
        std::cout << rep.agent << ": " << rep.decisions << " decisions, optimal " << rep.optimal
                  << ", secure " << rep.secure << ", fatal " << rep.fatal << '\n';
        return 0;
    }

    if (plan->parsed()) {
        const TrackMap map = load_map_file(plan_map);
        if (!map.traversable(plan_x, plan_y))
            throw std::invalid_argument("position is not a traversable cell");
        Planner planner(map);
        const auto p = planner.astar(State{plan_x, plan_y, plan_vx, plan_vy});
        if (!p) {
            std::cout << "unsolvable\n";
            return 2;
        }
        std::cout << "length " << p->length << '\n';
        std::cout << "optimal_first_actions:";
        for (const Action a : p->first_actions) std::cout << " (" << a.ax << ',' << a.ay << ')';
        std::cout << "\nwitness:";
        for (const Action a : p->witness) std::cout << " (" << a.ax << ',' << a.ay << ')';
        std::cout << '\n';
        return 0;
    }

    if (render->parsed()) {
        const TrackMap map = load_map_file(r_map);
        std::vector<RenderTrace> traces;
        for (const std::string& path : r_traces)
            traces.push_back({fs::path(path).stem().string(), read_trace_positions(path)});
        write_text(r_out, render_svg(map, traces));
        write_manifest("render", {{"map", r_map}, {"traces", r_traces}}, 0, &map, {r_out},
                       r_out + ".manifest.json");
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const MapParseError& e) {
        std::cerr << "map error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return 3;
    }
}
