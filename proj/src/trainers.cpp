#include "rtlab/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace rtlab {

Scores sample_targets(const LabeledSample& sample) {
    Scores t{};
    for (const Action a : sample.labels) t[action_index(a)] = 1.0;
    return t;
}

namespace {

// one pass over the data in mini-batches; returns the mean batch loss
double run_epoch(Mlp& mlp, const std::vector<LabeledSample>& data, std::vector<std::size_t>& order,
                 int batch_size, double step_size, Rng& rng) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    TrainBatch batch;
    for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
        const std::size_t end = std::min(order.size(), begin + batch_size);
        batch.inputs.clear();
        batch.targets.clear();
        for (std::size_t i = begin; i < end; ++i) {
            batch.inputs.push_back(data[order[i]].features);
            batch.targets.push_back(sample_targets(data[order[i]]));
        }
        loss_sum += mlp_train_batch(mlp, batch, step_size);
        ++batches;
    }
    return batches ? loss_sum / static_cast<double>(batches) : 0.0;
}

}  // namespace

PilResult train_pil(const std::vector<LabeledSample>& dataset, const PilConfig& config, Rng& rng) {
    if (dataset.empty()) throw std::invalid_argument("training dataset is empty");
    if (config.max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");

    PilResult result;
    Mlp mlp = mlp_init(rng);
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const double loss = run_epoch(mlp, dataset, order, config.batch_size, config.step_size, rng);
        result.epoch_losses.push_back(loss);
        result.checkpoints.checkpoints.push_back({"epoch-" + std::to_string(epoch), mlp});
    }
    return result;
}

DaggerResult train_dagger(const TrackMap& map, Planner& planner,
                          const std::vector<LabeledSample>& pretrain, const DaggerConfig& config,
                          Rng& rng) {
    if (pretrain.empty()) throw std::invalid_argument("pretrain dataset is empty");
    config.rollout.validate();

    DaggerResult result;
    std::vector<LabeledSample> aggregate = pretrain;
    std::vector<std::size_t> order;

    auto train_fresh = [&](int epochs) {
        Mlp mlp = mlp_init(rng);
        order.resize(aggregate.size());
        std::iota(order.begin(), order.end(), 0);
        double loss = 0.0;
        for (int e = 0; e < epochs; ++e)
            loss = run_epoch(mlp, aggregate, order, config.batch_size, config.step_size, rng);
        result.iteration_losses.push_back(loss);
        return mlp;
    };

    Mlp policy = train_fresh(config.epochs_per_iteration);
    result.iteration_losses.clear();  // pretraining loss is not an iteration entry

    for (int iter = 1; iter <= config.iterations; ++iter) {
        // roll out the current greedy policy (beta = 0) and collect visited states
        int collected = 0;
        std::vector<State> visited;
        visited.reserve(static_cast<std::size_t>(config.samples_per_iteration));
        while (collected < config.samples_per_iteration) {
            State s = sample_initial_state(map, config.rollout, rng);
            for (int step = 0; step < config.step_cap && collected < config.samples_per_iteration; ++step) {
                visited.push_back(s);
                ++collected;
                const Action a = greedy_action(mlp_forward(policy, encode_features(map, s)));
                const StepResult r = apply_action(map, s, a, config.rollout.noisy, rng);
                if (r.outcome.kind != StepOutcome::Kind::Moved) break;
                s = r.outcome.next;
            }
        }

        for (const State& s : visited) {
            if (!planner.is_solvable(s)) {
                ++result.skipped_unsolvable;
                continue;
            }
            aggregate.push_back({s, encode_features(map, s), {planner.astar(s)->first_actions.front()}});
        }
        result.aggregate_sizes.push_back(aggregate.size());

        policy = train_fresh(config.epochs_per_iteration);
        result.checkpoints.checkpoints.push_back({"iter-" + std::to_string(iter), policy});
    }
    return result;
}

DqnMode parse_dqn_mode(const std::string& name) {
    if (name == "NS-D") return DqnMode::NS_D;
    if (name == "NS-N") return DqnMode::NS_N;
    if (name == "RS-D") return DqnMode::RS_D;
    if (name == "RS-N") return DqnMode::RS_N;
    throw std::invalid_argument("unknown DQN training mode: " + name);
}

std::string dqn_mode_name(DqnMode mode) {
    switch (mode) {
        case DqnMode::NS_D: return "NS-D";
        case DqnMode::NS_N: return "NS-N";
        case DqnMode::RS_D: return "RS-D";
        case DqnMode::RS_N: return "RS-N";
    }
    throw std::invalid_argument("invalid DQN mode value");
}

double epsilon_at(std::size_t i, double epsilon0, double lambda, double epsilon_end) {
    double p = epsilon0;
    for (std::size_t k = 0; k < i; ++k) p *= lambda;
    return std::max(p, epsilon_end);
}

DqnResult train_dqn(const TrackMap& map, const DqnConfig& config, Rng& rng) {
    const bool random_start = config.mode == DqnMode::RS_D || config.mode == DqnMode::RS_N;
    const bool noisy = config.mode == DqnMode::NS_N || config.mode == DqnMode::RS_N;
    SimConfig start_cfg;
    start_cfg.random_start = random_start;

    DqnResult result;
    Mlp mlp = mlp_init(rng);
    Mlp target = mlp;
    ReplayBuffer buffer(config.buffer_capacity);

    double epsilon = config.epsilon0;
    std::size_t grad_steps = 0;
    std::size_t env_steps = 0;
    std::deque<double> trailing;
    double trailing_sum = 0.0;
    bool have_best = false;

    TrainBatch batch;
    result.trace.reserve(config.episodes);

    for (std::size_t episode = 1; episode <= config.episodes; ++episode) {
        State s = sample_initial_state(map, start_cfg, rng);
        double episode_return = 0.0;
        int steps = 0;

        for (; steps < config.step_cap; ) {
            const FeatureVector feats = encode_features(map, s);
            Action a;
            if (rng.uniform() < epsilon)
                a = kActions[rng.uniform_index(kActions.size())];
            else
                a = greedy_action(mlp_forward(mlp, feats));

            const StepResult r = apply_action(map, s, a, noisy, rng);
            ++steps;
            episode_return += r.reward;
            const bool terminal = r.outcome.kind != StepOutcome::Kind::Moved;

            Transition t;
            t.features = feats;
            t.action = action_index(a);
            t.reward = r.reward * config.reward_scale;  // greedy argmax is scale-invariant
            t.terminal = terminal;
            if (!terminal) t.next_features = encode_features(map, r.outcome.next);
            buffer.push(std::move(t));

            ++env_steps;
            if (buffer.size() >= static_cast<std::size_t>(config.batch_size) &&
                env_steps % static_cast<std::size_t>(config.train_interval) == 0) {
                const auto sampled = buffer.sample(static_cast<std::size_t>(config.batch_size), rng);
                batch.inputs.clear();
                batch.targets.clear();
                for (const Transition& tr : sampled) {
                    Scores pred = mlp_forward(mlp, tr.features);
                    double y = tr.reward;
                    if (!tr.terminal) {
                        const Scores q = mlp_forward(target, tr.next_features);
                        y += config.gamma * *std::max_element(q.begin(), q.end());
                    }
                    pred[tr.action] = y;  // loss is restricted to the taken action
                    batch.inputs.push_back(tr.features);
                    batch.targets.push_back(pred);
                }
                mlp_train_batch(mlp, batch, config.step_size);
                ++grad_steps;
                if (grad_steps % static_cast<std::size_t>(config.target_sync_interval) == 0)
                    target = mlp;
            }

            if (terminal) break;
            s = r.outcome.next;
        }

        trailing.push_back(episode_return);
        trailing_sum += episode_return;
        if (trailing.size() > 100) {
            trailing_sum -= trailing.front();
            trailing.pop_front();
        }
        const double trailing_avg = trailing_sum / static_cast<double>(trailing.size());

        if (!have_best || trailing_avg > result.best_trailing100) {
            have_best = true;
            result.best_trailing100 = trailing_avg;
            result.best_episode = episode;
            result.best = mlp;
        }

        result.trace.push_back({episode, episode_return, steps, epsilon, trailing_avg});
        epsilon = std::max(epsilon * config.lambda, config.epsilon_end);
    }

    result.final = mlp;
    return result;
}

void write_training_trace(const std::vector<EpisodeStat>& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open trace file for writing: " + path);
    out << "episode,return,steps,epsilon,trailing100\n";
    out.precision(17);
    for (const auto& e : trace)
        out << e.episode << ',' << e.ret << ',' << e.steps << ',' << e.epsilon << ','
            << e.trailing100 << '\n';
}

}  // namespace rtlab
