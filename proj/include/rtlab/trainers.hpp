#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "rtlab/dataset.hpp"
#include "rtlab/models.hpp"
#include "rtlab/planner.hpp"

namespace rtlab {

struct Checkpoint {
    std::string tag;
    Mlp model;
};

struct CheckpointSet {
    std::vector<Checkpoint> checkpoints;
};

struct PilConfig {
    int max_epochs = 20;
    double step_size = 1e-3;
    int batch_size = 32;
};

struct PilResult {
    CheckpointSet checkpoints;  // one per epoch, tagged epoch-1..epoch-N
    std::vector<double> epoch_losses;
};

// One-hot targets for single-label samples, multi-hot for exhaustive ones;
// per-epoch shuffling, mini-batch MSE gradient descent.
PilResult train_pil(const std::vector<LabeledSample>& dataset, const PilConfig& config, Rng& rng);

struct DaggerConfig {
    int iterations = 20;
    int samples_per_iteration = 5000;
    int epochs_per_iteration = 8;
    double step_size = 1e-3;
    int batch_size = 32;
    int step_cap = 1000;
    SimConfig rollout;  // defaults to NS-ZV deterministic
};

struct DaggerResult {
    CheckpointSet checkpoints;  // one per iteration, tagged iter-1..iter-N
    std::vector<std::size_t> aggregate_sizes;
    std::size_t skipped_unsolvable = 0;
    std::vector<double> iteration_losses;
};

DaggerResult train_dagger(const TrackMap& map, Planner& planner,
                          const std::vector<LabeledSample>& pretrain, const DaggerConfig& config,
                          Rng& rng);

enum class DqnMode { NS_D, NS_N, RS_D, RS_N };

DqnMode parse_dqn_mode(const std::string& name);
std::string dqn_mode_name(DqnMode mode);

struct DqnConfig {
    DqnMode mode = DqnMode::NS_D;
    std::size_t buffer_capacity = 100000;
    std::size_t episodes = 100000;
    double gamma = 0.99;
    double epsilon0 = 1.0;
    double lambda = 0.999;
    double epsilon_end = 1e-4;
    int batch_size = 32;
    int target_sync_interval = 500;  // gradient steps between target copies
    int train_interval = 1;          // environment steps between gradient steps
    double reward_scale = 1.0;       // reward multiplier for regression targets only
    double step_size = 1e-3;
    int step_cap = 1000;
};

struct Transition {
    FeatureVector features;
    int action = 0;
    double reward = 0.0;
    FeatureVector next_features;
    bool terminal = false;
};

// Bounded FIFO with uniform sampling (with replacement).
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}
    void push(Transition t) {
        if (buf_.size() == capacity_) buf_.pop_front();
        buf_.push_back(std::move(t));
    }
    std::vector<Transition> sample(std::size_t batch_size, Rng& rng) const {
        if (buf_.size() < batch_size)
            throw std::runtime_error("replay buffer holds fewer transitions than the batch size");
        std::vector<Transition> batch;
        batch.reserve(batch_size);
        for (std::size_t i = 0; i < batch_size; ++i) batch.push_back(buf_[rng.uniform_index(buf_.size())]);
        return batch;
    }
    std::size_t size() const { return buf_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t i) const { return buf_[i]; }

private:
    std::size_t capacity_;
    std::deque<Transition> buf_;
};

struct EpisodeStat {
    std::size_t episode = 0;
    double ret = 0.0;  // undiscounted
    int steps = 0;
    double epsilon = 0.0;
    double trailing100 = 0.0;
};

struct DqnResult {
    Mlp best;
    Mlp final;
    double best_trailing100 = 0.0;
    std::size_t best_episode = 0;
    std::vector<EpisodeStat> trace;
};

DqnResult train_dqn(const TrackMap& map, const DqnConfig& config, Rng& rng);

// epsilon after i episodes: running product of lambda clamped at epsilon_end
double epsilon_at(std::size_t i, double epsilon0 = 1.0, double lambda = 0.999,
                  double epsilon_end = 1e-4);

void write_training_trace(const std::vector<EpisodeStat>& trace, const std::string& path);

// targets for imitation samples: 1 at every labeled action, 0 elsewhere
Scores sample_targets(const LabeledSample& sample);

}  // namespace rtlab
