#pragma once

#include <memory>
#include <string>

#include "rtlab/models.hpp"
#include "rtlab/planner.hpp"
#include "rtlab/track.hpp"

namespace rtlab {

// A policy queried once per step. The rng is the agent's own decision stream
// (the environment noise uses a separate one).
class Agent {
public:
    virtual ~Agent() = default;
    virtual Action act(const TrackMap& map, const State& state, Rng& rng) = 0;
    virtual std::string id() const = 0;
};

// First optimal action in canonical order; idles on unsolvable states.
class ExpertAgent : public Agent {
public:
    explicit ExpertAgent(Planner& planner) : planner_(planner) {}
    Action act(const TrackMap&, const State& state, Rng&) override {
        if (!planner_.is_solvable(state)) return Action{0, 0};
        return planner_.astar(state)->first_actions.front();
    }
    std::string id() const override { return "expert"; }

private:
    Planner& planner_;
};

class RandomAgent : public Agent {
public:
    Action act(const TrackMap&, const State&, Rng& rng) override {
        return kActions[rng.uniform_index(kActions.size())];
    }
    std::string id() const override { return "random"; }
};

class IdleAgent : public Agent {
public:
    Action act(const TrackMap&, const State&, Rng&) override { return Action{0, 0}; }
    std::string id() const override { return "idle"; }
};

class MlpAgent : public Agent {
public:
    MlpAgent(Mlp model, std::string id) : model_(std::move(model)), id_(std::move(id)) {}
    Action act(const TrackMap& map, const State& state, Rng&) override {
        return greedy_action(mlp_forward(model_, encode_features(map, state)));
    }
    std::string id() const override { return id_; }
    const Mlp& model() const { return model_; }

private:
    Mlp model_;
    std::string id_;
};

class LinearAgent : public Agent {
public:
    LinearAgent(LinearModel model, std::string id) : model_(std::move(model)), id_(std::move(id)) {}
    Action act(const TrackMap& map, const State& state, Rng&) override {
        return linear_predict(model_, encode_features(map, state));
    }
    std::string id() const override { return id_; }

private:
    LinearModel model_;
    std::string id_;
};

std::unique_ptr<Agent> make_model_agent(const Model& model, const std::string& id);

}  // namespace rtlab
