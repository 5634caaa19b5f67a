#include "rtlab/agents.hpp"

namespace rtlab {

std::unique_ptr<Agent> make_model_agent(const Model& model, const std::string& id) {
    if (std::holds_alternative<Mlp>(model))
        return std::make_unique<MlpAgent>(std::get<Mlp>(model), id);
    return std::make_unique<LinearAgent>(std::get<LinearModel>(model), id);
}

}  // namespace rtlab
