#include "rtlab/dataset.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace rtlab {

using nlohmann::json;

DatasetPreset parse_preset(const std::string& name) {
    if (name == "RS-RV") return DatasetPreset::RS_RV;
    if (name == "NS-ZV-T") return DatasetPreset::NS_ZV_T;
    if (name == "RS-ZV-T") return DatasetPreset::RS_ZV_T;
    if (name == "RS-RV-T") return DatasetPreset::RS_RV_T;
    if (name == "RS-RV-E") return DatasetPreset::RS_RV_E;
    if (name == "RS-RV-U") return DatasetPreset::RS_RV_U;
    throw std::invalid_argument("unknown dataset preset: " + name);
}

std::string preset_name(DatasetPreset preset) {
    switch (preset) {
        case DatasetPreset::RS_RV: return "RS-RV";
        case DatasetPreset::NS_ZV_T: return "NS-ZV-T";
        case DatasetPreset::RS_ZV_T: return "RS-ZV-T";
        case DatasetPreset::RS_RV_T: return "RS-RV-T";
        case DatasetPreset::RS_RV_E: return "RS-RV-E";
        case DatasetPreset::RS_RV_U: return "RS-RV-U";
    }
    throw std::invalid_argument("invalid preset value");
}

std::vector<LabeledSample> generate(const TrackMap& map, Planner& planner,
                                    const DatasetConfig& config, Rng& rng) {
    if (config.size == 0) throw std::invalid_argument("dataset size must be >= 1");

    SimConfig sim;
    sim.random_start = config.random_start();
    sim.random_velocity = config.random_velocity();
    sim.velocity_bound = config.velocity_bound;
    const SolvablePred solvable = [&planner](const State& s) { return planner.is_solvable(s); };

    std::vector<LabeledSample> samples;
    samples.reserve(config.size);
    while (samples.size() < config.size) {
        const State seed = sample_initial_state(map, sim, rng, solvable);
        if (config.trajectory()) {
            for (const auto& [s, a] : planner.optimal_trace(seed))
                samples.push_back({s, encode_features(map, s), {a}});
        } else {
            const auto plan = planner.astar(seed);
            if (config.unique_only() && plan->first_actions.size() != 1) continue;
            std::vector<Action> labels;
            if (config.exhaustive())
                labels = plan->first_actions;
            else
                labels = {plan->first_actions.front()};
            samples.push_back({seed, encode_features(map, seed), std::move(labels)});
        }
    }
    samples.resize(config.size);  // a T-trace may overshoot
    return samples;
}

void write_dataset(const std::vector<LabeledSample>& samples, const DatasetHeader& header,
                   const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open dataset file for writing: " + path);

    json h;
    h["map_id"] = header.map_id;
    h["preset"] = header.preset;
    h["size"] = header.size;
    h["seed"] = header.seed;
    h["velocity_bound"] = header.velocity_bound;
    out << h.dump() << '\n';

    for (const auto& s : samples) {
        json j;
        j["x"] = s.state.x;
        j["y"] = s.state.y;
        j["vx"] = s.state.vx;
        j["vy"] = s.state.vy;
        j["features"] = s.features;
        auto labels = json::array();
        for (const Action a : s.labels) labels.push_back(json::array({a.ax, a.ay}));
        j["labels"] = std::move(labels);
        out << j.dump() << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

DatasetFile read_dataset(const std::string& path, const std::string& expected_map_id) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);

    DatasetFile file;
    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(in, line)) throw DatasetFormatError("missing header line", 1);
    ++lineno;
    try {
        const json h = json::parse(line);
        file.header.map_id = h.at("map_id").get<std::string>();
        file.header.preset = h.at("preset").get<std::string>();
        file.header.size = h.at("size").get<std::uint64_t>();
        file.header.seed = h.at("seed").get<std::uint64_t>();
        file.header.velocity_bound = h.at("velocity_bound").get<int>();
    } catch (const json::exception& e) {
        throw DatasetFormatError(std::string("malformed header: ") + e.what(), lineno);
    }
    try {
        parse_preset(file.header.preset);
    } catch (const std::invalid_argument& e) {
        throw DatasetFormatError(e.what(), 1);
    }
    if (!expected_map_id.empty() && file.header.map_id != expected_map_id)
        throw DatasetFormatError(
            "dataset was generated on map '" + file.header.map_id + "', expected '" + expected_map_id + "'", 1);

    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            LabeledSample s;
            s.state = {j.at("x").get<int>(), j.at("y").get<int>(), j.at("vx").get<int>(),
                       j.at("vy").get<int>()};
            const auto& feats = j.at("features");
            if (feats.size() != s.features.size())
                throw DatasetFormatError("feature vector must have 15 entries", lineno);
            for (std::size_t i = 0; i < s.features.size(); ++i) s.features[i] = feats[i].get<double>();
            for (const auto& l : j.at("labels"))
                s.labels.push_back({l.at(0).get<int>(), l.at(1).get<int>()});
            if (s.labels.empty()) throw DatasetFormatError("sample has no labels", lineno);
            file.samples.push_back(std::move(s));
        } catch (const json::exception& e) {
            throw DatasetFormatError(std::string("malformed sample: ") + e.what(), lineno);
        }
    }
    if (file.samples.size() != file.header.size)
        throw DatasetFormatError("sample count does not match header size (truncated file?)", lineno + 1);
    return file;
}

}  // namespace rtlab
