#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rtlab/planner.hpp"
#include "rtlab/track.hpp"

namespace rtlab {

// The six sampling presets used to build labeled data sets.
enum class DatasetPreset { RS_RV, NS_ZV_T, RS_ZV_T, RS_RV_T, RS_RV_E, RS_RV_U };

DatasetPreset parse_preset(const std::string& name);  // throws on unknown names
std::string preset_name(DatasetPreset preset);

struct DatasetConfig {
    DatasetPreset preset = DatasetPreset::NS_ZV_T;
    std::size_t size = 100000;
    int velocity_bound = 5;

    bool random_start() const { return preset != DatasetPreset::NS_ZV_T; }
    bool random_velocity() const {
        return preset == DatasetPreset::RS_RV || preset == DatasetPreset::RS_RV_T ||
               preset == DatasetPreset::RS_RV_E || preset == DatasetPreset::RS_RV_U;
    }
    bool trajectory() const {
        return preset == DatasetPreset::NS_ZV_T || preset == DatasetPreset::RS_ZV_T ||
               preset == DatasetPreset::RS_RV_T;
    }
    bool exhaustive() const { return preset == DatasetPreset::RS_RV_E; }
    bool unique_only() const { return preset == DatasetPreset::RS_RV_U; }
};

struct LabeledSample {
    State state;
    FeatureVector features;
    std::vector<Action> labels;  // nonempty; all expert-optimal
    bool operator==(const LabeledSample&) const = default;
};

// Draws solvable seed states and labels them with the expert; T-presets add
// whole optimal traces, E keeps all optimal actions, U keeps only states with
// a unique optimal action.
std::vector<LabeledSample> generate(const TrackMap& map, Planner& planner,
                                    const DatasetConfig& config, Rng& rng);

struct DatasetHeader {
    std::string map_id;
    std::string preset;
    std::uint64_t size = 0;
    std::uint64_t seed = 0;
    int velocity_bound = 5;
};

struct DatasetFile {
    DatasetHeader header;
    std::vector<LabeledSample> samples;
};

struct DatasetFormatError : std::runtime_error {
    DatasetFormatError(const std::string& msg, std::size_t line)
        : std::runtime_error(msg), line(line) {}
    std::size_t line;  // 1-based
};

// JSON lines: one header object, then one object per sample.
void write_dataset(const std::vector<LabeledSample>& samples, const DatasetHeader& header,
                   const std::string& path);
DatasetFile read_dataset(const std::string& path, const std::string& expected_map_id = "");

}  // namespace rtlab
