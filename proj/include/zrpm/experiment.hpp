#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace zrpm {

// Parsed and validated experiment description.
struct ExperimentConfig {
    nlohmann::json raw;  // effective config, seed included
    std::vector<std::vector<double>> rates;
    std::vector<std::string> labels;
    std::vector<int> s_star;  // empty: detected
    double alpha = 0.0;
    double eps = 0.05;
    std::vector<long> n;
    std::vector<int> a, b;
    std::uint64_t seed = 1;
    std::string sets = "valley";  // or "condensate"
    nlohmann::json options = nlohmann::json::object();
    std::string hash;

    template <class T>
    T option(const char* key, T fallback) const {
        return options.contains(key) ? options.at(key).get<T>() : fallback;
    }
};

// Throws ConfigInvalid naming the offending field path.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
ExperimentConfig with_seed(const ExperimentConfig& c, std::uint64_t seed);

// FNV-1a over the canonical dump, 16 hex digits.
std::string config_hash(const nlohmann::json& j);

const std::vector<std::string>& experiment_commands();

struct Artifact {
    std::string name;
    std::string content;
};

struct RunOutput {
    std::vector<Artifact> files;
    bool passed = true;  // every exact check of the command held
};

RunOutput run_experiment(const std::string& command, const ExperimentConfig& cfg, int threads = 1);

// Writes into root/<command>-<hash>; returns that directory.
std::string write_artifacts(const std::string& root, const std::string& command, const ExperimentConfig& cfg,
                            const RunOutput& out);

}  // namespace zrpm
