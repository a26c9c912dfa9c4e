#pragma once

#include "napavq/harness/synthetic.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace napavq::io {

/// Where the data comes from: the synthetic generator or feature tables.
struct DatasetConfig {
    std::string kind = "synthetic";  ///< "synthetic" | "table"
    harness::SyntheticSpec synthetic;
    std::string train_table;
    std::string test_table;       ///< optional; otherwise split from train_table
    double test_fraction = 0.3;

    friend bool operator==(const DatasetConfig&, const DatasetConfig&) = default;
};

/// Every knob of a run. Documented in README.md ("Configuration").
struct RunConfig {
    DatasetConfig dataset;
    int tasks = 5;
    int first_task_classes = 0;

    int K = 15;
    double epsilon = 0.9;
    double e_min = 0.05;
    double beta = 1.0;
    double tau = 0.1;
    double lambda1 = 10.0;
    double lambda2 = 10.0;

    double lr_theta = 0.0005;
    double lr_phi = 0.05;
    int epochs = 20;
    int batch_size = 32;
    std::vector<int> hidden{64, 64};
    int feature_dim = 16;
    std::string activation = "relu";
    double grad_clip = 0.0;

    bool rotation = false;
    int protos_per_class = 1;
    bool alpha_clip = false;
    double cv_init_scale = 0.1;
    double gaussian_pa_sigma = 1.0;

    std::string variant = "full_napavq";
    std::uint64_t seed = 0;
    bool deterministic = true;
    std::string output_dir = "runs/default";

    /// Range checks; throws ConfigError naming the offending key.
    void validate() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses a JSON document; missing keys take their defaults, unknown keys
/// are rejected. The result is validated.
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<inline>");
RunConfig load_config(const std::string& path);

/// Applies "key=value" overrides (dotted keys reach into "dataset", values
/// are parsed as JSON and fall back to plain strings). Revalidates.
RunConfig apply_overrides(RunConfig config, const std::vector<std::string>& overrides);

nlohmann::json config_to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& doc, const std::string& origin = "<json>");

}  // namespace napavq::io
