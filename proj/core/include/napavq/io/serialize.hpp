#pragma once

#include "napavq/harness/metrics.hpp"
#include "napavq/harness/run.hpp"
#include "napavq/model/feature_model.hpp"
#include "napavq/proto/prototypes.hpp"
#include "napavq/vq/coding_vectors.hpp"
#include "napavq/vq/topology.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace napavq::io {

inline constexpr const char* kModelFormat = "napavq-model/1";
inline constexpr const char* kGraphFormat = "napavq-graph/1";
inline constexpr const char* kPrototypeFormat = "napavq-prototypes/1";
inline constexpr const char* kRunFormat = "napavq-run/1";

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

/// {"format", "params": {K, epsilon, e_min}, "dim", "nodes": [{id, frozen,
/// vector}], "edges": [{i, j, strength}]} with i < j.
nlohmann::json graph_to_json(const vq::CodingVectorSet& cvs, const vq::TopologyGraph& graph);
void graph_from_json(const nlohmann::json& doc, vq::CodingVectorSet& cvs, vq::TopologyGraph& graph);

/// {"format", "classes": {"<id>": {"task", "vector"}}}
nlohmann::json prototypes_to_json(const proto::PrototypeStore& store);
proto::PrototypeStore prototypes_from_json(const nlohmann::json& doc);

/// {"format", "version", "layers": [{"in", "out", "activation", "weight"
/// (row-major), "bias"}]}
nlohmann::json model_to_json(const model::FeatureModel& model);
model::FeatureModel model_from_json(const nlohmann::json& doc);

nlohmann::json head_to_json(const model::SoftmaxHead& head);
model::SoftmaxHead head_from_json(const nlohmann::json& doc);

/// Config echo, seed, accuracy matrix, metrics, per-step confusion matrices
/// and predictions.
nlohmann::json run_result_to_json(const harness::RunResult& result);
harness::RunResult run_result_from_json(const nlohmann::json& doc);

/// Per-epoch training events, one CSV row each.
std::string format_events(const std::vector<harness::EpochEvent>& events);
std::string format_confusion(const harness::ConfusionMatrix& cm);
std::string format_k_sweep(const std::vector<harness::KSweepRow>& rows);

/// Rows of (f0..f{n-1}, label, predicted, task) for every sample.
std::string format_embeddings(const harness::TrainedState& state, const harness::Dataset& data,
                              const harness::TaskSchedule& schedule);
void export_embeddings(const harness::TrainedState& state, const harness::Dataset& data,
                       const harness::TaskSchedule& schedule, const std::string& path);

/// Writes config.json, result.json, events.csv, confusion_t<k>.csv,
/// model.json, graph.json, prototypes.json (and head.json for the softmax
/// baseline) into `dir`.
void write_run_directory(const std::string& dir, const harness::RunOutput& run);
harness::TrainedState load_trained_state(const std::string& dir);

}  // namespace napavq::io
