#pragma once

#include "napavq/harness/data.hpp"
#include "napavq/harness/metrics.hpp"
#include "napavq/io/config.hpp"
#include "napavq/model/feature_model.hpp"
#include "napavq/model/softmax_head.hpp"
#include "napavq/proto/prototypes.hpp"
#include "napavq/vq/coding_vectors.hpp"
#include "napavq/vq/topology.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace napavq::harness {

/// The ablation ladder plus plain fine-tuning.
enum class Variant {
    BaselineCceKd,   ///< softmax head + cross entropy + distillation
    DceKd,           ///< distance cross entropy + distillation
    NavqKd,          ///< + neighbourhood adaptation
    NavqGaussianPa,  ///< + mean-plus-noise prototypes
    FullNapavq,      ///< + neighbourhood-aware prototypes
    Finetune,        ///< distance cross entropy only
};

inline constexpr std::array<Variant, 6> kAllVariants{
    Variant::BaselineCceKd, Variant::DceKd,      Variant::NavqKd,
    Variant::NavqGaussianPa, Variant::FullNapavq, Variant::Finetune};

std::string_view to_string(Variant v);
/// Throws ConfigError for unknown names.
Variant variant_from_string(std::string_view name);

struct VariantFlags {
    enum class Head { Quantizer, Softmax };
    enum class Augment { None, Gaussian, Neighborhood };

    Head head = Head::Quantizer;
    bool na = true;
    bool kd = true;
    Augment augment = Augment::Neighborhood;

    static VariantFlags of(Variant v);
};

/// Everything learned by a run; what the export commands serialise.
struct TrainedState {
    model::FeatureModel model;
    vq::CodingVectorSet cvs{1};
    vq::TopologyGraph graph;
    proto::PrototypeStore prototypes;
    std::optional<model::SoftmaxHead> head;
    bool rotation = false;
};

/// Per-epoch training record.
struct EpochEvent {
    int task = 0;
    int epoch = 0;
    double total = 0.0;
    double dce = 0.0;
    double na = 0.0;
    double hat_dce = 0.0;
    double hat_na = 0.0;
    double kd = 0.0;
    std::size_t edges = 0;
    friend bool operator==(const EpochEvent&, const EpochEvent&) = default;
};

struct StepPredictions {
    std::vector<int> predicted;
    std::vector<int> truth;
    friend bool operator==(const StepPredictions&, const StepPredictions&) = default;
};

struct RunResult {
    io::RunConfig config;
    std::string variant;
    std::uint64_t seed = 0;
    AccuracyMatrix accuracy;
    std::vector<double> pooled;       ///< pooled accuracy after each task
    double average_accuracy = 0.0;
    double average_forgetting = 0.0;
    std::vector<double> forgetting;   ///< forgetting after each task
    std::vector<ConfusionMatrix> confusion;  ///< after each task, seen classes only
    std::vector<StepPredictions> predictions;
    std::vector<EpochEvent> events;

    /// Recomputes every scalar from `accuracy` and compares exactly.
    bool metrics_consistent() const;
};

struct RunOutput {
    RunResult result;
    TrainedState state;
};

using EventSink = std::function<void(const EpochEvent&)>;

/// Builds the data stream described by a config (synthetic or tables).
Stream make_stream(const io::RunConfig& config);

/// Trains task by task and evaluates on every seen task after each one.
/// Which losses and augmentations participate is decided by `variant`.
RunOutput run_incremental(const Stream& stream, const io::RunConfig& config, Variant variant,
                          const EventSink& sink = {});

/// Convenience: run_incremental with the variant named in the config.
RunOutput run_incremental(const Stream& stream, const io::RunConfig& config,
                          const EventSink& sink = {});

/// Builds the stream from the config and runs one variant of the ladder.
RunOutput run_ablation(const io::RunConfig& config, Variant variant, const EventSink& sink = {});

struct KSweepRow {
    int K = 0;
    bool ok = true;
    std::string warning;
    double average_accuracy = 0.0;
    double average_forgetting = 0.0;
    double wall_seconds = 0.0;
};

/// One full run per K with a shared seed. K < 2 yields a warning row.
std::vector<KSweepRow> k_sweep(const io::RunConfig& config, const std::vector<int>& k_values);

/// Number of neighbours actually linked per update when only `available`
/// coding vectors exist: min(K, available), or 0 when fewer than two exist.
int effective_connectivity(int K, std::size_t available);

/// Predicts original class labels for every sample of `data` using the
/// trained state (nearest normalised CV, or arg-max logits for the softmax
/// head), restricted to `candidates` (original ids).
std::vector<int> predict(const TrainedState& state, const Dataset& data,
                         std::span<const ClassId> candidates, bool parallel = false);

/// Features of every sample under the trained extractor.
std::vector<Vec> extract_features(const model::FeatureModel& model, const Dataset& data);

}  // namespace napavq::harness
