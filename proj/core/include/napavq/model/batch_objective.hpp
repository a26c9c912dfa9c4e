#pragma once

#include "napavq/linalg.hpp"
#include "napavq/model/feature_model.hpp"
#include "napavq/model/objective.hpp"
#include "napavq/model/softmax_head.hpp"
#include "napavq/proto/prototypes.hpp"
#include "napavq/vq/coding_vectors.hpp"
#include "napavq/vq/topology.hpp"

#include <optional>
#include <span>

namespace napavq::model {

/// One mini-batch of current-task data plus the optional replay inputs.
struct BatchInputs {
    std::span<const Vec> x;
    std::span<const ClassId> y;
    const FeatureModel* previous = nullptr;           ///< distillation teacher, t > 0
    const proto::AugmentedBatch* prototypes = nullptr;  ///< old-class prototypes, t > 0
};

struct ObjectiveSettings {
    int task = 0;
    double tau = 0.1;
    double beta = 1.0;
    LossWeights weights;
    bool na = true;
    bool kd = true;
};

/// Loss terms, total and gradients of one mini-batch. Per-sample and
/// per-prototype terms are summed and divided by the data batch size; the
/// distillation term is the batch mean.
struct BatchObjective {
    LossTerms terms;
    double total = 0.0;
    ModelGrad model_grad;
    Mat cv_grads;                      ///< quantizer variants
    std::optional<HeadGrad> head_grad;  ///< softmax baseline
};

BatchObjective quantizer_objective(const FeatureModel& model, const vq::CodingVectorSet& cvs,
                                   const vq::TopologyGraph& graph, const BatchInputs& batch,
                                   const ObjectiveSettings& settings);

/// Cross entropy on a softmax head plus distillation. Prototypes are ignored.
BatchObjective softmax_objective(const FeatureModel& model, const SoftmaxHead& head,
                                 const BatchInputs& batch, const ObjectiveSettings& settings);

}  // namespace napavq::model
