#pragma once

#include "napavq/linalg.hpp"
#include "napavq/model/feature_model.hpp"
#include "napavq/vq/coding_vectors.hpp"

#include <optional>

namespace napavq::model {

struct LossWeights {
    double lambda1 = 10.0;  ///< prototype cross-entropy weight
    double lambda2 = 10.0;  ///< distillation weight

    void validate() const;
};

/// Scalar loss terms of one step. The prototype and distillation terms exist
/// exactly when the task index is positive.
struct LossTerms {
    double dce = 0.0;
    double na = 0.0;
    std::optional<double> hat_dce;
    std::optional<double> hat_na;
    std::optional<double> kd;
};

/// t == 0: dce + na.  t > 0: dce + l1*hat_dce + na + hat_na + l2*kd.
double total_loss(const LossTerms& terms, const LossWeights& weights, int task);

struct LearningRates {
    double theta = 0.0005;  ///< feature extractor
    double phi = 0.05;    ///< coding vectors
};

/// Plain gradient descent on the extractor and the unfrozen coding vectors.
/// `cv_grads` has one row per coding vector. When clip_norm > 0 the joint
/// gradient is rescaled to at most that norm. Any non-finite gradient aborts
/// the step with NumericFailure before anything is modified.
void sgd_step(FeatureModel& model, vq::CodingVectorSet& cvs, const ModelGrad& model_grad,
              const Mat& cv_grads, const LearningRates& lr, double clip_norm = 0.0);

}  // namespace napavq::model
