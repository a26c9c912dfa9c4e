#pragma once

#include "napavq/linalg.hpp"

#include <span>

namespace napavq::model {

/// Linear classifier head used by the cross-entropy baseline:
/// logits = W z + b, one row per class id.
struct SoftmaxHead {
    Mat weight;  ///< classes x n
    Vec bias;

    std::size_t num_classes() const noexcept { return static_cast<std::size_t>(weight.rows()); }
    /// Appends `count` Gaussian-initialised rows with zero bias.
    void add_classes(std::size_t count, int feature_dim, Rng& rng, double init_scale);
    /// Arg-max logit among `candidates`, ties to the lower id.
    ClassId predict(const Vec& z, std::span<const ClassId> candidates) const;
};

struct HeadGrad {
    Mat weight;
    Vec bias;
};

/// Categorical cross entropy over all head rows for label y. Adds
/// scale * gradients into `grad_z` and `grad`; returns the unscaled loss.
double cce_loss(const SoftmaxHead& head, const Vec& z, ClassId y, Vec& grad_z, HeadGrad& grad,
                double scale = 1.0);

}  // namespace napavq::model
