#pragma once

#include "napavq/linalg.hpp"
#include "napavq/model/feature_model.hpp"
#include "napavq/vq/coding_vectors.hpp"

#include <span>

namespace napavq::harness {

/// Nearest coding vector after projecting both the feature and the CVs on
/// the unit sphere (smoothed norms). Ties go to the lower id.
ClassId classify_feature(const Vec& z, const vq::CodingVectorSet& cvs,
                         std::span<const ClassId> candidates);

ClassId classify(const Vec& x, const model::FeatureModel& model, const vq::CodingVectorSet& cvs,
                 std::span<const ClassId> candidates);

}  // namespace napavq::harness
