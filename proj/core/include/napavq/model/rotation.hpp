#pragma once

#include "napavq/linalg.hpp"

#include <span>
#include <vector>

namespace napavq::model {

/// Square image, row-major with interleaved channels.
struct GridSample {
    int height = 0;
    int width = 0;
    int channels = 1;
    std::vector<double> pixels;
    ClassId label = 0;

    Vec flatten() const { return to_vec(pixels); }
};

/// Rotates by k quarter turns clockwise.
GridSample rotate_clockwise(const GridSample& g, int quarter_turns);

inline ClassId pseudo_label(ClassId original, int quarter_turns) { return original * 4 + quarter_turns; }
inline ClassId original_label(ClassId pseudo) { return pseudo / 4; }
inline int rotation_of(ClassId pseudo) { return pseudo % 4; }

/// Four copies of every sample, rotated by 0/90/180/270 degrees clockwise and
/// relabelled y*4 + k. Output order: for each input, k = 0..3.
std::vector<GridSample> rotate_augment(std::span<const GridSample> batch, int num_original_classes);

}  // namespace napavq::model
