#pragma once

#include "napavq/harness/data.hpp"

#include <cstdint>
#include <string>

namespace napavq::harness {

/// Gaussian-mixture class stream. In vector mode class means sit on a
/// circle (first two coordinates) or are drawn uniformly in a cube of half
/// width `radius`. In image mode every class owns a random grid template in
/// [0, 1] and samples are template plus pixel noise.
struct SyntheticSpec {
    int num_classes = 10;
    int dim = 2;
    std::string layout = "circle";  ///< "circle" | "random"
    double radius = 5.0;
    double sigma = 0.5;
    int train_per_class = 200;
    int test_per_class = 100;
    int tasks = 5;
    int first_task_classes = 0;
    bool image_mode = false;
    int grid_size = 8;

    void validate() const;
    friend bool operator==(const SyntheticSpec&, const SyntheticSpec&) = default;
};

Stream generate_synthetic_stream(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace napavq::harness
