#include "napavq/harness/synthetic.hpp"

#include "napavq/error.hpp"

#include <cmath>
#include <numbers>

namespace napavq::harness {

void SyntheticSpec::validate() const {
    if (num_classes < 1) throw ConfigError("dataset.num_classes", "must be positive");
    if (!image_mode && dim < 1) throw ConfigError("dataset.dim", "must be positive");
    if (!image_mode && layout == "circle" && dim < 2)
        throw ConfigError("dataset.dim", "circle layout needs at least 2 dimensions");
    if (layout != "circle" && layout != "random")
        throw ConfigError("dataset.layout", "must be \"circle\" or \"random\"");
    if (!(radius >= 0.0)) throw ConfigError("dataset.radius", "must be non-negative");
    if (!(sigma >= 0.0)) throw ConfigError("dataset.sigma", "must be non-negative");
    if (train_per_class < 1) throw ConfigError("dataset.train_per_class", "must be positive");
    if (test_per_class < 1) throw ConfigError("dataset.test_per_class", "must be positive");
    if (image_mode && grid_size < 2) throw ConfigError("dataset.grid_size", "must be >= 2");
    TaskSchedule::partition(num_classes, tasks, first_task_classes);
}

Stream generate_synthetic_stream(const SyntheticSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    const int dim = spec.image_mode ? spec.grid_size * spec.grid_size : spec.dim;

    std::vector<Vec> centers;
    centers.reserve(static_cast<std::size_t>(spec.num_classes));
    if (spec.image_mode) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int c = 0; c < spec.num_classes; ++c) {
            Vec t(dim);
            for (int k = 0; k < dim; ++k) t[k] = unit(rng);
            centers.push_back(std::move(t));
        }
    } else if (spec.layout == "circle") {
        for (int c = 0; c < spec.num_classes; ++c) {
            const double angle = 2.0 * std::numbers::pi * c / spec.num_classes;
            Vec m = Vec::Zero(dim);
            m[0] = spec.radius * std::cos(angle);
            m[1] = spec.radius * std::sin(angle);
            centers.push_back(std::move(m));
        }
    } else {
        std::uniform_real_distribution<double> box(-spec.radius, spec.radius);
        for (int c = 0; c < spec.num_classes; ++c) {
            Vec m(dim);
            for (int k = 0; k < dim; ++k) m[k] = box(rng);
            centers.push_back(std::move(m));
        }
    }

    std::normal_distribution<double> noise(0.0, 1.0);
    auto draw = [&](Dataset& out, int per_class) {
        for (int c = 0; c < spec.num_classes; ++c) {
            for (int s = 0; s < per_class; ++s) {
                Vec x = centers[static_cast<std::size_t>(c)];
                for (int k = 0; k < dim; ++k) x[k] += spec.sigma * noise(rng);
                out.x.push_back(std::move(x));
                out.y.push_back(c);
            }
        }
        out.grid_size = spec.image_mode ? spec.grid_size : 0;
    };

    Stream stream;
    draw(stream.train, spec.train_per_class);
    draw(stream.test, spec.test_per_class);
    stream.schedule = TaskSchedule::partition(spec.num_classes, spec.tasks, spec.first_task_classes);
    stream.num_classes = spec.num_classes;
    return stream;
}

}  // namespace napavq::harness
