#include "napavq/harness/classify.hpp"

#include "napavq/error.hpp"

#include <limits>

namespace napavq::harness {

ClassId classify_feature(const Vec& z, const vq::CodingVectorSet& cvs,
                         std::span<const ClassId> candidates) {
    if (candidates.empty()) throw ContractViolation("classification needs at least one candidate class");
    if (z.size() != cvs.dim()) throw ContractViolation("feature dimension mismatch");
    const Vec zn = z / smoothed_norm(z);
    ClassId best = candidates.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (ClassId id : candidates) {
        const Vec& m = cvs[id];
        const double d = smoothed_distance(zn, m / smoothed_norm(m));
        if (d < best_d || (d == best_d && id < best)) {
            best_d = d;
            best = id;
        }
    }
    return best;
}

ClassId classify(const Vec& x, const model::FeatureModel& model, const vq::CodingVectorSet& cvs,
                 std::span<const ClassId> candidates) {
    return classify_feature(model.forward(x), cvs, candidates);
}

}  // namespace napavq::harness
