#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace napavq {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Identifier of a class (or of a rotation pseudo-class) in the model.
using ClassId = std::int32_t;

/// Every random draw in the library goes through this engine so that a single
/// seed reproduces a whole run.
using Rng = std::mt19937_64;

/// Added under the square root of every Euclidean distance so that gradients
/// stay finite when two points coincide.
inline constexpr double kDistanceSmoothing = 1e-12;

/// sqrt(|a - b|^2 + delta)
inline double smoothed_distance(const Vec& a, const Vec& b) {
    return std::sqrt((a - b).squaredNorm() + kDistanceSmoothing);
}

/// sqrt(|a|^2 + delta)
inline double smoothed_norm(const Vec& a) {
    return std::sqrt(a.squaredNorm() + kDistanceSmoothing);
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }
inline bool all_finite(const Mat& m) { return m.allFinite(); }

inline Vec to_vec(const std::vector<double>& v) {
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> to_std(const Vec& v) {
    return {v.data(), v.data() + v.size()};
}

}  // namespace napavq
