#pragma once

#include "napavq/linalg.hpp"
#include "napavq/vq/coding_vectors.hpp"

#include <optional>
#include <span>
#include <vector>

namespace napavq::vq {

struct TopologyParams {
    int connectivity = 15;  ///< K: the winner links to the next K-1 closest CVs
    double decay = 0.9;     ///< epsilon, in (0,1)
    double min_strength = 0.05;  ///< e_min, in (0,1)

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Symmetric, zero-diagonal matrix of edge strengths over coding-vector ids.
/// Nonzero strengths always lie in [min_strength, 1].
class TopologyGraph {
public:
    explicit TopologyGraph(TopologyParams params = {}, std::size_t nodes = 0);

    const TopologyParams& params() const noexcept { return params_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(strengths_.rows()); }
    const Mat& strengths() const noexcept { return strengths_; }

    double strength(ClassId i, ClassId j) const;
    /// Writes e_ij and e_ji. Diagonal writes are rejected.
    void set_strength(ClassId i, ClassId j, double s);

    /// Appends isolated nodes.
    void extend(std::size_t extra);

    /// Number of undirected edges with nonzero strength.
    std::size_t edge_count() const;

private:
    TopologyParams params_;
    Mat strengths_;
};

struct RankedDistances {
    std::vector<double> distances;  ///< indexed by class id
    std::vector<ClassId> order;     ///< ids sorted by ascending distance, ties by lower id
};

/// Smoothed Euclidean distance from z to every coding vector plus the
/// ascending ranking.
RankedDistances rank_coding_vectors(const Vec& z, const CodingVectorSet& cvs);

/// One create/decay/prune step for sample z: decay every edge of the winner
/// by epsilon, link the winner to the next K-1 closest CVs at strength 1,
/// then prune edges below e_min. `connectivity` overrides params().connectivity
/// for this call; it must lie in [2, cvs.size()].
void update_topology(const Vec& z, const CodingVectorSet& cvs, TopologyGraph& graph,
                     std::optional<int> connectivity = std::nullopt);

/// Inserts one Gaussian-initialised vector per new class and grows the graph
/// with isolated nodes. The ids must be exactly the next free ids (in any
/// order); duplicates and gaps are rejected. Existing vectors, frozen flags
/// and strengths are untouched.
void insert_class_cvs(CodingVectorSet& cvs, TopologyGraph& graph,
                      std::span<const ClassId> new_ids, Rng& rng, double init_scale = 0.1);

/// Direct neighbours of y in the graph, ascending.
std::vector<ClassId> confusing_neighbors(ClassId y, const TopologyGraph& graph,
                                         const CodingVectorSet& cvs);

}  // namespace napavq::vq
