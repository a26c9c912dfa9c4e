#include "napavq/vq/topology.hpp"

#include "napavq/error.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace napavq::vq {

void TopologyParams::validate() const {
    if (connectivity < 2) throw ConfigError("K", "connectivity factor must be >= 2");
    if (!(decay > 0.0 && decay < 1.0)) throw ConfigError("epsilon", "must lie in (0, 1)");
    if (!(min_strength > 0.0 && min_strength < 1.0))
        throw ConfigError("e_min", "must lie in (0, 1)");
}

TopologyGraph::TopologyGraph(TopologyParams params, std::size_t nodes)
    : params_(params), strengths_(Mat::Zero(static_cast<Eigen::Index>(nodes),
                                            static_cast<Eigen::Index>(nodes))) {
    params_.validate();
}

double TopologyGraph::strength(ClassId i, ClassId j) const {
    const auto n = static_cast<ClassId>(size());
    if (i < 0 || j < 0 || i >= n || j >= n) throw ContractViolation("graph index out of range");
    return strengths_(i, j);
}

void TopologyGraph::set_strength(ClassId i, ClassId j, double s) {
    const auto n = static_cast<ClassId>(size());
    if (i < 0 || j < 0 || i >= n || j >= n) throw ContractViolation("graph index out of range");
    if (i == j) throw ContractViolation("self-edges are not allowed");
    if (!(s >= 0.0 && s <= 1.0)) throw ContractViolation("edge strength must lie in [0, 1]");
    strengths_(i, j) = s;
    strengths_(j, i) = s;
}

void TopologyGraph::extend(std::size_t extra) {
    const Eigen::Index old_n = strengths_.rows();
    const Eigen::Index n = old_n + static_cast<Eigen::Index>(extra);
    Mat grown = Mat::Zero(n, n);
    grown.topLeftCorner(old_n, old_n) = strengths_;
    strengths_ = std::move(grown);
}

std::size_t TopologyGraph::edge_count() const {
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < strengths_.rows(); ++i)
        for (Eigen::Index j = i + 1; j < strengths_.cols(); ++j)
            if (strengths_(i, j) > 0.0) ++count;
    return count;
}

namespace {

void check_query(const Vec& z, const CodingVectorSet& cvs) {
    if (cvs.empty()) throw EmptyModelError("no coding vectors to rank against");
    if (z.size() != cvs.dim()) {
        throw ContractViolation("feature dimension " + std::to_string(z.size()) +
                                " does not match coding vector dimension " +
                                std::to_string(cvs.dim()));
    }
}

std::vector<double> distances_to(const Vec& z, const CodingVectorSet& cvs) {
    std::vector<double> d(cvs.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = smoothed_distance(z, cvs[static_cast<ClassId>(i)]);
    return d;
}

}  // namespace

RankedDistances rank_coding_vectors(const Vec& z, const CodingVectorSet& cvs) {
    check_query(z, cvs);
    RankedDistances out;
    out.distances = distances_to(z, cvs);
    out.order.resize(out.distances.size());
    std::iota(out.order.begin(), out.order.end(), ClassId{0});
    const auto& d = out.distances;
    std::stable_sort(out.order.begin(), out.order.end(),
                     [&](ClassId a, ClassId b) { return d[a] < d[b]; });
    return out;
}

void update_topology(const Vec& z, const CodingVectorSet& cvs, TopologyGraph& graph,
                     std::optional<int> connectivity) {
    check_query(z, cvs);
    if (graph.size() != cvs.size()) {
        throw ContractViolation("graph has " + std::to_string(graph.size()) +
                                " nodes but there are " + std::to_string(cvs.size()) +
                                " coding vectors");
    }
    const int k = connectivity.value_or(graph.params().connectivity);
    if (k < 2) throw ConfigError("K", "connectivity factor must be >= 2");
    if (static_cast<std::size_t>(k) > cvs.size()) {
        throw ConfigError("K", "connectivity factor " + std::to_string(k) + " exceeds the " +
                                   std::to_string(cvs.size()) + " available coding vectors");
    }

    // Only the K closest are needed, so a partial sort suffices.
    const std::vector<double> d = distances_to(z, cvs);
    std::vector<ClassId> order(d.size());
    std::iota(order.begin(), order.end(), ClassId{0});
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](ClassId a, ClassId b) {
        return d[a] < d[b] || (d[a] == d[b] && a < b);
    });

    const ClassId winner = order.front();
    const double eps = graph.params().decay;
    const double e_min = graph.params().min_strength;
    const auto n = static_cast<ClassId>(cvs.size());

    for (ClassId j = 0; j < n; ++j) {
        const double s = graph.strength(winner, j);
        if (s > 0.0) graph.set_strength(winner, j, s * eps);
    }
    for (int r = 1; r < k; ++r) graph.set_strength(winner, order[r], 1.0);
    // Only the winner's row changed, so pruning it restores the global invariant.
    for (ClassId j = 0; j < n; ++j) {
        const double s = graph.strength(winner, j);
        if (s > 0.0 && s < e_min) graph.set_strength(winner, j, 0.0);
    }
}

std::vector<ClassId> confusing_neighbors(ClassId y, const TopologyGraph& graph,
                                         const CodingVectorSet& cvs) {
    if (!cvs.contains(y) || static_cast<std::size_t>(y) >= graph.size())
        throw ContractViolation("unknown class id " + std::to_string(y));
    std::vector<ClassId> out;
    const auto n = static_cast<ClassId>(graph.size());
    for (ClassId i = 0; i < n; ++i)
        if (i != y && graph.strengths()(y, i) > 0.0) out.push_back(i);
    return out;
}

void insert_class_cvs(CodingVectorSet& cvs, TopologyGraph& graph,
                      std::span<const ClassId> new_ids, Rng& rng, double init_scale) {
    if (graph.size() != cvs.size()) throw ContractViolation("graph and coding vectors disagree");
    std::vector<ClassId> sorted(new_ids.begin(), new_ids.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const auto expected = static_cast<ClassId>(cvs.size() + i);
        if (cvs.contains(sorted[i]) || (i > 0 && sorted[i] == sorted[i - 1]))
            throw ContractViolation("class id " + std::to_string(sorted[i]) + " already present");
        if (sorted[i] != expected) {
            throw ContractViolation("class ids must be appended densely; expected " +
                                    std::to_string(expected) + ", got " +
                                    std::to_string(sorted[i]));
        }
    }
    std::normal_distribution<double> gauss(0.0, init_scale);
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        Vec v(cvs.dim());
        for (Eigen::Index c = 0; c < v.size(); ++c) v[c] = gauss(rng);
        cvs.append(std::move(v));
    }
    graph.extend(sorted.size());
}

}  // namespace napavq::vq
