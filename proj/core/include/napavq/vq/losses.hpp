#pragma once

#include "napavq/linalg.hpp"
#include "napavq/vq/coding_vectors.hpp"
#include "napavq/vq/topology.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace napavq::vq {

/// Loss value and its gradients. Only CVs that enter the loss appear in
/// `grad_cvs`; frozen CVs are reported too and masked by the optimizer.
struct LossGrad {
    double loss = 0.0;
    Vec grad_z;
    std::vector<std::pair<ClassId, Vec>> grad_cvs;

    /// Adds scale * grad_cvs into the rows of a (num CVs x dim) matrix.
    void accumulate_cvs(Mat& dense, double scale = 1.0) const;
};

/// Softmax of -beta * d(z, m_i) over the neighbour set, aligned with
/// `neighbors`. Max-shifted for stability.
std::vector<double> neighbor_weights(const Vec& z, std::span<const ClassId> neighbors,
                                     const CodingVectorSet& cvs, double beta);

/// Neighbourhood-adaptation hinge: max(0, d(z, m_y) - sum_i W_i d(z, m_i))
/// over the confusing neighbours of y. Gradients include the dependence of
/// the weights on the distances.
LossGrad loss_na(const Vec& z, ClassId y, const CodingVectorSet& cvs,
                 const TopologyGraph& graph, double beta);

/// p(i | z) proportional to exp(-d(z, m_i) / tau), aligned with `restrict`
/// (or with all ids when absent).
std::vector<double> class_posterior(const Vec& z, const CodingVectorSet& cvs, double tau,
                                    std::optional<std::span<const ClassId>> restrict = std::nullopt);

/// Distance-based cross entropy -log p(y | z).
LossGrad loss_dce(const Vec& z, ClassId y, const CodingVectorSet& cvs, double tau,
                  std::optional<std::span<const ClassId>> restrict = std::nullopt);

}  // namespace napavq::vq
