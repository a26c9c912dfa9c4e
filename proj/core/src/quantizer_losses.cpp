#include "napavq/vq/losses.hpp"

#include "napavq/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace napavq::vq {

void LossGrad::accumulate_cvs(Mat& dense, double scale) const {
    for (const auto& [id, g] : grad_cvs) dense.row(id) += scale * g.transpose();
}

namespace {

void check_dim(const Vec& z, const CodingVectorSet& cvs) {
    if (cvs.empty()) throw EmptyModelError("no coding vectors");
    if (z.size() != cvs.dim()) {
        throw ContractViolation("feature dimension " + std::to_string(z.size()) +
                                " does not match coding vector dimension " +
                                std::to_string(cvs.dim()));
    }
}

// softmax(scale * d_i), shifted by the extreme value for stability
std::vector<double> softmax_of_scaled(const std::vector<double>& d, double scale) {
    double top = scale * d.front();
    for (double v : d) top = std::max(top, scale * v);
    std::vector<double> w(d.size());
    double total = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        w[i] = std::exp(scale * d[i] - top);
        total += w[i];
    }
    for (double& v : w) v /= total;
    return w;
}

// Adds dL/dd * d(distance)/dz and d(distance)/dm to the gradient record.
void push_distance_grad(LossGrad& out, const Vec& z, const Vec& m, ClassId id, double dist,
                        double dl_dd) {
    Vec unit = (z - m) / dist;
    out.grad_z.noalias() += dl_dd * unit;
    out.grad_cvs.emplace_back(id, -dl_dd * unit);
}

std::vector<ClassId> resolve_restriction(const CodingVectorSet& cvs,
                                         std::optional<std::span<const ClassId>> restrict) {
    if (!restrict) return cvs.ids();
    if (restrict->empty()) throw ContractViolation("empty class restriction");
    for (ClassId id : *restrict)
        if (!cvs.contains(id)) throw ContractViolation("unknown class id " + std::to_string(id));
    return {restrict->begin(), restrict->end()};
}

}  // namespace

std::vector<double> neighbor_weights(const Vec& z, std::span<const ClassId> neighbors,
                                     const CodingVectorSet& cvs, double beta) {
    check_dim(z, cvs);
    if (neighbors.empty()) throw ContractViolation("neighbor_weights needs at least one neighbour");
    if (!(beta > 0.0)) throw ContractViolation("beta must be positive");
    std::vector<double> d;
    d.reserve(neighbors.size());
    for (ClassId i : neighbors) d.push_back(smoothed_distance(z, cvs[i]));
    return softmax_of_scaled(d, -beta);
}

LossGrad loss_na(const Vec& z, ClassId y, const CodingVectorSet& cvs, const TopologyGraph& graph,
                 double beta) {
    check_dim(z, cvs);
    LossGrad out;
    out.grad_z = Vec::Zero(z.size());
    const std::vector<ClassId> neighbors = confusing_neighbors(y, graph, cvs);
    if (neighbors.empty()) return out;

    const double d_y = smoothed_distance(z, cvs[y]);
    std::vector<double> d;
    d.reserve(neighbors.size());
    for (ClassId i : neighbors) d.push_back(smoothed_distance(z, cvs[i]));
    const std::vector<double> w = softmax_of_scaled(d, -beta);
    double d_neigh = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) d_neigh += w[k] * d[k];

    const double hinge = d_y - d_neigh;
    if (!(hinge > 0.0)) return out;
    out.loss = hinge;

    // d(d_neigh)/d(d_i) = W_i * (1 - beta * (d_i - d_neigh))
    push_distance_grad(out, z, cvs[y], y, d_y, 1.0);
    for (std::size_t k = 0; k < d.size(); ++k) {
        const double dl_dd = -w[k] * (1.0 - beta * (d[k] - d_neigh));
        push_distance_grad(out, z, cvs[neighbors[k]], neighbors[k], d[k], dl_dd);
    }
    return out;
}

std::vector<double> class_posterior(const Vec& z, const CodingVectorSet& cvs, double tau,
                                    std::optional<std::span<const ClassId>> restrict) {
    check_dim(z, cvs);
    if (!(tau > 0.0)) throw ContractViolation("tau must be positive");
    const std::vector<ClassId> ids = resolve_restriction(cvs, restrict);
    std::vector<double> d;
    d.reserve(ids.size());
    for (ClassId i : ids) d.push_back(smoothed_distance(z, cvs[i]));
    return softmax_of_scaled(d, -1.0 / tau);
}

LossGrad loss_dce(const Vec& z, ClassId y, const CodingVectorSet& cvs, double tau,
                  std::optional<std::span<const ClassId>> restrict) {
    check_dim(z, cvs);
    if (!(tau > 0.0)) throw ContractViolation("tau must be positive");
    const std::vector<ClassId> ids = resolve_restriction(cvs, restrict);
    const auto y_pos = std::find(ids.begin(), ids.end(), y);
    if (y_pos == ids.end())
        throw ContractViolation("label " + std::to_string(y) + " is not a trained class");

    std::vector<double> d;
    d.reserve(ids.size());
    for (ClassId i : ids) d.push_back(smoothed_distance(z, cvs[i]));

    // -log p_y = d_y / tau + log sum_j exp(-d_j / tau)
    double shift = -d.front() / tau;
    for (double v : d) shift = std::max(shift, -v / tau);
    double total = 0.0;
    for (double v : d) total += std::exp(-v / tau - shift);
    const double log_z = shift + std::log(total);
    const auto y_idx = static_cast<std::size_t>(y_pos - ids.begin());

    LossGrad out;
    out.grad_z = Vec::Zero(z.size());
    out.loss = std::max(0.0, d[y_idx] / tau + log_z);
    for (std::size_t k = 0; k < ids.size(); ++k) {
        const double p = std::exp(-d[k] / tau - log_z);
        const double dl_dd = ((k == y_idx ? 1.0 : 0.0) - p) / tau;
        push_distance_grad(out, z, cvs[ids[k]], ids[k], d[k], dl_dd);
    }
    return out;
}

}  // namespace napavq::vq
