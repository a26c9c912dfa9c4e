#pragma once

#include "napavq/linalg.hpp"
#include "napavq/vq/coding_vectors.hpp"
#include "napavq/vq/losses.hpp"
#include "napavq/vq/topology.hpp"

#include <map>
#include <span>
#include <vector>

namespace napavq::proto {

/// Per-class feature means, written once at the end of the task that
/// introduced the class and never refreshed.
class PrototypeStore {
public:
    struct Entry {
        Vec mean;
        int task = 0;
    };

    bool contains(ClassId id) const { return entries_.count(id) != 0; }
    const Vec& mean(ClassId id) const;
    int task_of(ClassId id) const;
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    std::vector<ClassId> ids() const;
    const std::map<ClassId, Entry>& entries() const noexcept { return entries_; }

    /// Throws ContractViolation if the class already has a mean.
    void insert(ClassId id, Vec mean, int task);

    friend bool operator==(const PrototypeStore& a, const PrototypeStore& b);

private:
    std::map<ClassId, Entry> entries_;
};

/// Arithmetic mean of the features of each class in `classes`. Throws
/// MissingClassError when a requested class has no sample.
std::map<ClassId, Vec> compute_class_means(std::span<const Vec> features,
                                           std::span<const ClassId> labels,
                                           std::span<const ClassId> classes);

/// alpha ~ N(0.5, 1), optionally clipped to [0, 1].
double sample_alpha(Rng& rng, bool clip = false);

struct AugmentedPrototype {
    Vec vector;
    ClassId label = 0;    ///< always the old class i
    ClassId partner = 0;  ///< neighbour j, or the label itself when i is isolated
    double alpha = 1.0;
};

struct AugmentedBatch {
    std::vector<AugmentedPrototype> prototypes;

    std::size_t size() const noexcept { return prototypes.size(); }
    bool empty() const noexcept { return prototypes.empty(); }
};

/// alpha * mu_i + (1 - alpha) * mu_j, labelled i.
AugmentedPrototype mix_prototypes(ClassId i, ClassId j, double alpha, const PrototypeStore& store);

/// Old classes linked to i in the graph that also have a stored mean.
std::vector<ClassId> eligible_partners(ClassId i, const PrototypeStore& store,
                                       const vq::TopologyGraph& graph);

/// Mixes mu_i with the mean of a uniformly chosen graph neighbour. An
/// isolated class falls back to its own mean (alpha = 1, partner = i).
AugmentedPrototype augment_prototype(ClassId i, const PrototypeStore& store,
                                     const vq::TopologyGraph& graph, Rng& rng,
                                     bool clip_alpha = false);

/// `per_class` neighbourhood-aware prototypes for each old class, classes in
/// ascending order.
AugmentedBatch build_prototype_batch(std::span<const ClassId> old_ids, const PrototypeStore& store,
                                     const vq::TopologyGraph& graph, Rng& rng, int per_class = 1,
                                     bool clip_alpha = false);

/// Class mean plus isotropic Gaussian noise of scale sigma; the augmentation
/// the neighbourhood-aware variant is compared against.
AugmentedBatch build_gaussian_batch(std::span<const ClassId> old_ids, const PrototypeStore& store,
                                    Rng& rng, int per_class = 1, double sigma = 1.0);

/// Sum of -log p(i | a_i). Only coding-vector gradients are reported.
vq::LossGrad loss_hat_dce(const AugmentedBatch& batch, const vq::CodingVectorSet& cvs, double tau);

/// Sum of the neighbourhood-adaptation hinge with z replaced by a_i.
vq::LossGrad loss_hat_na(const AugmentedBatch& batch, const vq::CodingVectorSet& cvs,
                         const vq::TopologyGraph& graph, double beta);

}  // namespace napavq::proto
