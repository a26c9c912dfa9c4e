#include "napavq/proto/prototypes.hpp"

#include "napavq/error.hpp"

#include <algorithm>
#include <string>

namespace napavq::proto {

const Vec& PrototypeStore::mean(ClassId id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) throw ContractViolation("no stored mean for class " + std::to_string(id));
    return it->second.mean;
}

int PrototypeStore::task_of(ClassId id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) throw ContractViolation("no stored mean for class " + std::to_string(id));
    return it->second.task;
}

std::vector<ClassId> PrototypeStore::ids() const {
    std::vector<ClassId> out;
    out.reserve(entries_.size());
    for (const auto& [id, e] : entries_) out.push_back(id);
    return out;
}

void PrototypeStore::insert(ClassId id, Vec mean, int task) {
    if (!entries_.empty() && entries_.begin()->second.mean.size() != mean.size())
        throw ContractViolation("prototype dimension mismatch");
    if (!entries_.emplace(id, Entry{std::move(mean), task}).second)
        throw ContractViolation("class " + std::to_string(id) + " already has a stored mean");
}

bool operator==(const PrototypeStore& a, const PrototypeStore& b) {
    if (a.entries_.size() != b.entries_.size()) return false;
    for (auto ia = a.entries_.begin(), ib = b.entries_.begin(); ia != a.entries_.end(); ++ia, ++ib) {
        if (ia->first != ib->first || ia->second.task != ib->second.task ||
            ia->second.mean.size() != ib->second.mean.size() ||
            ia->second.mean != ib->second.mean)
            return false;
    }
    return true;
}

std::map<ClassId, Vec> compute_class_means(std::span<const Vec> features,
                                           std::span<const ClassId> labels,
                                           std::span<const ClassId> classes) {
    if (features.size() != labels.size()) throw ContractViolation("features and labels differ in length");
    std::map<ClassId, Vec> sums;
    std::map<ClassId, std::size_t> counts;
    for (ClassId c : classes) counts[c] = 0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        auto it = counts.find(labels[i]);
        if (it == counts.end()) continue;
        auto [s, fresh] = sums.try_emplace(labels[i], Vec::Zero(features[i].size()));
        s->second += features[i];
        ++it->second;
    }
    std::map<ClassId, Vec> means;
    for (const auto& [c, n] : counts) {
        if (n == 0) throw MissingClassError("class " + std::to_string(c) + " has no samples");
        means.emplace(c, sums.at(c) / static_cast<double>(n));
    }
    return means;
}

double sample_alpha(Rng& rng, bool clip) {
    std::normal_distribution<double> gauss(0.5, 1.0);
    const double a = gauss(rng);
    return clip ? std::clamp(a, 0.0, 1.0) : a;
}

AugmentedPrototype mix_prototypes(ClassId i, ClassId j, double alpha, const PrototypeStore& store) {
    AugmentedPrototype p;
    p.vector = alpha * store.mean(i) + (1.0 - alpha) * store.mean(j);
    p.label = i;
    p.partner = j;
    p.alpha = alpha;
    return p;
}

std::vector<ClassId> eligible_partners(ClassId i, const PrototypeStore& store,
                                       const vq::TopologyGraph& graph) {
    std::vector<ClassId> out;
    if (i < 0 || static_cast<std::size_t>(i) >= graph.size()) return out;
    const auto n = static_cast<ClassId>(graph.size());
    for (ClassId j = 0; j < n; ++j)
        if (j != i && graph.strengths()(i, j) > 0.0 && store.contains(j)) out.push_back(j);
    return out;
}

AugmentedPrototype augment_prototype(ClassId i, const PrototypeStore& store,
                                     const vq::TopologyGraph& graph, Rng& rng, bool clip_alpha) {
    const std::vector<ClassId> partners = eligible_partners(i, store, graph);
    if (partners.empty()) return mix_prototypes(i, i, 1.0, store);
    std::uniform_int_distribution<std::size_t> pick(0, partners.size() - 1);
    const ClassId j = partners[pick(rng)];
    return mix_prototypes(i, j, sample_alpha(rng, clip_alpha), store);
}

namespace {

std::vector<ClassId> sorted_ids(std::span<const ClassId> ids, const PrototypeStore& store) {
    std::vector<ClassId> out(ids.begin(), ids.end());
    std::sort(out.begin(), out.end());
    for (ClassId id : out)
        if (!store.contains(id)) throw ContractViolation("no stored mean for class " + std::to_string(id));
    return out;
}

}  // namespace

AugmentedBatch build_prototype_batch(std::span<const ClassId> old_ids, const PrototypeStore& store,
                                     const vq::TopologyGraph& graph, Rng& rng, int per_class,
                                     bool clip_alpha) {
    if (per_class < 1) throw ConfigError("protos_per_class", "must be positive");
    AugmentedBatch batch;
    for (ClassId i : sorted_ids(old_ids, store))
        for (int r = 0; r < per_class; ++r)
            batch.prototypes.push_back(augment_prototype(i, store, graph, rng, clip_alpha));
    return batch;
}

AugmentedBatch build_gaussian_batch(std::span<const ClassId> old_ids, const PrototypeStore& store,
                                    Rng& rng, int per_class, double sigma) {
    if (per_class < 1) throw ConfigError("protos_per_class", "must be positive");
    std::normal_distribution<double> gauss(0.0, 1.0);
    AugmentedBatch batch;
    for (ClassId i : sorted_ids(old_ids, store)) {
        for (int r = 0; r < per_class; ++r) {
            AugmentedPrototype p;
            const Vec& mu = store.mean(i);
            Vec noise(mu.size());
            for (Eigen::Index c = 0; c < noise.size(); ++c) noise[c] = gauss(rng);
            p.vector = mu + sigma * noise;
            p.label = i;
            p.partner = i;
            p.alpha = 1.0;
            batch.prototypes.push_back(std::move(p));
        }
    }
    return batch;
}

vq::LossGrad loss_hat_dce(const AugmentedBatch& batch, const vq::CodingVectorSet& cvs, double tau) {
    vq::LossGrad out;
    for (const auto& p : batch.prototypes) {
        vq::LossGrad one = vq::loss_dce(p.vector, p.label, cvs, tau);
        out.loss += one.loss;
        for (auto& g : one.grad_cvs) out.grad_cvs.push_back(std::move(g));
    }
    return out;
}

vq::LossGrad loss_hat_na(const AugmentedBatch& batch, const vq::CodingVectorSet& cvs,
                         const vq::TopologyGraph& graph, double beta) {
    vq::LossGrad out;
    for (const auto& p : batch.prototypes) {
        vq::LossGrad one = vq::loss_na(p.vector, p.label, cvs, graph, beta);
        out.loss += one.loss;
        for (auto& g : one.grad_cvs) out.grad_cvs.push_back(std::move(g));
    }
    return out;
}

}  // namespace napavq::proto
