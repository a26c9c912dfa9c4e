#pragma once

#include "napavq/linalg.hpp"

#include <span>
#include <vector>

namespace napavq::vq {

/// One learnable coding vector per class. Class ids are dense: the i-th
/// inserted vector belongs to class i. Frozen vectors reject every update.
class CodingVectorSet {
public:
    explicit CodingVectorSet(int dim = 1);

    int dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return vectors_.size(); }
    bool empty() const noexcept { return vectors_.empty(); }
    bool contains(ClassId id) const noexcept {
        return id >= 0 && static_cast<std::size_t>(id) < vectors_.size();
    }

    const Vec& operator[](ClassId id) const;
    bool is_frozen(ClassId id) const;

    /// Appends a vector for the next class id and returns that id.
    ClassId append(Vec v);

    /// Overwrites an unfrozen vector. Throws ContractViolation when frozen.
    void assign(ClassId id, Vec v);

    /// v[id] += scale * delta, skipped entirely for frozen ids. Returns
    /// whether the vector changed.
    bool add_scaled(ClassId id, const Vec& delta, double scale);

    void freeze(ClassId id);
    std::vector<ClassId> frozen_ids() const;
    std::vector<ClassId> ids() const;

private:
    void check_id(ClassId id) const;

    int dim_;
    std::vector<Vec> vectors_;
    std::vector<bool> frozen_;
};

/// Marks the given ids frozen. Idempotent.
void freeze_old_cvs(CodingVectorSet& cvs, std::span<const ClassId> old_ids);

}  // namespace napavq::vq
