#include "napavq/vq/coding_vectors.hpp"

#include "napavq/error.hpp"

#include <string>

namespace napavq::vq {

CodingVectorSet::CodingVectorSet(int dim) : dim_(dim) {
    if (dim <= 0) throw ContractViolation("coding vector dimension must be positive");
}

void CodingVectorSet::check_id(ClassId id) const {
    if (!contains(id)) {
        throw ContractViolation("unknown class id " + std::to_string(id) + " (model has " +
                                std::to_string(size()) + " coding vectors)");
    }
}

const Vec& CodingVectorSet::operator[](ClassId id) const {
    check_id(id);
    return vectors_[static_cast<std::size_t>(id)];
}

bool CodingVectorSet::is_frozen(ClassId id) const {
    check_id(id);
    return frozen_[static_cast<std::size_t>(id)];
}

ClassId CodingVectorSet::append(Vec v) {
    if (v.size() != dim_) {
        throw ContractViolation("coding vector has dimension " + std::to_string(v.size()) +
                                ", expected " + std::to_string(dim_));
    }
    vectors_.push_back(std::move(v));
    frozen_.push_back(false);
    return static_cast<ClassId>(vectors_.size() - 1);
}

void CodingVectorSet::assign(ClassId id, Vec v) {
    check_id(id);
    if (frozen_[static_cast<std::size_t>(id)])
        throw ContractViolation("cannot overwrite frozen coding vector " + std::to_string(id));
    if (v.size() != dim_) throw ContractViolation("coding vector dimension mismatch");
    vectors_[static_cast<std::size_t>(id)] = std::move(v);
}

bool CodingVectorSet::add_scaled(ClassId id, const Vec& delta, double scale) {
    check_id(id);
    if (frozen_[static_cast<std::size_t>(id)]) return false;
    if (delta.size() != dim_) throw ContractViolation("coding vector update dimension mismatch");
    vectors_[static_cast<std::size_t>(id)].noalias() += scale * delta;
    return true;
}

void CodingVectorSet::freeze(ClassId id) {
    check_id(id);
    frozen_[static_cast<std::size_t>(id)] = true;
}

std::vector<ClassId> CodingVectorSet::frozen_ids() const {
    std::vector<ClassId> out;
    for (std::size_t i = 0; i < frozen_.size(); ++i)
        if (frozen_[i]) out.push_back(static_cast<ClassId>(i));
    return out;
}

std::vector<ClassId> CodingVectorSet::ids() const {
    std::vector<ClassId> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<ClassId>(i);
    return out;
}

void freeze_old_cvs(CodingVectorSet& cvs, std::span<const ClassId> old_ids) {
    for (ClassId id : old_ids) cvs.freeze(id);
}

}  // namespace napavq::vq
