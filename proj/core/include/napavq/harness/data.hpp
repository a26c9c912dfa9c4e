#pragma once

#include "napavq/linalg.hpp"

#include <span>
#include <vector>

namespace napavq::harness {

/// Flat samples with dense class labels. `grid_size` > 0 marks image data:
/// each x is a grid_size x grid_size single-channel image, row-major.
struct Dataset {
    std::vector<Vec> x;
    std::vector<ClassId> y;
    int grid_size = 0;

    std::size_t size() const noexcept { return x.size(); }
    int dim() const { return x.empty() ? 0 : static_cast<int>(x.front().size()); }
    /// Indices of the samples whose label is in `classes`, in dataset order.
    std::vector<std::size_t> indices_of(std::span<const ClassId> classes) const;
};

/// Ordered, pairwise-disjoint class sets, one per task.
class TaskSchedule {
public:
    TaskSchedule() = default;
    explicit TaskSchedule(std::vector<std::vector<ClassId>> tasks);

    /// Equal split of classes 0..num_classes-1 into `tasks` tasks. When
    /// first_task_classes > 0 the first task takes that many and the rest
    /// are split equally. Throws ConfigError when the split is uneven.
    static TaskSchedule partition(int num_classes, int tasks, int first_task_classes = 0);

    std::size_t num_tasks() const noexcept { return tasks_.size(); }
    const std::vector<ClassId>& classes(std::size_t t) const { return tasks_.at(t); }
    const std::vector<std::vector<ClassId>>& tasks() const noexcept { return tasks_; }
    /// P^t: number of classes seen up to and including task t.
    std::size_t cumulative(std::size_t t) const;
    /// Classes of tasks 0..t, ascending.
    std::vector<ClassId> seen_classes(std::size_t t) const;
    std::size_t total_classes() const;
    int task_of(ClassId c) const;

private:
    std::vector<std::vector<ClassId>> tasks_;
};

struct Stream {
    Dataset train;
    Dataset test;
    TaskSchedule schedule;
    int num_classes = 0;
};

}  // namespace napavq::harness
