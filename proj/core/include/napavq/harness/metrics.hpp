#pragma once

#include <cstdint>
#include <vector>

namespace napavq::harness {

/// acc[t][j]: accuracy on task j's test classes after training task t,
/// j <= t. test_counts[j] is the size of task j's test set, which is what
/// pools the per-task entries into the accuracy over all seen classes.
struct AccuracyMatrix {
    std::vector<std::vector<double>> acc;
    std::vector<std::size_t> test_counts;

    std::size_t num_tasks() const noexcept { return acc.size(); }
    void validate() const;
    friend bool operator==(const AccuracyMatrix&, const AccuracyMatrix&) = default;
};

/// Accuracy over the pooled test set of every class seen up to task t.
double pooled_accuracy(const AccuracyMatrix& m, std::size_t t);

/// Mean of the pooled accuracies over all tasks.
double average_accuracy(const AccuracyMatrix& m);

/// Mean drop from each earlier task's best accuracy to its accuracy after
/// task t. Zero for t == 0.
double forgetting_at(const AccuracyMatrix& m, std::size_t t);

/// forgetting_at() for the final task; 0 (with a warning) when T < 2.
double average_forgetting(const AccuracyMatrix& m);

/// forgetting_at(t) for every t.
std::vector<double> forgetting_curve(const AccuracyMatrix& m);

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
    int num_classes = 0;
    std::vector<std::int64_t> counts;

    std::int64_t at(int truth, int predicted) const {
        return counts[static_cast<std::size_t>(truth) * num_classes + predicted];
    }
    std::int64_t total() const;
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion_matrix(const std::vector<int>& predictions, const std::vector<int>& labels,
                                 int num_classes);

}  // namespace napavq::harness
