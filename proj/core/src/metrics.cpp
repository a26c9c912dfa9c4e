#include "napavq/harness/metrics.hpp"

#include "napavq/error.hpp"

#include <algorithm>
#include <iostream>
#include <string>

namespace napavq::harness {

void AccuracyMatrix::validate() const {
    if (acc.empty()) throw ContractViolation("accuracy matrix is empty");
    if (test_counts.size() != acc.size())
        throw ContractViolation("accuracy matrix needs one test count per task");
    for (std::size_t t = 0; t < acc.size(); ++t) {
        if (acc[t].size() != t + 1)
            throw ContractViolation("accuracy matrix row " + std::to_string(t) + " is incomplete");
        for (double a : acc[t])
            if (!(a >= 0.0 && a <= 1.0))
                throw ContractViolation("accuracy entry outside [0, 1] in row " + std::to_string(t));
    }
}

double pooled_accuracy(const AccuracyMatrix& m, std::size_t t) {
    m.validate();
    double correct = 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j <= t; ++j) {
        correct += m.acc[t][j] * static_cast<double>(m.test_counts[j]);
        total += static_cast<double>(m.test_counts[j]);
    }
    return total > 0.0 ? correct / total : 0.0;
}

double average_accuracy(const AccuracyMatrix& m) {
    m.validate();
    double sum = 0.0;
    for (std::size_t t = 0; t < m.num_tasks(); ++t) sum += pooled_accuracy(m, t);
    return sum / static_cast<double>(m.num_tasks());
}

double forgetting_at(const AccuracyMatrix& m, std::size_t t) {
    m.validate();
    if (t == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t j = 0; j < t; ++j) {
        double best = m.acc[j][j];
        for (std::size_t s = j + 1; s < t; ++s) best = std::max(best, m.acc[s][j]);
        sum += best - m.acc[t][j];
    }
    return sum / static_cast<double>(t);
}

double average_forgetting(const AccuracyMatrix& m) {
    m.validate();
    if (m.num_tasks() < 2) {
        std::cerr << "warning: average forgetting is 0 by definition for a single task\n";
        return 0.0;
    }
    return forgetting_at(m, m.num_tasks() - 1);
}

std::vector<double> forgetting_curve(const AccuracyMatrix& m) {
    std::vector<double> out;
    for (std::size_t t = 0; t < m.num_tasks(); ++t) out.push_back(forgetting_at(m, t));
    return out;
}

std::int64_t ConfusionMatrix::total() const {
    std::int64_t n = 0;
    for (auto c : counts) n += c;
    return n;
}

ConfusionMatrix confusion_matrix(const std::vector<int>& predictions, const std::vector<int>& labels,
                                 int num_classes) {
    if (predictions.size() != labels.size())
        throw ContractViolation("predictions and labels differ in length");
    if (num_classes < 1) throw ContractViolation("confusion matrix needs at least one class");
    ConfusionMatrix cm;
    cm.num_classes = num_classes;
    cm.counts.assign(static_cast<std::size_t>(num_classes) * num_classes, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int t = labels[i];
        const int p = predictions[i];
        if (t < 0 || t >= num_classes || p < 0 || p >= num_classes)
            throw ContractViolation("label out of range at sample " + std::to_string(i));
        ++cm.counts[static_cast<std::size_t>(t) * num_classes + p];
    }
    return cm;
}

}  // namespace napavq::harness
