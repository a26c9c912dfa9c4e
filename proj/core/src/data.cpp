#include "napavq/harness/data.hpp"

#include "napavq/error.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace napavq::harness {

std::vector<std::size_t> Dataset::indices_of(std::span<const ClassId> classes) const {
    const std::set<ClassId> wanted(classes.begin(), classes.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (wanted.count(y[i])) out.push_back(i);
    return out;
}

TaskSchedule::TaskSchedule(std::vector<std::vector<ClassId>> tasks) : tasks_(std::move(tasks)) {
    std::set<ClassId> seen;
    for (std::size_t t = 0; t < tasks_.size(); ++t) {
        if (tasks_[t].empty()) throw ConfigError("tasks", "task " + std::to_string(t) + " has no classes");
        for (ClassId c : tasks_[t]) {
            if (c < 0) throw ConfigError("tasks", "negative class id");
            if (!seen.insert(c).second)
                throw ConfigError("tasks", "class " + std::to_string(c) + " appears in two tasks");
        }
    }
}

TaskSchedule TaskSchedule::partition(int num_classes, int tasks, int first_task_classes) {
    if (tasks < 1) throw ConfigError("tasks", "need at least one task");
    if (num_classes < tasks) throw ConfigError("tasks", "more tasks than classes");
    int first = first_task_classes > 0 ? first_task_classes : num_classes / tasks;
    if (first_task_classes <= 0 && num_classes % tasks != 0) {
        throw ConfigError("tasks", std::to_string(num_classes) + " classes cannot be split into " +
                                       std::to_string(tasks) + " equal tasks");
    }
    if (first > num_classes) throw ConfigError("first_task_classes", "exceeds the class count");
    const int rest = num_classes - first;
    int per = 0;
    if (tasks > 1) {
        if (rest % (tasks - 1) != 0 || rest == 0) {
            throw ConfigError("first_task_classes", "remaining " + std::to_string(rest) +
                                                        " classes cannot be split into " +
                                                        std::to_string(tasks - 1) + " equal tasks");
        }
        per = rest / (tasks - 1);
    } else if (rest != 0) {
        throw ConfigError("first_task_classes", "a single task must hold every class");
    }
    std::vector<std::vector<ClassId>> out;
    ClassId next = 0;
    for (int t = 0; t < tasks; ++t) {
        const int count = t == 0 ? first : per;
        std::vector<ClassId> cls;
        for (int k = 0; k < count; ++k) cls.push_back(next++);
        out.push_back(std::move(cls));
    }
    return TaskSchedule(std::move(out));
}

std::size_t TaskSchedule::cumulative(std::size_t t) const {
    std::size_t n = 0;
    for (std::size_t j = 0; j <= t && j < tasks_.size(); ++j) n += tasks_[j].size();
    return n;
}

std::vector<ClassId> TaskSchedule::seen_classes(std::size_t t) const {
    std::vector<ClassId> out;
    for (std::size_t j = 0; j <= t && j < tasks_.size(); ++j)
        out.insert(out.end(), tasks_[j].begin(), tasks_[j].end());
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t TaskSchedule::total_classes() const {
    return tasks_.empty() ? 0 : cumulative(tasks_.size() - 1);
}

int TaskSchedule::task_of(ClassId c) const {
    for (std::size_t t = 0; t < tasks_.size(); ++t)
        if (std::find(tasks_[t].begin(), tasks_[t].end(), c) != tasks_[t].end())
            return static_cast<int>(t);
    return -1;
}

}  // namespace napavq::harness
