#pragma once

#include "napavq/harness/data.hpp"

#include <map>
#include <string>
#include <vector>

namespace napavq::io {

/// Comma-separated features with a header; the last column is the integer
/// class label. Labels are remapped to dense ids in ascending order of the
/// original value.
struct FeatureTable {
    std::vector<std::string> feature_names;
    std::string label_name = "label";
    std::vector<std::vector<double>> rows;
    std::vector<ClassId> labels;                  ///< dense ids
    std::map<long long, ClassId> label_mapping;   ///< original -> dense

    std::size_t dims() const noexcept { return feature_names.size(); }
    std::size_t size() const noexcept { return rows.size(); }
};

FeatureTable load_feature_table(const std::string& path);
/// Parses table text; `origin` is used in error messages.
FeatureTable parse_feature_table(const std::string& text, const std::string& origin);

/// Writes features and the *original* labels (mapping inverted) so that
/// reading the file back yields an equal table.
std::string format_feature_table(const FeatureTable& table);
void write_feature_table(const std::string& path, const FeatureTable& table);

FeatureTable table_from_dataset(const harness::Dataset& data);
/// Labels keep the dense ids assigned when the table was read.
harness::Dataset dataset_from_table(const FeatureTable& table);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

}  // namespace napavq::io
