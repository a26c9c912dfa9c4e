#include "napavq/io/tables.hpp"

#include "napavq/error.hpp"
#include "napavq/io/serialize.hpp"

#include <charconv>
#include <set>
#include <sstream>

namespace napavq::io {

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw NumericFailure("could not format value");
    return {buf, end};
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

FeatureTable parse_feature_table(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    FeatureTable table;
    std::vector<long long> raw_labels;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split_commas(line);
        for (auto& c : cells) c = trim(c);
        if (!have_header) {
            if (cells.size() < 2) throw ParseError(origin, line_no, "header needs at least one feature and a label column");
            table.label_name = cells.back();
            table.feature_names.assign(cells.begin(), cells.end() - 1);
            have_header = true;
            continue;
        }
        if (cells.size() != table.feature_names.size() + 1) {
            throw ParseError(origin, line_no, "expected " + std::to_string(table.feature_names.size() + 1) +
                                                  " columns, found " + std::to_string(cells.size()));
        }
        std::vector<double> row(table.feature_names.size());
        for (std::size_t k = 0; k < row.size(); ++k) {
            const std::string& c = cells[k];
            auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), row[k]);
            if (ec != std::errc() || ptr != c.data() + c.size() || c.empty())
                throw ParseError(origin, line_no, "non-numeric feature '" + c + "' in column " + std::to_string(k + 1));
        }
        long long label = 0;
        const std::string& lc = cells.back();
        auto [ptr, ec] = std::from_chars(lc.data(), lc.data() + lc.size(), label);
        if (ec != std::errc() || ptr != lc.data() + lc.size() || lc.empty())
            throw ParseError(origin, line_no, "label '" + lc + "' is not an integer");
        table.rows.push_back(std::move(row));
        raw_labels.push_back(label);
    }
    if (!have_header) throw ParseError(origin, 0, "empty file");
    if (table.rows.empty()) throw ParseError(origin, line_no, "no data rows");

    const std::set<long long> distinct(raw_labels.begin(), raw_labels.end());
    ClassId next = 0;
    for (long long l : distinct) table.label_mapping[l] = next++;
    for (long long l : raw_labels) table.labels.push_back(table.label_mapping.at(l));
    return table;
}

FeatureTable load_feature_table(const std::string& path) {
    return parse_feature_table(read_file(path), path);
}

std::string format_feature_table(const FeatureTable& table) {
    std::map<ClassId, long long> inverse;
    for (const auto& [orig, id] : table.label_mapping) inverse[id] = orig;
    std::string out;
    for (const auto& name : table.feature_names) out += name + ",";
    out += table.label_name + "\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        for (double v : table.rows[i]) out += format_double(v) + ",";
        auto it = inverse.find(table.labels[i]);
        out += std::to_string(it == inverse.end() ? table.labels[i] : it->second) + "\n";
    }
    return out;
}

void write_feature_table(const std::string& path, const FeatureTable& table) {
    write_file_atomic(path, format_feature_table(table));
}

FeatureTable table_from_dataset(const harness::Dataset& data) {
    FeatureTable t;
    for (int k = 0; k < data.dim(); ++k) t.feature_names.push_back("f" + std::to_string(k));
    for (std::size_t i = 0; i < data.size(); ++i) {
        t.rows.push_back(to_std(data.x[i]));
        t.labels.push_back(data.y[i]);
        t.label_mapping[data.y[i]] = data.y[i];
    }
    return t;
}

harness::Dataset dataset_from_table(const FeatureTable& table) {
    harness::Dataset d;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        d.x.push_back(to_vec(table.rows[i]));
        d.y.push_back(table.labels[i]);
    }
    return d;
}

}  // namespace napavq::io
