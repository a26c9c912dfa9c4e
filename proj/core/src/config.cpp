#include "napavq/io/config.hpp"

#include "napavq/error.hpp"
#include "napavq/harness/data.hpp"
#include "napavq/io/serialize.hpp"
#include "napavq/model/feature_model.hpp"
#include "napavq/vq/topology.hpp"

#include <cmath>
#include <set>

namespace napavq::io {

using nlohmann::json;

void RunConfig::validate() const {
    if (dataset.kind != "synthetic" && dataset.kind != "table")
        throw ConfigError("dataset.kind", "must be \"synthetic\" or \"table\"");
    if (dataset.kind == "synthetic") {
        harness::SyntheticSpec spec = dataset.synthetic;
        spec.tasks = tasks;
        spec.first_task_classes = first_task_classes;
        spec.validate();
    } else {
        if (dataset.train_table.empty()) throw ConfigError("dataset.train_table", "required for table datasets");
        if (!(dataset.test_fraction > 0.0 && dataset.test_fraction < 1.0))
            throw ConfigError("dataset.test_fraction", "must lie in (0, 1)");
    }
    if (tasks < 1) throw ConfigError("tasks", "must be positive");
    if (first_task_classes < 0) throw ConfigError("first_task_classes", "must be non-negative");
    vq::TopologyParams{K, epsilon, e_min}.validate();
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("beta", "must be positive");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau", "must be positive");
    if (!(lambda1 >= 0.0) || !std::isfinite(lambda1)) throw ConfigError("lambda1", "must be finite and >= 0");
    if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) throw ConfigError("lambda2", "must be finite and >= 0");
    if (!(lr_theta >= 0.0) || !std::isfinite(lr_theta)) throw ConfigError("lr_theta", "must be finite and >= 0");
    if (!(lr_phi >= 0.0) || !std::isfinite(lr_phi)) throw ConfigError("lr_phi", "must be finite and >= 0");
    if (epochs < 0) throw ConfigError("epochs", "must be non-negative");
    if (batch_size < 1) throw ConfigError("batch_size", "must be positive");
    for (int h : hidden)
        if (h < 1) throw ConfigError("hidden", "layer widths must be positive");
    if (feature_dim < 1) throw ConfigError("feature_dim", "must be positive");
    model::activation_from_string(activation);
    if (!(grad_clip >= 0.0)) throw ConfigError("grad_clip", "must be >= 0");
    if (protos_per_class < 1) throw ConfigError("protos_per_class", "must be positive");
    if (!(cv_init_scale > 0.0)) throw ConfigError("cv_init_scale", "must be positive");
    if (!(gaussian_pa_sigma >= 0.0)) throw ConfigError("gaussian_pa_sigma", "must be >= 0");
    static const std::set<std::string> variants{"baseline_cce_kd", "dce_kd", "navq_kd",
                                                "navq_gaussian_pa", "full_napavq", "finetune"};
    if (!variants.count(variant)) throw ConfigError("variant", "unknown variant '" + variant + "'");
    if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
}

json config_to_json(const RunConfig& c) {
    const auto& s = c.dataset.synthetic;
    return json{
        {"dataset",
         {{"kind", c.dataset.kind},
          {"num_classes", s.num_classes},
          {"dim", s.dim},
          {"layout", s.layout},
          {"radius", s.radius},
          {"sigma", s.sigma},
          {"train_per_class", s.train_per_class},
          {"test_per_class", s.test_per_class},
          {"image_mode", s.image_mode},
          {"grid_size", s.grid_size},
          {"train_table", c.dataset.train_table},
          {"test_table", c.dataset.test_table},
          {"test_fraction", c.dataset.test_fraction}}},
        {"tasks", c.tasks},
        {"first_task_classes", c.first_task_classes},
        {"K", c.K},
        {"epsilon", c.epsilon},
        {"e_min", c.e_min},
        {"beta", c.beta},
        {"tau", c.tau},
        {"lambda1", c.lambda1},
        {"lambda2", c.lambda2},
        {"lr_theta", c.lr_theta},
        {"lr_phi", c.lr_phi},
        {"epochs", c.epochs},
        {"batch_size", c.batch_size},
        {"hidden", c.hidden},
        {"feature_dim", c.feature_dim},
        {"activation", c.activation},
        {"grad_clip", c.grad_clip},
        {"rotation", c.rotation},
        {"protos_per_class", c.protos_per_class},
        {"alpha_clip", c.alpha_clip},
        {"cv_init_scale", c.cv_init_scale},
        {"gaussian_pa_sigma", c.gaussian_pa_sigma},
        {"variant", c.variant},
        {"seed", c.seed},
        {"deterministic", c.deterministic},
        {"output_dir", c.output_dir},
    };
}

namespace {

template <typename T>
void read(const json& obj, const std::string& key, const std::string& path, T& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
        out = it->template get<T>();
    } catch (const json::exception&) {
        throw ConfigError(path, "has the wrong type");
    }
}

// Integers must not silently truncate floating values.
void read_int(const json& obj, const std::string& key, const std::string& path, int& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_number_integer()) throw ConfigError(path, "must be an integer");
    out = it->get<int>();
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& prefix) {
    for (const auto& [key, value] : obj.items())
        if (!known.count(key)) throw ConfigError(prefix + key, "unknown key");
}

}  // namespace

RunConfig config_from_json(const json& doc, const std::string& origin) {
    if (!doc.is_object()) throw ParseError(origin, 0, "configuration must be a JSON object");
    RunConfig c;
    reject_unknown(doc,
                   {"dataset", "tasks", "first_task_classes", "K", "epsilon", "e_min", "beta", "tau",
                    "lambda1", "lambda2", "lr_theta", "lr_phi", "epochs", "batch_size", "hidden",
                    "feature_dim", "activation", "grad_clip", "rotation", "protos_per_class",
                    "alpha_clip", "cv_init_scale", "gaussian_pa_sigma", "variant", "seed",
                    "deterministic", "output_dir"},
                   "");
    if (auto it = doc.find("dataset"); it != doc.end()) {
        if (!it->is_object()) throw ConfigError("dataset", "must be an object");
        const json& d = *it;
        reject_unknown(d,
                       {"kind", "num_classes", "dim", "layout", "radius", "sigma", "train_per_class",
                        "test_per_class", "image_mode", "grid_size", "train_table", "test_table",
                        "test_fraction"},
                       "dataset.");
        auto& s = c.dataset.synthetic;
        read(d, "kind", "dataset.kind", c.dataset.kind);
        read_int(d, "num_classes", "dataset.num_classes", s.num_classes);
        read_int(d, "dim", "dataset.dim", s.dim);
        read(d, "layout", "dataset.layout", s.layout);
        read(d, "radius", "dataset.radius", s.radius);
        read(d, "sigma", "dataset.sigma", s.sigma);
        read_int(d, "train_per_class", "dataset.train_per_class", s.train_per_class);
        read_int(d, "test_per_class", "dataset.test_per_class", s.test_per_class);
        read(d, "image_mode", "dataset.image_mode", s.image_mode);
        read_int(d, "grid_size", "dataset.grid_size", s.grid_size);
        read(d, "train_table", "dataset.train_table", c.dataset.train_table);
        read(d, "test_table", "dataset.test_table", c.dataset.test_table);
        read(d, "test_fraction", "dataset.test_fraction", c.dataset.test_fraction);
    }
    read_int(doc, "tasks", "tasks", c.tasks);
    read_int(doc, "first_task_classes", "first_task_classes", c.first_task_classes);
    read_int(doc, "K", "K", c.K);
    read(doc, "epsilon", "epsilon", c.epsilon);
    read(doc, "e_min", "e_min", c.e_min);
    read(doc, "beta", "beta", c.beta);
    read(doc, "tau", "tau", c.tau);
    read(doc, "lambda1", "lambda1", c.lambda1);
    read(doc, "lambda2", "lambda2", c.lambda2);
    read(doc, "lr_theta", "lr_theta", c.lr_theta);
    read(doc, "lr_phi", "lr_phi", c.lr_phi);
    read_int(doc, "epochs", "epochs", c.epochs);
    read_int(doc, "batch_size", "batch_size", c.batch_size);
    read(doc, "hidden", "hidden", c.hidden);
    read_int(doc, "feature_dim", "feature_dim", c.feature_dim);
    read(doc, "activation", "activation", c.activation);
    read(doc, "grad_clip", "grad_clip", c.grad_clip);
    read(doc, "rotation", "rotation", c.rotation);
    read_int(doc, "protos_per_class", "protos_per_class", c.protos_per_class);
    read(doc, "alpha_clip", "alpha_clip", c.alpha_clip);
    read(doc, "cv_init_scale", "cv_init_scale", c.cv_init_scale);
    read(doc, "gaussian_pa_sigma", "gaussian_pa_sigma", c.gaussian_pa_sigma);
    read(doc, "variant", "variant", c.variant);
    if (auto it = doc.find("seed"); it != doc.end()) {
        if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0))
            throw ConfigError("seed", "must be a non-negative integer");
        c.seed = it->get<std::uint64_t>();
    }
    read(doc, "deterministic", "deterministic", c.deterministic);
    read(doc, "output_dir", "output_dir", c.output_dir);
    c.validate();
    return c;
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    json doc;
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        doc = json::object();
    } else {
        try {
            doc = json::parse(text);
        } catch (const json::parse_error& e) {
            // byte offset -> line number
            std::size_t line = 1;
            for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
                if (text[i] == '\n') ++line;
            throw ParseError(origin, line, "malformed JSON");
        }
    }
    return config_from_json(doc, origin);
}

RunConfig load_config(const std::string& path) {
    return parse_config_text(read_file(path), path);
}

RunConfig apply_overrides(RunConfig config, const std::vector<std::string>& overrides) {
    json doc = config_to_json(config);
    for (const std::string& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError(item, "override must look like key=value");
        const std::string key = item.substr(0, eq);
        const std::string raw = item.substr(eq + 1);
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::parse_error&) {
            value = raw;
        }
        if (key.rfind("dataset.", 0) == 0) {
            doc["dataset"][key.substr(8)] = value;
        } else {
            doc[key] = value;
        }
    }
    return config_from_json(doc, "<overrides>");
}

}  // namespace napavq::io
