#include "napavq/io/serialize.hpp"

#include "napavq/error.hpp"
#include "napavq/io/config.hpp"
#include "napavq/io/tables.hpp"

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace napavq::io {

using nlohmann::json;
namespace fs = std::filesystem;

void write_file_atomic(const std::string& path, const std::string& contents) {
    const fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
        if (ec) throw IoError(target.parent_path().string(), ec.message());
    }
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(tmp.string(), std::strerror(errno));
        out << contents;
        out.flush();
        if (!out) throw IoError(tmp.string(), "write failed");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError(path, ec.message());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

void expect_format(const json& doc, const char* format) {
    if (!doc.is_object() || doc.value("format", std::string()) != format)
        throw ParseError("<document>", 0, std::string("expected format tag ") + format);
}

json vec_json(const Vec& v) { return to_std(v); }

Vec vec_from(const json& j) { return to_vec(j.get<std::vector<double>>()); }

}  // namespace

json graph_to_json(const vq::CodingVectorSet& cvs, const vq::TopologyGraph& graph) {
    json nodes = json::array();
    for (ClassId id : cvs.ids())
        nodes.push_back({{"id", id}, {"frozen", cvs.is_frozen(id)}, {"vector", vec_json(cvs[id])}});
    json edges = json::array();
    const auto n = static_cast<ClassId>(graph.size());
    for (ClassId i = 0; i < n; ++i)
        for (ClassId j = i + 1; j < n; ++j)
            if (graph.strengths()(i, j) > 0.0)
                edges.push_back({{"i", i}, {"j", j}, {"strength", graph.strengths()(i, j)}});
    const auto& p = graph.params();
    return {{"format", kGraphFormat},
            {"dim", cvs.dim()},
            {"params", {{"K", p.connectivity}, {"epsilon", p.decay}, {"e_min", p.min_strength}}},
            {"nodes", nodes},
            {"edges", edges}};
}

void graph_from_json(const json& doc, vq::CodingVectorSet& cvs, vq::TopologyGraph& graph) {
    expect_format(doc, kGraphFormat);
    try {
        const auto& p = doc.at("params");
        vq::TopologyParams params{p.at("K").get<int>(), p.at("epsilon").get<double>(),
                                  p.at("e_min").get<double>()};
        vq::CodingVectorSet out_cvs(doc.at("dim").get<int>());
        std::vector<ClassId> frozen;
        for (const auto& node : doc.at("nodes")) {
            const ClassId id = out_cvs.append(vec_from(node.at("vector")));
            if (id != node.at("id").get<ClassId>()) throw ParseError("graph", 0, "node ids must be dense and ordered");
            if (node.at("frozen").get<bool>()) frozen.push_back(id);
        }
        for (ClassId id : frozen) out_cvs.freeze(id);
        vq::TopologyGraph out_graph(params, out_cvs.size());
        for (const auto& e : doc.at("edges"))
            out_graph.set_strength(e.at("i").get<ClassId>(), e.at("j").get<ClassId>(), e.at("strength").get<double>());
        cvs = std::move(out_cvs);
        graph = std::move(out_graph);
    } catch (const json::exception& e) {
        throw ParseError("graph", 0, e.what());
    }
}

json prototypes_to_json(const proto::PrototypeStore& store) {
    json classes = json::object();
    for (const auto& [id, e] : store.entries())
        classes[std::to_string(id)] = {{"task", e.task}, {"vector", vec_json(e.mean)}};
    return {{"format", kPrototypeFormat}, {"classes", classes}};
}

proto::PrototypeStore prototypes_from_json(const json& doc) {
    expect_format(doc, kPrototypeFormat);
    proto::PrototypeStore store;
    try {
        for (const auto& [key, e] : doc.at("classes").items())
            store.insert(static_cast<ClassId>(std::stol(key)), vec_from(e.at("vector")), e.at("task").get<int>());
    } catch (const json::exception& e) {
        throw ParseError("prototypes", 0, e.what());
    } catch (const std::invalid_argument&) {
        throw ParseError("prototypes", 0, "class keys must be integers");
    }
    return store;
}

json model_to_json(const model::FeatureModel& m) {
    json layers = json::array();
    for (const auto& l : m.layers()) {
        std::vector<double> w;
        w.reserve(static_cast<std::size_t>(l.weight.size()));
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.push_back(l.weight(r, c));
        layers.push_back({{"in", l.in_dim()},
                          {"out", l.out_dim()},
                          {"activation", model::to_string(l.activation)},
                          {"weight", w},
                          {"bias", vec_json(l.bias)}});
    }
    return {{"format", kModelFormat}, {"layers", layers}};
}

model::FeatureModel model_from_json(const json& doc) {
    expect_format(doc, kModelFormat);
    std::vector<model::Layer> layers;
    try {
        for (const auto& j : doc.at("layers")) {
            const auto in = j.at("in").get<Eigen::Index>();
            const auto out = j.at("out").get<Eigen::Index>();
            const auto w = j.at("weight").get<std::vector<double>>();
            if (static_cast<Eigen::Index>(w.size()) != in * out) throw ParseError("model", 0, "weight size mismatch");
            model::Layer l;
            l.weight.resize(out, in);
            for (Eigen::Index r = 0; r < out; ++r)
                for (Eigen::Index c = 0; c < in; ++c) l.weight(r, c) = w[static_cast<std::size_t>(r * in + c)];
            l.bias = vec_from(j.at("bias"));
            l.activation = model::activation_from_string(j.at("activation").get<std::string>());
            layers.push_back(std::move(l));
        }
    } catch (const json::exception& e) {
        throw ParseError("model", 0, e.what());
    }
    return model::FeatureModel(std::move(layers));
}

json head_to_json(const model::SoftmaxHead& head) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < head.weight.rows(); ++r) rows.push_back(vec_json(head.weight.row(r).transpose()));
    return {{"format", "napavq-head/1"}, {"weight", rows}, {"bias", vec_json(head.bias)}};
}

model::SoftmaxHead head_from_json(const json& doc) {
    expect_format(doc, "napavq-head/1");
    model::SoftmaxHead head;
    const auto& rows = doc.at("weight");
    head.bias = vec_from(doc.at("bias"));
    const Eigen::Index n = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
    head.weight.resize(static_cast<Eigen::Index>(rows.size()), n);
    for (std::size_t r = 0; r < rows.size(); ++r) head.weight.row(static_cast<Eigen::Index>(r)) = vec_from(rows[r]).transpose();
    return head;
}

json run_result_to_json(const harness::RunResult& r) {
    json confusion = json::array();
    for (const auto& cm : r.confusion) confusion.push_back({{"classes", cm.num_classes}, {"counts", cm.counts}});
    json preds = json::array();
    for (const auto& p : r.predictions) preds.push_back({{"predicted", p.predicted}, {"truth", p.truth}});
    return {{"format", kRunFormat},
            {"config", config_to_json(r.config)},
            {"variant", r.variant},
            {"seed", r.seed},
            {"accuracy_matrix", r.accuracy.acc},
            {"task_test_counts", r.accuracy.test_counts},
            {"pooled_accuracy", r.pooled},
            {"average_accuracy", r.average_accuracy},
            {"average_forgetting", r.average_forgetting},
            {"forgetting_curve", r.forgetting},
            {"confusion", confusion},
            {"predictions", preds}};
}

harness::RunResult run_result_from_json(const json& doc) {
    expect_format(doc, kRunFormat);
    harness::RunResult r;
    try {
        r.config = config_from_json(doc.at("config"), "result.config");
        r.variant = doc.at("variant").get<std::string>();
        r.seed = doc.at("seed").get<std::uint64_t>();
        r.accuracy.acc = doc.at("accuracy_matrix").get<std::vector<std::vector<double>>>();
        r.accuracy.test_counts = doc.at("task_test_counts").get<std::vector<std::size_t>>();
        r.pooled = doc.at("pooled_accuracy").get<std::vector<double>>();
        r.average_accuracy = doc.at("average_accuracy").get<double>();
        r.average_forgetting = doc.at("average_forgetting").get<double>();
        r.forgetting = doc.at("forgetting_curve").get<std::vector<double>>();
        for (const auto& c : doc.at("confusion"))
            r.confusion.push_back({c.at("classes").get<int>(), c.at("counts").get<std::vector<std::int64_t>>()});
        for (const auto& p : doc.at("predictions"))
            r.predictions.push_back({p.at("predicted").get<std::vector<int>>(), p.at("truth").get<std::vector<int>>()});
    } catch (const json::exception& e) {
        throw ParseError("result", 0, e.what());
    }
    return r;
}

std::string format_events(const std::vector<harness::EpochEvent>& events) {
    std::string out = "task,epoch,total,dce,na,hat_dce,hat_na,kd,edges\n";
    for (const auto& e : events) {
        out += std::to_string(e.task) + "," + std::to_string(e.epoch) + "," + format_double(e.total) + "," +
               format_double(e.dce) + "," + format_double(e.na) + "," + format_double(e.hat_dce) + "," +
               format_double(e.hat_na) + "," + format_double(e.kd) + "," + std::to_string(e.edges) + "\n";
    }
    return out;
}

std::string format_confusion(const harness::ConfusionMatrix& cm) {
    std::string out = "true\\pred";
    for (int c = 0; c < cm.num_classes; ++c) out += "," + std::to_string(c);
    out += "\n";
    for (int r = 0; r < cm.num_classes; ++r) {
        out += std::to_string(r);
        for (int c = 0; c < cm.num_classes; ++c) out += "," + std::to_string(cm.at(r, c));
        out += "\n";
    }
    return out;
}

std::string format_k_sweep(const std::vector<harness::KSweepRow>& rows) {
    std::string out = "K,status,average_accuracy,average_forgetting,wall_seconds\n";
    for (const auto& r : rows) {
        out += std::to_string(r.K) + "," + (r.ok ? std::string("ok") : "skipped") + "," +
               format_double(r.average_accuracy) + "," + format_double(r.average_forgetting) + "," +
               format_double(r.wall_seconds) + "\n";
    }
    return out;
}

std::string format_embeddings(const harness::TrainedState& state, const harness::Dataset& data,
                              const harness::TaskSchedule& schedule) {
    std::vector<ClassId> candidates;
    std::vector<int> tasks(data.size(), -1);
    for (std::size_t i = 0; i < data.size(); ++i) tasks[i] = schedule.task_of(data.y[i]);
    candidates = schedule.seen_classes(schedule.num_tasks() - 1);
    const std::vector<int> pred = harness::predict(state, data, candidates);

    std::string out;
    const int n = state.model.output_dim();
    for (int k = 0; k < n; ++k) out += "f" + std::to_string(k) + ",";
    out += "label,predicted,task\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Vec z = state.model.forward(data.x[i]);
        for (Eigen::Index k = 0; k < z.size(); ++k) out += format_double(z[k]) + ",";
        out += std::to_string(data.y[i]) + "," + std::to_string(pred[i]) + "," + std::to_string(tasks[i]) + "\n";
    }
    return out;
}

void export_embeddings(const harness::TrainedState& state, const harness::Dataset& data,
                       const harness::TaskSchedule& schedule, const std::string& path) {
    write_file_atomic(path, format_embeddings(state, data, schedule));
}

void write_run_directory(const std::string& dir, const harness::RunOutput& run) {
    const fs::path root(dir);
    write_file_atomic((root / "config.json").string(), config_to_json(run.result.config).dump(2) + "\n");
    write_file_atomic((root / "result.json").string(), run_result_to_json(run.result).dump(2) + "\n");
    write_file_atomic((root / "events.csv").string(), format_events(run.result.events));
    for (std::size_t t = 0; t < run.result.confusion.size(); ++t)
        write_file_atomic((root / ("confusion_t" + std::to_string(t) + ".csv")).string(),
                          format_confusion(run.result.confusion[t]));
    write_file_atomic((root / "model.json").string(), model_to_json(run.state.model).dump() + "\n");
    write_file_atomic((root / "graph.json").string(), graph_to_json(run.state.cvs, run.state.graph).dump(2) + "\n");
    write_file_atomic((root / "prototypes.json").string(), prototypes_to_json(run.state.prototypes).dump(2) + "\n");
    if (run.state.head) write_file_atomic((root / "head.json").string(), head_to_json(*run.state.head).dump() + "\n");
}

harness::TrainedState load_trained_state(const std::string& dir) {
    const fs::path root(dir);
    harness::TrainedState st;
    const RunConfig cfg = load_config((root / "config.json").string());
    st.rotation = cfg.rotation;
    st.model = model_from_json(json::parse(read_file((root / "model.json").string())));
    graph_from_json(json::parse(read_file((root / "graph.json").string())), st.cvs, st.graph);
    st.prototypes = prototypes_from_json(json::parse(read_file((root / "prototypes.json").string())));
    if (fs::exists(root / "head.json"))
        st.head = head_from_json(json::parse(read_file((root / "head.json").string())));
    return st;
}

}  // namespace napavq::io
