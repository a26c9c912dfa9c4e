#include "napavq/error.hpp"
#include "napavq/harness/run.hpp"
#include "napavq/io/config.hpp"
#include "napavq/io/serialize.hpp"
#include "napavq/io/tables.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <limits>

using namespace napavq;
using namespace napavq::io;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("napavq_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string key_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ConfigError& e) {
        return e.key;
    }
    return "<no error>";
}

harness::RunOutput small_run(harness::Variant v = harness::Variant::FullNapavq) {
    RunConfig cfg;
    cfg.dataset.synthetic.num_classes = 4;
    cfg.dataset.synthetic.train_per_class = 30;
    cfg.dataset.synthetic.test_per_class = 10;
    cfg.tasks = 2;
    cfg.epochs = 2;
    cfg.hidden = {8};
    cfg.feature_dim = 4;
    return harness::run_ablation(cfg, v);
}

}  // namespace

TEST(Config, EmptyDocumentGivesDefaults) {
    EXPECT_EQ(parse_config_text(""), RunConfig{});
    EXPECT_EQ(parse_config_text("{}"), RunConfig{});
}

TEST(Config, OutOfRangeNamesTheKey) {
    EXPECT_EQ(key_of([] { parse_config_text(R"({"epsilon": 1.5})"); }), "epsilon");
    EXPECT_EQ(key_of([] { parse_config_text(R"({"K": 1})"); }), "K");
    EXPECT_EQ(key_of([] { parse_config_text(R"({"tau": 0})"); }), "tau");
    EXPECT_EQ(key_of([] { parse_config_text(R"({"beta": -1})"); }), "beta");
    EXPECT_EQ(key_of([] { parse_config_text(R"({"e_min": 1})"); }), "e_min");
}

TEST(Config, UnknownKeysAreRejected) {
    EXPECT_EQ(key_of([] { parse_config_text(R"({"lamda1": 3})"); }), "lamda1");
    EXPECT_EQ(key_of([] { parse_config_text(R"({"dataset": {"sigmaa": 1}})"); }), "dataset.sigmaa");
}

TEST(Config, IntegersRejectFractions) {
    EXPECT_EQ(key_of([] { parse_config_text(R"({"epochs": 2.5})"); }), "epochs");
}

TEST(Config, MalformedDocumentReportsLine) {
    try {
        parse_config_text("{\n  \"K\": 3,\n  \"tau\": ,\n}");
        FAIL() << "no error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line, 3u);
    }
}

TEST(Config, EffectiveConfigRoundTrips) {
    RunConfig cfg;
    cfg.K = 7;
    cfg.tau = 0.3;
    cfg.hidden = {12, 5};
    cfg.dataset.synthetic.sigma = 0.25;
    cfg.seed = std::numeric_limits<std::uint64_t>::max();
    EXPECT_EQ(parse_config_text(config_to_json(cfg).dump()), cfg);
}

TEST(Config, OverridesReachNestedKeys) {
    const RunConfig cfg = apply_overrides(RunConfig{}, {"K=4", "dataset.sigma=0.1", "variant=finetune", "hidden=[3]"});
    EXPECT_EQ(cfg.K, 4);
    EXPECT_EQ(cfg.dataset.synthetic.sigma, 0.1);
    EXPECT_EQ(cfg.variant, "finetune");
    EXPECT_EQ(cfg.hidden, std::vector<int>{3});
    EXPECT_EQ(key_of([] { apply_overrides(RunConfig{}, {"epsilon=2"}); }), "epsilon");
    EXPECT_THROW(apply_overrides(RunConfig{}, {"nonsense"}), ConfigError);
}

TEST(Config, MissingFileIsAnIoError) {
    EXPECT_THROW(load_config("/nonexistent/napavq.json"), IoError);
}

TEST(Tables, ShapeOfSmallFile) {
    const auto t = parse_feature_table("a,b,label\n1,2,0\n3,4,1\n5,6,0\n", "t.csv");
    EXPECT_EQ(t.size(), 3u);
    EXPECT_EQ(t.dims(), 2u);
    EXPECT_EQ(t.rows[1], (std::vector<double>{3, 4}));
}

TEST(Tables, LabelsAreRemappedDensely) {
    const auto t = parse_feature_table("x,y\n0.5,9\n1.5,5\n2.5,9\n", "t.csv");
    EXPECT_EQ(t.labels, (std::vector<ClassId>{1, 0, 1}));
    EXPECT_EQ(t.label_mapping, (std::map<long long, ClassId>{{5, 0}, {9, 1}}));
}

TEST(Tables, WriteReadRoundTripIsExact) {
    TempDir dir;
    Rng rng(3);
    FeatureTable t;
    t.feature_names = {"f0", "f1", "f2"};
    for (int i = 0; i < 50; ++i) {
        t.rows.push_back(to_std(oracle::random_vec(3, rng, 1e3)));
        t.labels.push_back(i % 4);
    }
    t.rows[0][1] = 0.1 + 0.2;
    t.rows[1][2] = 5e-324;
    t.label_mapping = {{3, 0}, {10, 1}, {11, 2}, {40, 3}};
    write_feature_table(dir / "t.csv", t);
    const FeatureTable back = load_feature_table(dir / "t.csv");
    EXPECT_EQ(back.rows, t.rows);
    EXPECT_EQ(back.labels, t.labels);
    EXPECT_EQ(back.label_mapping, t.label_mapping);
    EXPECT_EQ(back.feature_names, t.feature_names);
}

TEST(Tables, ErrorsCarryLineNumbers) {
    auto line_of = [](const std::string& text) -> std::size_t {
        try {
            parse_feature_table(text, "t.csv");
        } catch (const ParseError& e) {
            return e.line;
        }
        return 0;
    };
    EXPECT_EQ(line_of("a,label\n1,0\n2,3,1\n"), 3u);
    EXPECT_EQ(line_of("a,label\n1,0\n2,1\nzz,0\n"), 4u);
    EXPECT_EQ(line_of("a,label\n1,0.5\n"), 2u);
    EXPECT_THROW(parse_feature_table("", "t.csv"), ParseError);
}

TEST(Tables, FormatDoubleIsShortestRoundTrip) {
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(2.0), "2");
    EXPECT_EQ(std::stod(format_double(0.1 + 0.2)), 0.1 + 0.2);
}

TEST(Serialize, GraphRoundTrip) {
    Rng rng(5);
    vq::CodingVectorSet c(3);
    for (int i = 0; i < 6; ++i) c.append(oracle::random_vec(3, rng));
    c.freeze(1);
    const vq::TopologyGraph g = oracle::random_graph(6, 0.5, rng, {4, 0.8, 0.1});
    vq::CodingVectorSet c2;
    vq::TopologyGraph g2;
    graph_from_json(nlohmann::json::parse(graph_to_json(c, g).dump()), c2, g2);
    EXPECT_EQ(oracle::to_dense(c2), oracle::to_dense(c));
    EXPECT_EQ(c2.frozen_ids(), c.frozen_ids());
    EXPECT_EQ(g2.strengths(), g.strengths());
    EXPECT_EQ(g2.params().connectivity, 4);
}

TEST(Serialize, ModelAndPrototypesRoundTrip) {
    Rng rng(6);
    const std::vector<int> hidden{5, 4};
    const auto m = model::FeatureModel::mlp(3, hidden, 2, rng, model::Activation::Tanh);
    const auto m2 = model_from_json(nlohmann::json::parse(model_to_json(m).dump()));
    EXPECT_EQ(oracle::flatten_params(m2), oracle::flatten_params(m));
    EXPECT_EQ(m2.layers()[0].activation, model::Activation::Tanh);

    proto::PrototypeStore s;
    s.insert(0, oracle::random_vec(2, rng), 0);
    s.insert(3, oracle::random_vec(2, rng), 1);
    EXPECT_EQ(prototypes_from_json(nlohmann::json::parse(prototypes_to_json(s).dump())), s);
}

TEST(Serialize, WrongFormatTagIsRejected) {
    nlohmann::json doc = prototypes_to_json({});
    doc["format"] = "something-else";
    EXPECT_THROW(prototypes_from_json(doc), ParseError);
}

TEST(Serialize, RunResultRoundTrip) {
    const auto run = small_run();
    const auto back = run_result_from_json(nlohmann::json::parse(run_result_to_json(run.result).dump()));
    EXPECT_EQ(back.accuracy, run.result.accuracy);
    EXPECT_EQ(back.config, run.result.config);
    const std::string events = format_events(run.result.events);
    EXPECT_EQ(static_cast<std::size_t>(std::count(events.begin(), events.end(), '\n')), run.result.events.size() + 1);
    EXPECT_EQ(back.confusion, run.result.confusion);
    EXPECT_EQ(back.predictions, run.result.predictions);
    EXPECT_EQ(back.average_forgetting, run.result.average_forgetting);
    EXPECT_TRUE(back.metrics_consistent());
}

TEST(Serialize, RunDirectoryReloadsTrainedState) {
    TempDir dir;
    for (auto v : {harness::Variant::FullNapavq, harness::Variant::BaselineCceKd}) {
        const auto run = small_run(v);
        const std::string out = dir / std::string(harness::to_string(v));
        write_run_directory(out, run);
        for (const char* f : {"config.json", "result.json", "events.csv", "confusion_t0.csv", "confusion_t1.csv",
                              "model.json", "graph.json", "prototypes.json"})
            EXPECT_TRUE(fs::exists(fs::path(out) / f)) << f;
        const auto st = load_trained_state(out);
        EXPECT_EQ(oracle::flatten_params(st.model), oracle::flatten_params(run.state.model));
        EXPECT_EQ(st.graph.strengths(), run.state.graph.strengths());
        EXPECT_EQ(st.head.has_value(), run.state.head.has_value());
        if (st.head) EXPECT_EQ(st.head->weight, run.state.head->weight);
        EXPECT_EQ(load_config((fs::path(out) / "config.json").string()), run.result.config);
    }
}

TEST(Serialize, EmbeddingExport) {
    TempDir dir;
    const auto run = small_run();
    const auto stream = harness::make_stream(run.result.config);
    export_embeddings(run.state, stream.test, stream.schedule, dir / "a.csv");
    export_embeddings(run.state, stream.test, stream.schedule, dir / "b.csv");
    const std::string a = read_file(dir / "a.csv");
    EXPECT_EQ(a, read_file(dir / "b.csv"));
    const auto lines = std::count(a.begin(), a.end(), '\n');
    EXPECT_EQ(static_cast<std::size_t>(lines), stream.test.size() + 1);
    const std::string header = a.substr(0, a.find('\n'));
    EXPECT_EQ(std::count(header.begin(), header.end(), ','), 4 + 2);
}

TEST(Serialize, KSweepTableHasOneRowPerK) {
    std::vector<harness::KSweepRow> rows(3);
    rows[0].K = 2;
    rows[1].K = 15;
    rows[2].K = 50;
    const std::string t = format_k_sweep(rows);
    EXPECT_EQ(std::count(t.begin(), t.end(), '\n'), 4);
}

TEST(Serialize, AtomicWriteCreatesDirectories) {
    TempDir dir;
    write_file_atomic(dir / "a/b/c.txt", "hello");
    EXPECT_EQ(read_file(dir / "a/b/c.txt"), "hello");
    write_file_atomic(dir / "a/b/c.txt", "again");
    EXPECT_EQ(read_file(dir / "a/b/c.txt"), "again");
    EXPECT_THROW(read_file(dir / "missing.txt"), IoError);
}
