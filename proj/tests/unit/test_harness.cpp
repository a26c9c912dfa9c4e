#include "napavq/error.hpp"
#include "napavq/harness/classify.hpp"
#include "napavq/harness/data.hpp"
#include "napavq/harness/metrics.hpp"
#include "napavq/harness/run.hpp"
#include "napavq/harness/synthetic.hpp"
#include "napavq/io/serialize.hpp"
#include "napavq/io/tables.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace napavq;
using namespace napavq::harness;

namespace {

io::RunConfig quick_config() {
    io::RunConfig cfg;
    cfg.dataset.synthetic.num_classes = 6;
    cfg.dataset.synthetic.train_per_class = 40;
    cfg.dataset.synthetic.test_per_class = 20;
    cfg.tasks = 3;
    cfg.epochs = 3;
    cfg.hidden = {16};
    cfg.feature_dim = 8;
    cfg.seed = 5;
    return cfg;
}

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

}  // namespace

TEST(TaskSchedule, EqualPartition) {
    const auto s = TaskSchedule::partition(10, 5);
    ASSERT_EQ(s.num_tasks(), 5u);
    for (std::size_t t = 0; t < 5; ++t) EXPECT_EQ(s.classes(t).size(), 2u);
    EXPECT_EQ(s.cumulative(2), 6u);
    EXPECT_EQ(s.task_of(7), 3);
    EXPECT_EQ(s.seen_classes(1), (std::vector<ClassId>{0, 1, 2, 3}));
}

TEST(TaskSchedule, LargerFirstTask) {
    const auto s = TaskSchedule::partition(10, 4, 4);
    EXPECT_EQ(s.classes(0).size(), 4u);
    EXPECT_EQ(s.classes(3), (std::vector<ClassId>{8, 9}));
}

TEST(TaskSchedule, RejectsOverlapAndUnevenSplit) {
    EXPECT_THROW(TaskSchedule({{0, 1}, {1, 2}}), ConfigError);
    EXPECT_THROW(TaskSchedule::partition(10, 3), ConfigError);
}

TEST(Synthetic, TenClassesFiveTasks) {
    const Stream s = generate_synthetic_stream({}, 1);
    EXPECT_EQ(s.schedule.num_tasks(), 5u);
    EXPECT_EQ(s.train.size(), 2000u);
    EXPECT_EQ(s.test.size(), 1000u);
    EXPECT_EQ(s.train.dim(), 2);
}

TEST(Synthetic, MeansLieOnTheCircle) {
    SyntheticSpec spec;
    spec.sigma = 0.0;
    const Stream s = generate_synthetic_stream(spec, 4);
    for (std::size_t i = 0; i < s.train.size(); i += 97) EXPECT_NEAR(s.train.x[i].norm(), 5.0, 1e-12);
}

TEST(Synthetic, SameSeedSameBytes) {
    const Stream a = generate_synthetic_stream({}, 77);
    const Stream b = generate_synthetic_stream({}, 77);
    EXPECT_EQ(io::format_feature_table(io::table_from_dataset(a.train)),
              io::format_feature_table(io::table_from_dataset(b.train)));
    const Stream c = generate_synthetic_stream({}, 78);
    EXPECT_NE(io::format_feature_table(io::table_from_dataset(a.train)),
              io::format_feature_table(io::table_from_dataset(c.train)));
}

TEST(Synthetic, ImageMode) {
    SyntheticSpec spec;
    spec.image_mode = true;
    spec.grid_size = 6;
    spec.num_classes = 4;
    spec.tasks = 2;
    const Stream s = generate_synthetic_stream(spec, 1);
    EXPECT_EQ(s.train.grid_size, 6);
    EXPECT_EQ(s.train.dim(), 36);
}

TEST(Metrics, AverageAccuracyOfPooledRows) {
    const AccuracyMatrix m{{{1.0}, {0.5, 0.5}}, {10, 10}};
    EXPECT_DOUBLE_EQ(pooled_accuracy(m, 1), 0.5);
    EXPECT_DOUBLE_EQ(average_accuracy(m), 0.75);
    EXPECT_DOUBLE_EQ(average_accuracy(AccuracyMatrix{{{0.9}}, {5}}), 0.9);
}

TEST(Metrics, PoolingWeightsByTestCount) {
    const AccuracyMatrix m{{{1.0}, {1.0, 0.0}}, {30, 10}};
    EXPECT_DOUBLE_EQ(pooled_accuracy(m, 1), 0.75);
}

TEST(Metrics, ForgettingDefinition) {
    const AccuracyMatrix m{{{0.9}, {0.7, 1.0}}, {1, 1}};
    EXPECT_NEAR(average_forgetting(m), 0.2, 1e-12);
    EXPECT_EQ(forgetting_curve(m), (std::vector<double>{0.0, forgetting_at(m, 1)}));
}

TEST(Metrics, ImprovingTasksDoNotForget) {
    const AccuracyMatrix m{{{0.5}, {0.6, 0.9}, {0.8, 0.95, 0.7}}, {1, 1, 1}};
    EXPECT_LE(average_forgetting(m), 0.0);
}

TEST(Metrics, SingleTaskHasNoForgetting) {
    EXPECT_EQ(average_forgetting(AccuracyMatrix{{{0.4}}, {3}}), 0.0);
}

TEST(Metrics, RejectsMalformedMatrix) {
    EXPECT_THROW((AccuracyMatrix{{{1.0}, {0.5}}, {1, 1}}.validate()), ContractViolation);
    EXPECT_THROW((AccuracyMatrix{{{1.5}}, {1}}.validate()), ContractViolation);
}

TEST(Confusion, PerfectPredictorIsDiagonal) {
    const std::vector<int> y{0, 1, 2, 2, 1};
    const auto cm = confusion_matrix(y, y, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) EXPECT_EQ(cm.at(i, j), 0);
    EXPECT_EQ(cm.at(2, 2), 2);
}

TEST(Confusion, ConstantPredictorFillsOneColumn) {
    const std::vector<int> y{0, 1, 2, 2, 1, 0, 0};
    const std::vector<int> p(y.size(), 1);
    const auto cm = confusion_matrix(p, y, 3);
    std::vector<std::int64_t> rows(3, 0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            if (j != 1) EXPECT_EQ(cm.at(i, j), 0);
            rows[i] += cm.at(i, j);
        }
    EXPECT_EQ(rows, (std::vector<std::int64_t>{3, 2, 2}));
    EXPECT_EQ(cm.total(), 7);
}

TEST(Classify, ScaleInvariant) {
    vq::CodingVectorSet c(2);
    c.append(v2(1, 0.2));
    c.append(v2(-1, 3));
    c.append(v2(0.5, -4));
    const std::vector<ClassId> all{0, 1, 2};
    for (ClassId i = 0; i < 3; ++i) EXPECT_EQ(classify_feature(3.0 * c[i], c, all), i);
}

TEST(Classify, BisectorGoesToLowerId) {
    vq::CodingVectorSet c(2);
    c.append(v2(0, 2));
    c.append(v2(2, 0));
    EXPECT_EQ(classify_feature(v2(1, 1), c, std::vector<ClassId>{0, 1}), 0);
}

TEST(Classify, MatchesExhaustiveArgmin) {
    Rng rng(31);
    vq::CodingVectorSet c(6);
    for (int i = 0; i < 12; ++i) c.append(oracle::random_vec(6, rng));
    const std::vector<int> cand{0, 2, 3, 5, 7, 8, 11};
    const std::vector<ClassId> ids(cand.begin(), cand.end());
    const auto dense = oracle::to_dense(c);
    for (int q = 0; q < 500; ++q) {
        const Vec z = oracle::random_vec(6, rng, 2.0);
        EXPECT_EQ(classify_feature(z, c, ids), oracle::argmin_normalized(to_std(z), dense, cand));
    }
}

TEST(Variants, SixNamesRoundTrip) {
    EXPECT_EQ(kAllVariants.size(), 6u);
    for (Variant v : kAllVariants) EXPECT_EQ(variant_from_string(to_string(v)), v);
    EXPECT_THROW(variant_from_string("nope"), ConfigError);
}

TEST(EffectiveConnectivity, ClampsToAvailableVectors) {
    EXPECT_EQ(effective_connectivity(15, 4), 4);
    EXPECT_EQ(effective_connectivity(2, 10), 2);
    EXPECT_EQ(effective_connectivity(15, 1), 0);
}

TEST(Run, SingleTaskHasZeroForgetting) {
    io::RunConfig cfg = quick_config();
    cfg.tasks = 1;
    const RunOutput out = run_ablation(cfg, Variant::FullNapavq);
    EXPECT_EQ(out.result.average_forgetting, 0.0);
    EXPECT_TRUE(out.result.metrics_consistent());
}

TEST(Run, SameSeedBitwiseIdentical) {
    const io::RunConfig cfg = quick_config();
    const RunOutput a = run_ablation(cfg, Variant::FullNapavq);
    const RunOutput b = run_ablation(cfg, Variant::FullNapavq);
    EXPECT_EQ(io::run_result_to_json(a.result).dump(), io::run_result_to_json(b.result).dump());
    EXPECT_EQ(a.result.accuracy, b.result.accuracy);
    EXPECT_EQ(a.result.events, b.result.events);
    EXPECT_EQ(oracle::to_dense(a.state.graph.strengths()), oracle::to_dense(b.state.graph.strengths()));
}

TEST(Run, AblationPathEqualsDirectRun) {
    io::RunConfig cfg = quick_config();
    const RunOutput a = run_ablation(cfg, Variant::FullNapavq);
    const RunOutput b = run_incremental(make_stream(cfg), cfg);
    EXPECT_EQ(io::run_result_to_json(a.result).dump(), io::run_result_to_json(b.result).dump());
}

TEST(Run, EveryVariantProducesConsistentMetrics) {
    const io::RunConfig cfg = quick_config();
    const Stream stream = make_stream(cfg);
    for (Variant v : kAllVariants) {
        const RunOutput out = run_incremental(stream, cfg, v);
        EXPECT_TRUE(out.result.metrics_consistent()) << to_string(v);
        EXPECT_EQ(out.result.accuracy.num_tasks(), 3u);
        EXPECT_EQ(out.result.confusion.back().num_classes, 6);
        EXPECT_EQ(out.state.head.has_value(), v == Variant::BaselineCceKd);
    }
}

TEST(Run, EventSinkSeesEveryEpoch) {
    const io::RunConfig cfg = quick_config();
    int seen = 0;
    run_ablation(cfg, Variant::NavqKd, [&](const EpochEvent&) { ++seen; });
    EXPECT_EQ(seen, cfg.tasks * cfg.epochs);
}

TEST(Run, SeparableDataIsLearnedPerfectly) {
    io::RunConfig cfg;
    cfg.tasks = 1;
    cfg.dataset.synthetic.sigma = 0.0;
    const RunOutput out = run_ablation(cfg, Variant::Finetune);
    EXPECT_EQ(out.result.accuracy.acc[0][0], 1.0);
    const Stream s = make_stream(cfg);
    const auto pred = predict(out.state, s.train, s.schedule.seen_classes(0));
    EXPECT_EQ(pred, std::vector<int>(s.train.y.begin(), s.train.y.end()));
}

TEST(Run, ParallelPredictionMatchesSerial) {
    const io::RunConfig cfg = quick_config();
    const RunOutput out = run_ablation(cfg, Variant::FullNapavq);
    const Stream s = make_stream(cfg);
    const auto all = s.schedule.seen_classes(2);
    EXPECT_EQ(predict(out.state, s.train, all, true), predict(out.state, s.train, all, false));
}

TEST(Run, RotationRestrictsPredictionsToOriginalClasses) {
    io::RunConfig cfg = quick_config();
    cfg.rotation = true;
    cfg.dataset.synthetic.image_mode = true;
    cfg.dataset.synthetic.grid_size = 4;
    cfg.dataset.synthetic.num_classes = 4;
    cfg.tasks = 2;
    cfg.epochs = 2;
    const RunOutput out = run_ablation(cfg, Variant::FullNapavq);
    EXPECT_EQ(out.state.cvs.size(), 16u);
    for (const auto& step : out.result.predictions)
        for (int p : step.predicted) {
            EXPECT_GE(p, 0);
            EXPECT_LT(p, 4);
        }
}

TEST(Run, RotationNeedsImages) {
    io::RunConfig cfg = quick_config();
    cfg.rotation = true;
    EXPECT_THROW(run_ablation(cfg, Variant::FullNapavq), ConfigError);
}

TEST(KSweep, OneRowPerValueWithWarningRow) {
    io::RunConfig cfg = quick_config();
    cfg.epochs = 1;
    const auto rows = k_sweep(cfg, {2, 15});
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].K, 2);
    EXPECT_TRUE(rows[0].ok);
    const auto bad = k_sweep(cfg, {1});
    ASSERT_EQ(bad.size(), 1u);
    EXPECT_FALSE(bad[0].ok);
}
