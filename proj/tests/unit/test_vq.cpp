#include "napavq/error.hpp"
#include "napavq/vq/coding_vectors.hpp"
#include "napavq/vq/losses.hpp"
#include "napavq/vq/topology.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace napavq;
using namespace napavq::vq;
using napavq::oracle::Dense;

namespace {

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

CodingVectorSet cvs_of(std::initializer_list<Vec> vs) {
    CodingVectorSet out(static_cast<int>(vs.begin()->size()));
    for (const Vec& v : vs) out.append(v);
    return out;
}

}  // namespace

TEST(CodingVectors, AppendGivesDenseIds) {
    CodingVectorSet c(3);
    EXPECT_EQ(c.append(Vec::Ones(3)), 0);
    EXPECT_EQ(c.append(Vec::Zero(3)), 1);
    EXPECT_EQ(c.size(), 2u);
    EXPECT_THROW(c.append(Vec::Zero(2)), ContractViolation);
    EXPECT_THROW(c[5], ContractViolation);
}

TEST(CodingVectors, FrozenRejectsUpdates) {
    CodingVectorSet c = cvs_of({v2(1, 2), v2(3, 4)});
    freeze_old_cvs(c, std::vector<ClassId>{0});
    EXPECT_FALSE(c.add_scaled(0, v2(1, 1), 1.0));
    EXPECT_THROW(c.assign(0, v2(0, 0)), ContractViolation);
    EXPECT_TRUE(c.add_scaled(1, v2(1, 1), 1.0));
    EXPECT_EQ(c[0], v2(1, 2));
    EXPECT_EQ(c[1], v2(4, 5));
}

TEST(CodingVectors, FreezeIsIdempotent) {
    CodingVectorSet c = cvs_of({v2(1, 2), v2(3, 4)});
    freeze_old_cvs(c, std::vector<ClassId>{0});
    freeze_old_cvs(c, std::vector<ClassId>{0});
    EXPECT_EQ(c.frozen_ids(), std::vector<ClassId>{0});
}

TEST(RankCodingVectors, DirectDistances) {
    const auto r = rank_coding_vectors(v2(0, 0), cvs_of({v2(1, 0), v2(2, 0), v2(0, 3)}));
    EXPECT_EQ(r.order, (std::vector<ClassId>{0, 1, 2}));
    EXPECT_NEAR(r.distances[0], 1.0, 1e-12);
    EXPECT_NEAR(r.distances[1], 2.0, 1e-12);
    EXPECT_NEAR(r.distances[2], 3.0, 1e-12);
}

TEST(RankCodingVectors, TieGoesToLowerId) {
    const auto r = rank_coding_vectors(v2(0, 0), cvs_of({v2(1, 0), v2(-1, 0)}));
    EXPECT_EQ(r.order, (std::vector<ClassId>{0, 1}));
}

TEST(RankCodingVectors, MatchesFullSortOracle) {
    Rng rng(11);
    CodingVectorSet c(8);
    for (int i = 0; i < 50; ++i) c.append(oracle::random_vec(8, rng));
    for (int q = 0; q < 20; ++q) {
        const Vec z = oracle::random_vec(8, rng);
        const auto r = rank_coding_vectors(z, c);
        const auto oracle = oracle::brute_force_order(to_std(z), oracle::to_dense(c));
        EXPECT_EQ(std::vector<int>(r.order.begin(), r.order.end()), oracle);
    }
}

TEST(RankCodingVectors, EmptySetThrows) {
    EXPECT_THROW(rank_coding_vectors(v2(0, 0), CodingVectorSet(2)), EmptyModelError);
}

TEST(TopologyParams, ValidationNamesTheKey) {
    auto key_of = [](TopologyParams p) {
        try {
            p.validate();
        } catch (const ConfigError& e) {
            return e.key;
        }
        return std::string();
    };
    EXPECT_EQ(key_of({1, 0.9, 0.05}), "K");
    EXPECT_EQ(key_of({2, 1.0, 0.05}), "epsilon");
    EXPECT_EQ(key_of({2, 0.9, 0.0}), "e_min");
    EXPECT_EQ(key_of({2, 0.9, 0.05}), "");
}

TEST(UpdateTopology, CreatesEdgeToRunnerUp) {
    const CodingVectorSet c = cvs_of({v2(0, 0), v2(1, 0), v2(5, 5)});
    TopologyGraph g({2, 0.9, 0.05}, 3);
    update_topology(v2(0.1, 0), c, g);
    EXPECT_EQ(g.strength(0, 1), 1.0);
    EXPECT_EQ(g.strength(1, 0), 1.0);
    EXPECT_EQ(g.edge_count(), 1u);
}

TEST(UpdateTopology, DecaysStaleWinnerEdge) {
    const CodingVectorSet c = cvs_of({v2(0, 0), v2(1, 0), v2(9, 9)});
    TopologyGraph g({2, 0.5, 0.05}, 3);
    g.set_strength(0, 2, 1.0);
    update_topology(v2(0, 0), c, g);
    EXPECT_EQ(g.strength(0, 2), 0.5);
    EXPECT_EQ(g.strength(0, 1), 1.0);
}

TEST(UpdateTopology, PrunesBelowMinimum) {
    const CodingVectorSet c = cvs_of({v2(0, 0), v2(1, 0), v2(9, 9)});
    TopologyGraph g({2, 0.5, 0.05}, 3);
    g.set_strength(0, 2, 0.06);
    update_topology(v2(0, 0), c, g);
    EXPECT_EQ(g.strength(0, 2), 0.0);
    EXPECT_EQ(g.strength(2, 0), 0.0);
}

TEST(UpdateTopology, FrozenCvStillGainsAndLosesEdges) {
    CodingVectorSet c = cvs_of({v2(0, 0), v2(1, 0), v2(9, 9)});
    freeze_old_cvs(c, std::vector<ClassId>{0, 1, 2});
    TopologyGraph g({2, 0.5, 0.3}, 3);
    g.set_strength(0, 2, 0.5);
    update_topology(v2(0, 0), c, g);
    EXPECT_EQ(g.strength(0, 1), 1.0);
    EXPECT_EQ(g.strength(0, 2), 0.0);
}

TEST(UpdateTopology, RejectsConnectivityOutsideRange) {
    const CodingVectorSet c = cvs_of({v2(0, 0), v2(1, 0)});
    TopologyGraph g({15, 0.9, 0.05}, 2);
    EXPECT_THROW(update_topology(v2(0, 0), c, g), ConfigError);
    EXPECT_THROW(update_topology(v2(0, 0), c, g, 1), ConfigError);
    EXPECT_NO_THROW(update_topology(v2(0, 0), c, g, 2));
}

TEST(UpdateTopology, MatchesReferenceOnShortStream) {
    Rng rng(3);
    CodingVectorSet c(3);
    for (int i = 0; i < 12; ++i) c.append(oracle::random_vec(3, rng));
    TopologyGraph g({4, 0.7, 0.1}, 12);
    oracle::ReferenceTopology ref(12, 4, 0.7, 0.1);
    for (int s = 0; s < 200; ++s) {
        const Vec z = oracle::random_vec(3, rng);
        update_topology(z, c, g);
        ref.update(to_std(z), oracle::to_dense(c));
        ASSERT_EQ(oracle::to_dense(g.strengths()), ref.strengths()) << "after sample " << s;
    }
}

TEST(TopologyGraph, SetStrengthValidates) {
    TopologyGraph g({}, 3);
    EXPECT_THROW(g.set_strength(1, 1, 0.5), ContractViolation);
    EXPECT_THROW(g.set_strength(0, 1, 1.5), ContractViolation);
    EXPECT_THROW(g.set_strength(0, 3, 0.5), ContractViolation);
}

TEST(ConfusingNeighbors, DirectLinksOnly) {
    const CodingVectorSet c = cvs_of({v2(0, 0), v2(1, 0), v2(2, 0)});
    TopologyGraph g({}, 3);
    g.set_strength(0, 1, 0.7);
    g.set_strength(0, 2, 0.2);
    g.set_strength(1, 2, 1.0);
    EXPECT_EQ(confusing_neighbors(0, g, c), (std::vector<ClassId>{1, 2}));
}

TEST(ConfusingNeighbors, IsolatedNodeHasNone) {
    const CodingVectorSet c = cvs_of({v2(0, 0), v2(1, 0)});
    TopologyGraph g({}, 2);
    EXPECT_TRUE(confusing_neighbors(0, g, c).empty());
}

TEST(ConfusingNeighbors, MatchesAdjacencyScan) {
    Rng rng(5);
    CodingVectorSet c(2);
    for (int i = 0; i < 20; ++i) c.append(oracle::random_vec(2, rng));
    const TopologyGraph g = oracle::random_graph(20, 0.3, rng);
    const Dense e = oracle::to_dense(g.strengths());
    for (ClassId y = 0; y < 20; ++y) {
        std::vector<ClassId> scan;
        for (ClassId j = 0; j < 20; ++j)
            if (e[y][j] != 0.0) scan.push_back(j);
        EXPECT_EQ(confusing_neighbors(y, g, c), scan);
    }
}

TEST(InsertClassCvs, GrowsVectorsAndGraph) {
    Rng rng(1);
    CodingVectorSet c(4);
    TopologyGraph g({}, 0);
    insert_class_cvs(c, g, std::vector<ClassId>{0, 1, 2}, rng);
    g.set_strength(0, 2, 0.5);
    const Mat before = g.strengths();
    insert_class_cvs(c, g, std::vector<ClassId>{3, 4}, rng);
    EXPECT_EQ(c.size(), 5u);
    EXPECT_EQ(g.size(), 5u);
    EXPECT_EQ(g.strengths().topLeftCorner(3, 3), before);
    EXPECT_EQ(g.strengths().bottomRows(2), Mat::Zero(2, 5));
    EXPECT_EQ(g.strengths().rightCols(2), Mat::Zero(5, 2));
}

TEST(InsertClassCvs, SameSeedSameVectors) {
    auto build = [] {
        Rng rng(42);
        CodingVectorSet c(4);
        TopologyGraph g;
        insert_class_cvs(c, g, std::vector<ClassId>{0, 1}, rng);
        return oracle::to_dense(c);
    };
    EXPECT_EQ(build(), build());
}

TEST(InsertClassCvs, RejectsDuplicatesAndGaps) {
    Rng rng(1);
    CodingVectorSet c(2);
    TopologyGraph g;
    EXPECT_THROW(insert_class_cvs(c, g, std::vector<ClassId>{0, 0}, rng), ContractViolation);
    EXPECT_THROW(insert_class_cvs(c, g, std::vector<ClassId>{1}, rng), ContractViolation);
    EXPECT_EQ(c.size(), 0u);
}

TEST(NeighborWeights, Symmetry) {
    const CodingVectorSet c = cvs_of({v2(1, 0), v2(-1, 0)});
    const auto w = neighbor_weights(v2(0, 0), std::vector<ClassId>{0, 1}, c, 1.0);
    EXPECT_DOUBLE_EQ(w[0], 0.5);
    EXPECT_DOUBLE_EQ(w[1], 0.5);
}

TEST(NeighborWeights, SingleNeighbor) {
    const CodingVectorSet c = cvs_of({v2(3, 0)});
    EXPECT_DOUBLE_EQ(neighbor_weights(v2(0, 0), std::vector<ClassId>{0}, c, 2.0)[0], 1.0);
}

TEST(NeighborWeights, DirectSubstitution) {
    const CodingVectorSet c = cvs_of({v2(1, 0), v2(0, 2)});
    const auto w = neighbor_weights(v2(0, 0), std::vector<ClassId>{0, 1}, c, std::numbers::ln2);
    EXPECT_NEAR(w[0], 2.0 / 3.0, 1e-9);
    EXPECT_NEAR(w[1], 1.0 / 3.0, 1e-9);
}

TEST(NeighborWeights, RejectsBadInputs) {
    const CodingVectorSet c = cvs_of({v2(1, 0)});
    EXPECT_THROW(neighbor_weights(v2(0, 0), {}, c, 1.0), ContractViolation);
    EXPECT_THROW(neighbor_weights(v2(0, 0), std::vector<ClassId>{0}, c, 0.0), ContractViolation);
}

TEST(LossNa, HingeInactiveAtOwnVector) {
    const CodingVectorSet c = cvs_of({v2(0, 0), v2(1, 0), v2(0, 1)});
    TopologyGraph g({}, 3);
    g.set_strength(0, 1, 1.0);
    g.set_strength(0, 2, 1.0);
    const auto r = loss_na(v2(0, 0), 0, c, g, 1.0);
    EXPECT_EQ(r.loss, 0.0);
    EXPECT_EQ(r.grad_z, Vec::Zero(2));
}

TEST(LossNa, NoNeighboursNoLoss) {
    const CodingVectorSet c = cvs_of({v2(5, 0), v2(1, 0)});
    const TopologyGraph g({}, 2);
    const auto r = loss_na(v2(0, 0), 0, c, g, 1.0);
    EXPECT_EQ(r.loss, 0.0);
    EXPECT_EQ(r.grad_z, Vec::Zero(2));
    EXPECT_TRUE(r.grad_cvs.empty());
}

TEST(LossNa, TwoDimExampleAndFiniteDifferences) {
    const CodingVectorSet c = cvs_of({v2(2, 0), v2(0, 1)});
    TopologyGraph g({}, 2);
    g.set_strength(0, 1, 1.0);
    const Vec z = v2(0, 0);
    const auto r = loss_na(z, 0, c, g, 1.0);
    EXPECT_NEAR(r.loss, 1.0, 1e-9);

    const Vec fz = oracle::fd_gradient([&](const Vec& p) { return loss_na(p, 0, c, g, 1.0).loss; }, z);
    EXPECT_LT(oracle::relative_error(r.grad_z, fz), 1e-4);
    Mat dense = Mat::Zero(2, 2);
    r.accumulate_cvs(dense);
    const Vec flat = oracle::flatten_cvs(c);
    const Vec fc = oracle::fd_gradient(
        [&](const Vec& p) { return loss_na(z, 0, oracle::with_cvs(c, p), g, 1.0).loss; }, flat);
    const Vec analytic = Eigen::Map<const Vec>(Mat(dense.transpose()).data(), 4);
    EXPECT_LT(oracle::relative_error(analytic, fc), 1e-4);
}

TEST(ClassPosterior, SingleCv) {
    const CodingVectorSet c = cvs_of({v2(3, 1)});
    EXPECT_DOUBLE_EQ(class_posterior(v2(0, 0), c, 0.1)[0], 1.0);
}

TEST(ClassPosterior, EquidistantIsUniform) {
    const CodingVectorSet c = cvs_of({v2(1, 0), v2(-1, 0)});
    for (double tau : {0.01, 0.1, 1.0, 10.0}) {
        const auto p = class_posterior(v2(0, 0), c, tau);
        EXPECT_NEAR(p[0], 0.5, 1e-12);
        EXPECT_NEAR(p[1], 0.5, 1e-12);
    }
}

TEST(ClassPosterior, DirectEvaluation) {
    const CodingVectorSet c = cvs_of({v2(1, 0), v2(0, 2)});
    const auto p = class_posterior(v2(0, 0), c, 1.0);
    const double e1 = std::exp(-1.0), e2 = std::exp(-2.0);
    EXPECT_NEAR(p[0], e1 / (e1 + e2), 1e-9);
    EXPECT_NEAR(p[1], e2 / (e1 + e2), 1e-9);
    EXPECT_NEAR(p[0], 0.7311, 1e-4);
}

TEST(ClassPosterior, RestrictedSetSumsToOne) {
    Rng rng(8);
    CodingVectorSet c(3);
    for (int i = 0; i < 6; ++i) c.append(oracle::random_vec(3, rng));
    const std::vector<ClassId> sub{1, 3, 4};
    const auto p = class_posterior(oracle::random_vec(3, rng), c, 0.2, sub);
    ASSERT_EQ(p.size(), 3u);
    EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-12);
    EXPECT_THROW(class_posterior(oracle::random_vec(3, rng), c, 0.0), ContractViolation);
}

TEST(LossDce, ConfidentCaseNearZero) {
    const CodingVectorSet c = cvs_of({v2(0, 0), v2(100, 0)});
    EXPECT_NEAR(loss_dce(v2(0, 0), 0, c, 0.1).loss, 0.0, 1e-12);
}

TEST(LossDce, EquidistantIsLn2) {
    const CodingVectorSet c = cvs_of({v2(1, 0), v2(-1, 0)});
    EXPECT_NEAR(loss_dce(v2(0, 0), 0, c, 0.1).loss, std::numbers::ln2, 1e-12);
}

TEST(LossDce, FiniteDifferencesOnRandomConfig) {
    Rng rng(21);
    CodingVectorSet c(4);
    for (int i = 0; i < 5; ++i) c.append(oracle::random_vec(4, rng));
    const Vec z = oracle::random_vec(4, rng);
    const auto r = loss_dce(z, 2, c, 0.5);
    const Vec fz = oracle::fd_gradient([&](const Vec& p) { return loss_dce(p, 2, c, 0.5).loss; }, z);
    EXPECT_LT(oracle::relative_error(r.grad_z, fz), 1e-4);

    Mat dense = Mat::Zero(5, 4);
    r.accumulate_cvs(dense);
    const Vec fc = oracle::fd_gradient(
        [&](const Vec& p) { return loss_dce(z, 2, oracle::with_cvs(c, p), 0.5).loss; }, oracle::flatten_cvs(c));
    const Vec analytic = Eigen::Map<const Vec>(Mat(dense.transpose()).data(), 20);
    EXPECT_LT(oracle::relative_error(analytic, fc), 1e-4);
}

TEST(LossDce, UnknownClassThrows) {
    const CodingVectorSet c = cvs_of({v2(1, 0)});
    EXPECT_THROW(loss_dce(v2(0, 0), 3, c, 0.1), ContractViolation);
}
