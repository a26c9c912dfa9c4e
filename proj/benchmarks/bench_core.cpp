#include "napavq/model/feature_model.hpp"
#include "napavq/vq/losses.hpp"
#include "napavq/vq/topology.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

using namespace napavq;

namespace {

vq::CodingVectorSet make_cvs(int n, int dim, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    vq::CodingVectorSet cvs(dim);
    for (int i = 0; i < n; ++i) {
        Vec v(dim);
        for (int d = 0; d < dim; ++d) v[d] = g(rng);
        cvs.append(v);
    }
    return cvs;
}

Vec random_vec(int dim, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vec v(dim);
    for (int d = 0; d < dim; ++d) v[d] = g(rng);
    return v;
}

void BM_RankCodingVectors(benchmark::State& state) {
    Rng rng(1);
    const auto cvs = make_cvs(static_cast<int>(state.range(0)), 16, rng);
    const Vec z = random_vec(16, rng);
    for (auto _ : state) benchmark::DoNotOptimize(vq::rank_coding_vectors(z, cvs));
}
BENCHMARK(BM_RankCodingVectors)->Arg(10)->Arg(100)->Arg(1000);

void BM_UpdateTopology(benchmark::State& state) {
    Rng rng(2);
    const int n = 100;
    const auto cvs = make_cvs(n, 16, rng);
    vq::TopologyGraph graph({}, n);
    std::vector<Vec> zs;
    for (int i = 0; i < 64; ++i) zs.push_back(random_vec(16, rng));
    std::size_t i = 0;
    const int k = static_cast<int>(state.range(0));
    for (auto _ : state) {
        vq::update_topology(zs[i++ % zs.size()], cvs, graph, k);
        benchmark::ClobberMemory();
    }
}
BENCHMARK(BM_UpdateTopology)->Arg(2)->Arg(15)->Arg(50);

void BM_LossDce(benchmark::State& state) {
    Rng rng(3);
    const auto cvs = make_cvs(static_cast<int>(state.range(0)), 16, rng);
    const Vec z = random_vec(16, rng);
    for (auto _ : state) benchmark::DoNotOptimize(vq::loss_dce(z, 0, cvs, 1.0));
}
BENCHMARK(BM_LossDce)->Arg(10)->Arg(100);

void BM_LossNa(benchmark::State& state) {
    Rng rng(4);
    const int n = static_cast<int>(state.range(0));
    const auto cvs = make_cvs(n, 16, rng);
    vq::TopologyGraph graph({}, static_cast<std::size_t>(n));
    for (int i = 0; i < 200; ++i) vq::update_topology(random_vec(16, rng), cvs, graph, 5);
    const Vec z = random_vec(16, rng);
    for (auto _ : state) benchmark::DoNotOptimize(vq::loss_na(z, 0, cvs, graph, 1.0));
}
BENCHMARK(BM_LossNa)->Arg(10)->Arg(100);

void BM_ForwardBackward(benchmark::State& state) {
    Rng rng(5);
    const std::vector<int> hidden{64, 64};
    const auto model = model::FeatureModel::mlp(32, hidden, 16, rng);
    const Vec x = random_vec(32, rng);
    const Vec up = random_vec(16, rng);
    auto grads = model.zero_grad();
    for (auto _ : state) {
        const auto cache = model.forward_cached(x);
        benchmark::DoNotOptimize(model.backward(up, cache, grads));
    }
}
BENCHMARK(BM_ForwardBackward);

}  // namespace

BENCHMARK_MAIN();
