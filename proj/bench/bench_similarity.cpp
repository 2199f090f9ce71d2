#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "panda/similarity_kernels.hpp"

namespace {

struct Data {
    std::vector<double> matrix, norms, query, out;
};

Data make(std::size_t rows, std::size_t dim) {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> nd;
    Data d;
    d.matrix.resize(rows * dim);
    d.norms.resize(rows);
    d.query.resize(dim);
    d.out.resize(rows);
    for (auto& v : d.matrix) v = nd(rng);
    for (auto& v : d.query) v = nd(rng);
    for (std::size_t r = 0; r < rows; ++r) {
        double s = 0;
        for (std::size_t c = 0; c < dim; ++c) s += d.matrix[r * dim + c] * d.matrix[r * dim + c];
        d.norms[r] = std::sqrt(s);
    }
    return d;
}

void BM_Serial(benchmark::State& state) {
    auto d = make(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
    for (auto _ : state) {
        panda::retrieval::kernels::cosine_scores_serial(d.matrix, d.norms, d.query, d.out);
        benchmark::DoNotOptimize(d.out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_OpenMP(benchmark::State& state) {
    auto d = make(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
    for (auto _ : state) {
        panda::retrieval::kernels::cosine_scores_omp(d.matrix, d.norms, d.query, d.out);
        benchmark::DoNotOptimize(d.out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_Serial)->Args({1000, 384})->Args({10000, 384})->Args({100000, 128});
BENCHMARK(BM_OpenMP)->Args({1000, 384})->Args({10000, 384})->Args({100000, 128});

BENCHMARK_MAIN();
