#include "zsh/codes.hpp"
#include "zsh/data_io.hpp"
#include "zsh/evalkit.hpp"
#include "zsh/featurize.hpp"
#include "zsh/graph.hpp"
#include "zsh/synthetic.hpp"
#include "zsh/train.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

using namespace zsh;

namespace {

struct Problem
{
    Matrix X;
    Matrix Y;
};

Problem make_problem(Index n)
{
    const Index classes = 8;
    const Index e = 8;
    LabelEmbeddingTable table(e);
    std::vector<std::string> names;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (Index c = 0; c < classes; ++c) {
        Vector v(e);
        for (Index k = 0; k < e; ++k) v(k) = g(rng);
        names.push_back("c" + std::to_string(c));
        table.insert(names.back(), v);
    }
    SemanticClusterSpec spec;
    spec.per_class = n / classes;
    spec.seed = 3;
    const auto data = make_semantic_clusters(names, table, spec);
    return {data.features.values(), assemble_Y(data.labels, table)};
}

void BM_TrainIteration(benchmark::State& state)
{
    const auto p = make_problem(state.range(0));
    const auto anchors = sample_anchors(p.X, 256, 1);
    const Matrix phi = kernel_map_batch(p.X, anchors);
    const SparseMatrix L = laplacian(build_similarity(p.X, 5, 1.0)).L;
    Hyperparameters h;
    h.code_length = 32;
    h.max_iters = 1;
    h.tol = 0.0;
    for (auto _ : state) benchmark::DoNotOptimize(train_on_features(phi, p.Y, L, anchors, h));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TrainIteration)->Arg(1000)->Arg(2000)->Arg(4000)->Unit(benchmark::kMillisecond)->Complexity();

BinaryCode random_code(Index bits, std::mt19937_64& rng)
{
    std::vector<std::uint64_t> words(static_cast<std::size_t>(words_for_bits(bits)));
    for (auto& w : words) w = rng();
    if (bits % 64 != 0) words.back() &= (std::uint64_t{1} << (bits % 64)) - 1;
    return BinaryCode::from_words(bits, std::move(words));
}

void BM_Hamming(benchmark::State& state)
{
    std::mt19937_64 rng(5);
    const auto a = random_code(state.range(0), rng);
    const auto b = random_code(state.range(0), rng);
    for (auto _ : state) benchmark::DoNotOptimize(hamming(a, b));
}
BENCHMARK(BM_Hamming)->Arg(32)->Arg(64)->Arg(128)->Arg(256);

void BM_SearchTopK(benchmark::State& state)
{
    std::mt19937_64 rng(7);
    const Index n = state.range(0);
    std::vector<BinaryCode> codes;
    std::vector<std::string> ids;
    for (Index i = 0; i < n; ++i) {
        codes.push_back(random_code(32, rng));
        ids.push_back(std::to_string(i));
    }
    const CodeDatabase db(codes, ids);
    const auto q = random_code(32, rng);
    for (auto _ : state) benchmark::DoNotOptimize(search_topk(q, db, 100));
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SearchTopK)->Arg(10000)->Arg(100000);

}

BENCHMARK_MAIN();
