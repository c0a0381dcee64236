#include "zsh/graph.hpp"

#include "text_util.hpp"
#include "zsh/error.hpp"
#include "zsh/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <utility>
#include <vector>

namespace zsh {

std::optional<Affinity> parse_affinity(std::string_view name)
{
    if (name == "gaussian") return Affinity::gaussian;
    if (name == "exp-neg-dist") return Affinity::exp_neg_dist;
    return std::nullopt;
}

namespace {

double affinity_value(double squared_distance, double sigma, Affinity affinity)
{
    const double denom = 2.0 * sigma * sigma;
    switch (affinity) {
    case Affinity::exp_neg_dist:
        return std::exp(-std::sqrt(squared_distance) / denom);
    case Affinity::gaussian:
    default:
        return std::exp(-squared_distance / denom);
    }
}

} // namespace

SimilarityGraph build_similarity(const Matrix& X, Index k, double sigma, Affinity affinity)
{
    const Index n = X.cols();
    if (k < 1 || k >= n) {
        throw ValidationError("kNN graph requires 1 <= k < n (k=" + std::to_string(k) +
                              ", n=" + std::to_string(n) + ")");
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw ValidationError("graph sigma must be finite and > 0");
    }

    // neighbours[i] = k nearest of i, excluding i itself.
    std::vector<std::vector<Index>> neighbours(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
        std::vector<std::pair<double, Index>> dist(static_cast<std::size_t>(n - 1));
        for (auto i = static_cast<Index>(begin); i < static_cast<Index>(end); ++i) {
            std::size_t c = 0;
            for (Index j = 0; j < n; ++j) {
                if (j == i) continue;
                dist[c++] = {(X.col(j) - X.col(i)).squaredNorm(), j};
            }
            std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
            auto& out = neighbours[static_cast<std::size_t>(i)];
            out.resize(static_cast<std::size_t>(k));
            for (Index t = 0; t < k; ++t) out[static_cast<std::size_t>(t)] = dist[static_cast<std::size_t>(t)].second;
        }
    });

    std::vector<std::pair<Index, Index>> edges;
    edges.reserve(static_cast<std::size_t>(n * k));
    for (Index i = 0; i < n; ++i) {
        for (Index j : neighbours[static_cast<std::size_t>(i)]) {
            edges.emplace_back(std::min(i, j), std::max(i, j));
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(edges.size() * 2);
    for (const auto& [i, j] : edges) {
        const double s = affinity_value((X.col(i) - X.col(j)).squaredNorm(), sigma, affinity);
        triplets.emplace_back(i, j, s);
        triplets.emplace_back(j, i, s);
    }

    SimilarityGraph g;
    g.S.resize(n, n);
    g.S.setFromTriplets(triplets.begin(), triplets.end());
    g.S.makeCompressed();
    g.k = k;
    g.sigma = sigma;
    g.affinity = affinity;
    return g;
}

LaplacianMatrix laplacian(const SimilarityGraph& graph)
{
    const Index n = graph.n();
    LaplacianMatrix out;
    out.degree = Vector::Zero(n);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(graph.S.nonZeros() + n));
    for (Index col = 0; col < graph.S.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(graph.S, col); it; ++it) {
            out.degree(it.row()) += it.value();
            triplets.emplace_back(it.row(), it.col(), -it.value());
        }
    }
    for (Index i = 0; i < n; ++i) triplets.emplace_back(i, i, out.degree(i));
    out.L.resize(n, n);
    out.L.setFromTriplets(triplets.begin(), triplets.end());
    out.L.makeCompressed();
    return out;
}

void write_triplets(const SimilarityGraph& graph, std::ostream& out)
{
    for (Index col = 0; col < graph.S.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(graph.S, col); it; ++it) {
            out << it.row() << ' ' << it.col() << ' ' << detail::format_double(it.value()) << '\n';
        }
    }
}

} // namespace zsh
