#pragma once

#include "zsh/types.hpp"

#include <iosfwd>
#include <optional>
#include <string_view>

namespace zsh {

enum class Affinity {
    gaussian,      // exp(-|xi - xj|^2 / (2 sigma^2))
    exp_neg_dist,  // exp(-|xi - xj| / (2 sigma^2))
};

std::optional<Affinity> parse_affinity(std::string_view name);

/// Symmetric kNN affinity graph with zero diagonal.
struct SimilarityGraph
{
    SparseMatrix S;
    Index k = 0;
    double sigma = 1.0;
    Affinity affinity = Affinity::gaussian;

    Index n() const noexcept { return S.rows(); }
};

/// S_ij > 0 iff i is among the k nearest neighbours of j or j among those of
/// i. Exact brute-force search; distance ties go to the smaller index.
SimilarityGraph build_similarity(const Matrix& X, Index k, double sigma,
                                 Affinity affinity = Affinity::gaussian);

struct LaplacianMatrix
{
    SparseMatrix L;  // D - S
    Vector degree;   // D_ii = sum_j S_ij
};

LaplacianMatrix laplacian(const SimilarityGraph& graph);

/// `i j s_ij` per stored entry (0-based indices, both triangles).
void write_triplets(const SimilarityGraph& graph, std::ostream& out);

} // namespace zsh
