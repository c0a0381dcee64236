#pragma once

#include "zsh/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace zsh {

/// m anchors (d x m, columns taken from the training matrix) and the RBF
/// bandwidth delta.
struct AnchorSet
{
    Matrix anchors;
    double delta = 1.0;
    std::uint64_t seed = 0;

    Index m() const noexcept { return anchors.cols(); }
    Index d() const noexcept { return anchors.rows(); }

    void validate() const;
};

/// Mean squared Euclidean distance over `pairs` seeded random pairs of
/// distinct columns. Falls back to 1 when it is zero (all sampled pairs
/// coincide) or when X has a single column.
double bandwidth_heuristic(const Matrix& X, std::uint64_t seed, Index pairs = 1000);

/// m distinct columns of X drawn uniformly without replacement. The
/// bandwidth comes from `bandwidth_heuristic` unless `delta` is given.
AnchorSet sample_anchors(const Matrix& X, Index m, std::uint64_t seed,
                         std::optional<double> delta = std::nullopt);

/// phi(x)_i = exp(-|x - a_i|^2 / delta).
Vector kernel_map(const Eigen::Ref<const Vector>& x, const AnchorSet& anchors);

/// m x n matrix whose column j is kernel_map(X.col(j)). Columns are mapped
/// independently, so the result is identical to per-column calls.
Matrix kernel_map_batch(const Matrix& X, const AnchorSet& anchors);

} // namespace zsh
