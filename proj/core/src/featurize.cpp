#include "zsh/featurize.hpp"

#include "zsh/error.hpp"
#include "zsh/parallel.hpp"

#include <cmath>
#include <numeric>
#include <random>

namespace zsh {

void AnchorSet::validate() const
{
    if (m() < 1) throw ValidationError("anchor set is empty");
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw ValidationError("kernel bandwidth must be finite and > 0");
    }
    if (!anchors.allFinite()) throw ValidationError("anchor matrix has non-finite entries");
}

double bandwidth_heuristic(const Matrix& X, std::uint64_t seed, Index pairs)
{
    const Index n = X.cols();
    if (n < 2 || pairs < 1) return 1.0;
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_int_distribution<Index> pick(0, n - 1);
    double sum = 0.0;
    for (Index p = 0; p < pairs; ++p) {
        const Index i = pick(rng);
        Index j = pick(rng);
        while (j == i) j = pick(rng);
        sum += (X.col(i) - X.col(j)).squaredNorm();
    }
    const double mean = sum / static_cast<double>(pairs);
    return mean > 0.0 ? mean : 1.0;
}

AnchorSet sample_anchors(const Matrix& X, Index m, std::uint64_t seed, std::optional<double> delta)
{
    const Index n = X.cols();
    if (m < 1 || m > n) {
        throw ValidationError("anchor count must satisfy 1 <= m <= n (m=" + std::to_string(m) +
                              ", n=" + std::to_string(n) + ")");
    }

    // Partial Fisher-Yates: the first m slots end up a uniform sample.
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::mt19937_64 rng(seed);
    for (Index k = 0; k < m; ++k) {
        std::uniform_int_distribution<Index> pick(k, n - 1);
        std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(pick(rng))]);
    }

    AnchorSet a;
    a.seed = seed;
    a.anchors.resize(X.rows(), m);
    for (Index k = 0; k < m; ++k) a.anchors.col(k) = X.col(order[static_cast<std::size_t>(k)]);
    a.delta = delta ? *delta : bandwidth_heuristic(X, seed);
    a.validate();
    return a;
}

Vector kernel_map(const Eigen::Ref<const Vector>& x, const AnchorSet& anchors)
{
    if (x.size() != anchors.d()) {
        throw ValidationError("kernel_map: vector has dimension " + std::to_string(x.size()) +
                              ", anchors have " + std::to_string(anchors.d()));
    }
    Vector out(anchors.m());
    for (Index i = 0; i < anchors.m(); ++i) {
        out(i) = std::exp(-(x - anchors.anchors.col(i)).squaredNorm() / anchors.delta);
    }
    return out;
}

Matrix kernel_map_batch(const Matrix& X, const AnchorSet& anchors)
{
    if (X.rows() != anchors.d()) {
        throw ValidationError("kernel_map_batch: features have dimension " +
                              std::to_string(X.rows()) + ", anchors have " +
                              std::to_string(anchors.d()));
    }
    Matrix phi(anchors.m(), X.cols());
    parallel_for(static_cast<std::size_t>(X.cols()), [&](std::size_t begin, std::size_t end) {
        for (auto j = static_cast<Index>(begin); j < static_cast<Index>(end); ++j) {
            phi.col(j) = kernel_map(X.col(j), anchors);
        }
    });
    return phi;
}

} // namespace zsh
