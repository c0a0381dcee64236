#include "zsh/synthetic.hpp"

#include "rng.hpp"
#include "zsh/error.hpp"

#include <cmath>

namespace zsh {

SyntheticDataset make_semantic_clusters(const std::vector<std::string>& classes,
                                        const LabelEmbeddingTable& embeddings,
                                        const SemanticClusterSpec& spec)
{
    if (classes.empty() || spec.per_class < 1 || spec.d < 1) {
        throw ValidationError("synthetic clusters need classes, per_class >= 1 and d >= 1");
    }
    detail::Rng rng(detail::derive_seed(spec.seed, 7));
    const Index e = embeddings.dim();
    const Matrix A = rng.normal(spec.d, e) * (spec.center_scale / std::sqrt(static_cast<double>(e)));

    const auto n = static_cast<Index>(classes.size()) * spec.per_class;
    Matrix X(spec.d, n);
    std::vector<std::string> ids;
    std::vector<std::string> labels;
    ids.reserve(static_cast<std::size_t>(n));
    labels.reserve(static_cast<std::size_t>(n));
    Index col = 0;
    for (const auto& c : classes) {
        const Vector center = A * embeddings.at(c);
        for (Index k = 0; k < spec.per_class; ++k, ++col) {
            X.col(col) = center + spec.noise * rng.normal(spec.d, 1);
            ids.push_back(c + "_" + std::to_string(k));
            labels.push_back(c);
        }
    }
    return {FeatureMatrix(std::move(X), std::move(ids)), LabelList::single(std::move(labels))};
}

} // namespace zsh
