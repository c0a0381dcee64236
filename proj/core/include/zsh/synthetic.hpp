#pragma once

#include "zsh/data_io.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace zsh {

/// Gaussian clusters whose centres are a fixed random linear image of the
/// class embeddings, so categories that are close in embedding space are
/// close in feature space as well.
struct SemanticClusterSpec
{
    Index per_class = 50;
    Index d = 16;
    double center_scale = 4.0;  // spread of the embedding -> feature map
    double noise = 0.5;         // per-coordinate standard deviation
    std::uint64_t seed = 0;
};

struct SyntheticDataset
{
    FeatureMatrix features;
    LabelList labels;
};

/// Items are grouped by class in the order of `classes`; ids are
/// "<class>_<k>".
SyntheticDataset make_semantic_clusters(const std::vector<std::string>& classes,
                                        const LabelEmbeddingTable& embeddings,
                                        const SemanticClusterSpec& spec);

} // namespace zsh
