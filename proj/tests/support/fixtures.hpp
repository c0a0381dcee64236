#pragma once

#include "zsh/data_io.hpp"
#include "zsh/graph.hpp"
#include "zsh/model.hpp"
#include "zsh/synthetic.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace zsh::testing {

class TempDir
{
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng);
Matrix random_signs(Index rows, Index cols, std::mt19937_64& rng);

/// Symmetric non-negative affinity with zero diagonal; each pair is an edge
/// with probability `density`.
SparseMatrix random_affinity(Index n, double density, std::mt19937_64& rng);

/// One unit embedding per class in general position.
LabelEmbeddingTable random_embeddings(const std::vector<std::string>& classes, Index e,
                                      std::mt19937_64& rng);

/// A small training problem: clustered features and label embeddings.
struct Instance
{
    LabelEmbeddingTable table;
    SyntheticDataset data;
    Matrix Y;
};

Instance clustered_instance(Index classes, Index per_class, Index d, Index e, std::uint64_t seed);

/// Writes features.csv, labels.txt, embeddings.txt and split.txt for a
/// dataset whose last `unseen` classes are held out.
struct DatasetFiles
{
    std::string features;
    std::string labels;
    std::string embeddings;
    std::string split;
    std::string seen_features;
    std::string seen_labels;
};

DatasetFiles write_dataset(const TempDir& dir, const Instance& inst,
                           const std::vector<std::string>& classes, std::size_t unseen);

} // namespace zsh::testing
