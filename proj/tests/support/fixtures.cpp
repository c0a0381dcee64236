#include "fixtures.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace zsh::testing {

TempDir::TempDir()
{
    static std::random_device rd;
    const auto base = std::filesystem::temp_directory_path();
    for (int attempt = 0; attempt < 100; ++attempt) {
        auto candidate = base / ("zsh-test-" + std::to_string(rd()));
        if (std::filesystem::create_directory(candidate)) {
            path_ = candidate;
            return;
        }
    }
    throw std::runtime_error("cannot create temporary directory");
}

TempDir::~TempDir()
{
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal;
    Matrix M(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) M(i, j) = normal(rng);
    return M;
}

Matrix random_signs(Index rows, Index cols, std::mt19937_64& rng)
{
    std::bernoulli_distribution coin;
    Matrix M(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) M(i, j) = coin(rng) ? 1.0 : -1.0;
    return M;
}

SparseMatrix random_affinity(Index n, double density, std::mt19937_64& rng)
{
    std::bernoulli_distribution edge(density);
    std::uniform_real_distribution<double> weight(0.05, 1.0);
    std::vector<Eigen::Triplet<double>> t;
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            if (!edge(rng)) continue;
            const double w = weight(rng);
            t.emplace_back(i, j, w);
            t.emplace_back(j, i, w);
        }
    }
    SparseMatrix S(n, n);
    S.setFromTriplets(t.begin(), t.end());
    return S;
}

LabelEmbeddingTable random_embeddings(const std::vector<std::string>& classes, Index e,
                                      std::mt19937_64& rng)
{
    LabelEmbeddingTable table(e);
    for (const auto& c : classes) table.insert(c, gaussian(e, 1, rng).col(0));
    return table;
}

Instance clustered_instance(Index classes, Index per_class, Index d, Index e, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<std::string> names;
    for (Index c = 0; c < classes; ++c) names.push_back("c" + std::to_string(c));
    Instance inst;
    inst.table = random_embeddings(names, e, rng);
    SemanticClusterSpec spec;
    spec.per_class = per_class;
    spec.d = d;
    spec.seed = seed + 1;
    inst.data = make_semantic_clusters(names, inst.table, spec);
    inst.Y = assemble_Y(inst.data.labels, inst.table);
    return inst;
}

DatasetFiles write_dataset(const TempDir& dir, const Instance& inst,
                           const std::vector<std::string>& classes, std::size_t unseen)
{
    DatasetFiles f;
    f.features = dir.file("features.csv");
    f.labels = dir.file("labels.txt");
    f.embeddings = dir.file("embeddings.txt");
    f.split = dir.file("split.txt");
    f.seen_features = dir.file("seen_features.csv");
    f.seen_labels = dir.file("seen_labels.txt");
    save_features(inst.data.features, f.features, FeatureFormat::csv);
    save_labels(inst.data.labels, f.labels);
    save_embeddings(inst.table, f.embeddings);

    SplitSpec split;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        (c + unseen < classes.size() ? split.seen : split.unseen).insert(classes[c]);
    }
    save_split(split, f.split);

    std::vector<Index> seen_items;
    for (std::size_t i = 0; i < inst.data.labels.size(); ++i) {
        if (split.seen.count(inst.data.labels.label(i))) seen_items.push_back(static_cast<Index>(i));
    }
    save_features(inst.data.features.select(seen_items), f.seen_features, FeatureFormat::csv);
    save_labels(inst.data.labels.select(seen_items), f.seen_labels);
    return f;
}

} // namespace zsh::testing
