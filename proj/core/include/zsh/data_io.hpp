#pragma once

#include "zsh/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace zsh {

// ---------------------------------------------------------------------------
// Feature matrices
// ---------------------------------------------------------------------------

/// d x n feature matrix; column j is the feature vector of item j.
class FeatureMatrix
{
public:
    FeatureMatrix() = default;

    /// Validates: n, d >= 1, finite values, one unique id per column.
    FeatureMatrix(Matrix values, std::vector<std::string> item_ids);

    Index n() const noexcept { return values_.cols(); }
    Index d() const noexcept { return values_.rows(); }
    const Matrix& values() const noexcept { return values_; }
    const std::vector<std::string>& item_ids() const noexcept { return ids_; }

    /// New matrix holding the given columns, in the given order.
    FeatureMatrix select(const std::vector<Index>& columns) const;

private:
    Matrix values_;
    std::vector<std::string> ids_;
};

enum class FeatureFormat { binary, csv };

/// ".csv" selects csv; anything else is the binary format.
FeatureFormat feature_format_for(const std::filesystem::path& path);

FeatureMatrix load_features(const std::filesystem::path& path, FeatureFormat format);
FeatureMatrix read_features_csv(std::istream& in);
FeatureMatrix read_features_binary(std::istream& in);

void save_features(const FeatureMatrix& features, const std::filesystem::path& path,
                   FeatureFormat format);
void write_features_csv(const FeatureMatrix& features, std::ostream& out);
void write_features_binary(const FeatureMatrix& features, std::ostream& out);

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

/// Per-item class assignment. Single-label lists hold exactly one tag per
/// item; multi-label lists (evaluation only) hold any number.
class LabelList
{
public:
    LabelList() = default;
    static LabelList single(std::vector<std::string> labels);
    static LabelList multi(std::vector<std::vector<std::string>> tags);

    std::size_t size() const noexcept { return tags_.size(); }
    bool is_multi_label() const noexcept { return multi_; }
    const std::vector<std::string>& tags(std::size_t item) const { return tags_.at(item); }
    /// Label of an item in single-label mode.
    const std::string& label(std::size_t item) const;

    LabelList select(const std::vector<Index>& items) const;

private:
    std::vector<std::vector<std::string>> tags_;
    bool multi_ = false;
};

/// One line per item. Single-label mode: the whole line (trimmed of the line
/// terminator) is the label. Multi-label mode: comma-separated tags, possibly
/// none.
LabelList load_labels(const std::filesystem::path& path, bool multi_label = false);
LabelList read_labels(std::istream& in, bool multi_label = false);
void save_labels(const LabelList& labels, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Label embeddings
// ---------------------------------------------------------------------------

/// Label string -> unit-norm e-dimensional vector. Matching is exact,
/// case-sensitive byte equality.
class LabelEmbeddingTable
{
public:
    LabelEmbeddingTable() = default;
    explicit LabelEmbeddingTable(Index dim) : dim_(dim) {}

    Index dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool contains(const std::string& label) const { return entries_.count(label) != 0; }
    const Vector& at(const std::string& label) const;
    const std::map<std::string, Vector>& entries() const noexcept { return entries_; }

    /// Inserts `vector / |vector|`. Throws on duplicates, zero vectors and
    /// dimension mismatch.
    void insert(const std::string& label, const Vector& vector);

private:
    Index dim_ = 0;
    std::map<std::string, Vector> entries_;
};

/// word2vec text format: header `vocab_count dim`, then `token v1 ... ve`.
LabelEmbeddingTable load_embeddings(const std::filesystem::path& path);
LabelEmbeddingTable read_embeddings(std::istream& in);
/// Writes with 17 significant digits, in label order.
void save_embeddings(const LabelEmbeddingTable& table, const std::filesystem::path& path);

/// e x n supervision matrix: column j is the embedding of item j's label.
Matrix assemble_Y(const LabelList& labels, const LabelEmbeddingTable& table);

double cosine_similarity(const Vector& a, const Vector& b);

// ---------------------------------------------------------------------------
// Seen / unseen splits and related pairs
// ---------------------------------------------------------------------------

struct SplitSpec
{
    std::set<std::string> seen;
    std::set<std::string> unseen;

    /// Throws ProtocolError when the two sets intersect.
    void validate() const;
};

/// `[seen]` and `[unseen]` section headers, one label per line. Blank lines
/// and lines starting with '#' are ignored.
SplitSpec load_split(const std::filesystem::path& path);
SplitSpec read_split(std::istream& in);
void save_split(const SplitSpec& split, const std::filesystem::path& path);

/// Unordered "related" label pairs; stored with the smaller label first.
class RelatedPairs
{
public:
    void add(const std::string& a, const std::string& b);
    bool related(const std::string& a, const std::string& b) const;
    /// True when the label occurs in at least one pair.
    bool mentions(const std::string& label) const { return labels_.count(label) != 0; }
    std::size_t size() const noexcept { return pairs_.size(); }

private:
    std::set<std::pair<std::string, std::string>> pairs_;
    std::set<std::string> labels_;
};

/// `labelA<TAB>labelB` per line.
RelatedPairs load_related_pairs(const std::filesystem::path& path);
RelatedPairs read_related_pairs(std::istream& in);

} // namespace zsh
