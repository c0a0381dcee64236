#include "zsh/data_io.hpp"

#include "binary_io.hpp"
#include "text_util.hpp"
#include "zsh/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace zsh {
namespace {

constexpr std::string_view kFeatureMagic = "ZSHF";
constexpr std::uint32_t kFeatureVersion = 1;

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = {})
{
    std::ifstream in(path, std::ios::in | mode);
    if (!in) {
        throw LoadError(LoadError::Reason::open_failed, 0,
                        "cannot open " + path.string() + " for reading");
    }
    return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = {})
{
    std::ofstream out(path, std::ios::out | std::ios::trunc | mode);
    if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
    return out;
}

void check_written(const std::ostream& out, const std::filesystem::path& path)
{
    if (!out) throw ValidationError("failed writing " + path.string());
}

} // namespace

// ---------------------------------------------------------------------------
// FeatureMatrix
// ---------------------------------------------------------------------------

FeatureMatrix::FeatureMatrix(Matrix values, std::vector<std::string> item_ids)
    : values_(std::move(values)), ids_(std::move(item_ids))
{
    if (values_.cols() < 1 || values_.rows() < 1) {
        throw ValidationError("feature matrix must have n >= 1 and d >= 1");
    }
    if (static_cast<Index>(ids_.size()) != values_.cols()) {
        throw ValidationError("feature matrix has " + std::to_string(values_.cols()) +
                              " columns but " + std::to_string(ids_.size()) + " item ids");
    }
    for (Index j = 0; j < values_.cols(); ++j) {
        if (!values_.col(j).allFinite()) {
            throw LoadError(LoadError::Reason::non_finite, static_cast<std::size_t>(j + 1),
                            "non-finite feature value in item " + ids_[j]);
        }
    }
    std::unordered_set<std::string> seen;
    for (std::size_t j = 0; j < ids_.size(); ++j) {
        if (!seen.insert(ids_[j]).second) {
            throw LoadError(LoadError::Reason::duplicate, j + 1,
                            "duplicate item id '" + ids_[j] + "' at row " + std::to_string(j + 1));
        }
    }
}

FeatureMatrix FeatureMatrix::select(const std::vector<Index>& columns) const
{
    Matrix v(d(), static_cast<Index>(columns.size()));
    std::vector<std::string> ids;
    ids.reserve(columns.size());
    for (std::size_t k = 0; k < columns.size(); ++k) {
        v.col(static_cast<Index>(k)) = values_.col(columns[k]);
        ids.push_back(ids_.at(static_cast<std::size_t>(columns[k])));
    }
    return FeatureMatrix(std::move(v), std::move(ids));
}

FeatureFormat feature_format_for(const std::filesystem::path& path)
{
    return path.extension() == ".csv" ? FeatureFormat::csv : FeatureFormat::binary;
}

FeatureMatrix read_features_csv(std::istream& in)
{
    std::vector<std::string> ids;
    std::vector<double> values;
    Index d = -1;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        detail::strip_cr(line);
        if (line.empty()) continue;
        const auto fields = detail::split(line, ',');
        if (fields.size() < 2) {
            throw LoadError(LoadError::Reason::parse, row,
                            "row " + std::to_string(row) + ": expected id followed by values");
        }
        const auto width = static_cast<Index>(fields.size() - 1);
        if (d < 0) {
            d = width;
        } else if (width != d) {
            throw LoadError(LoadError::Reason::dimension_mismatch, row,
                            "row " + std::to_string(row) + ": expected " + std::to_string(d) +
                                " values, found " + std::to_string(width));
        }
        ids.emplace_back(fields[0]);
        for (std::size_t k = 1; k < fields.size(); ++k) {
            const auto v = detail::parse_double(fields[k]);
            if (!v) {
                throw LoadError(LoadError::Reason::parse, row,
                                "row " + std::to_string(row) + ": cannot parse '" +
                                    std::string(fields[k]) + "' as a number");
            }
            if (!std::isfinite(*v)) {
                throw LoadError(LoadError::Reason::non_finite, row,
                                "row " + std::to_string(row) + ": non-finite value");
            }
            values.push_back(*v);
        }
    }
    if (ids.empty()) throw LoadError(LoadError::Reason::empty, 0, "feature file is empty");

    const auto n = static_cast<Index>(ids.size());
    Matrix m = Eigen::Map<const Matrix>(values.data(), d, n);
    return FeatureMatrix(std::move(m), std::move(ids));
}

FeatureMatrix read_features_binary(std::istream& in)
{
    detail::LeReader r(in, "feature file");
    r.expect_magic(kFeatureMagic);
    const auto version = r.u32();
    if (version != kFeatureVersion) {
        throw LoadError(LoadError::Reason::version, 0,
                        "feature file: unsupported version " + std::to_string(version));
    }
    const auto n = r.u64();
    const auto d = r.u64();
    if (n == 0 || d == 0) throw LoadError(LoadError::Reason::empty, 0, "feature file is empty");
    Matrix m(static_cast<Index>(d), static_cast<Index>(n));
    for (std::uint64_t j = 0; j < n; ++j) {
        for (std::uint64_t i = 0; i < d; ++i) {
            const float v = r.f32();
            if (!std::isfinite(v)) {
                throw LoadError(LoadError::Reason::non_finite, j + 1,
                                "feature file: non-finite value in item " + std::to_string(j + 1));
            }
            m(static_cast<Index>(i), static_cast<Index>(j)) = v;
        }
    }
    std::vector<std::string> ids;
    ids.reserve(n);
    for (std::uint64_t j = 0; j < n; ++j) ids.push_back(r.line());
    return FeatureMatrix(std::move(m), std::move(ids));
}

FeatureMatrix load_features(const std::filesystem::path& path, FeatureFormat format)
{
    if (format == FeatureFormat::csv) {
        auto in = open_in(path);
        return read_features_csv(in);
    }
    auto in = open_in(path, std::ios::binary);
    return read_features_binary(in);
}

void write_features_csv(const FeatureMatrix& features, std::ostream& out)
{
    const Matrix& v = features.values();
    for (Index j = 0; j < features.n(); ++j) {
        out << features.item_ids()[static_cast<std::size_t>(j)];
        for (Index i = 0; i < features.d(); ++i) out << ',' << detail::format_double(v(i, j));
        out << '\n';
    }
}

void write_features_binary(const FeatureMatrix& features, std::ostream& out)
{
    detail::LeWriter w(out);
    w.magic(kFeatureMagic);
    w.u32(kFeatureVersion);
    w.u64(static_cast<std::uint64_t>(features.n()));
    w.u64(static_cast<std::uint64_t>(features.d()));
    const Matrix& v = features.values();
    for (Index j = 0; j < features.n(); ++j) {
        for (Index i = 0; i < features.d(); ++i) w.f32(static_cast<float>(v(i, j)));
    }
    for (const auto& id : features.item_ids()) w.line(id);
}

void save_features(const FeatureMatrix& features, const std::filesystem::path& path,
                   FeatureFormat format)
{
    if (format == FeatureFormat::csv) {
        auto out = open_out(path);
        write_features_csv(features, out);
        check_written(out, path);
    } else {
        auto out = open_out(path, std::ios::binary);
        write_features_binary(features, out);
        check_written(out, path);
    }
}

// ---------------------------------------------------------------------------
// LabelList
// ---------------------------------------------------------------------------

LabelList LabelList::single(std::vector<std::string> labels)
{
    LabelList out;
    out.tags_.reserve(labels.size());
    for (auto& l : labels) out.tags_.push_back({std::move(l)});
    return out;
}

LabelList LabelList::multi(std::vector<std::vector<std::string>> tags)
{
    LabelList out;
    out.tags_ = std::move(tags);
    out.multi_ = true;
    return out;
}

const std::string& LabelList::label(std::size_t item) const
{
    const auto& t = tags_.at(item);
    if (t.size() != 1) {
        throw ValidationError("item " + std::to_string(item + 1) +
                              " does not carry exactly one label");
    }
    return t.front();
}

LabelList LabelList::select(const std::vector<Index>& items) const
{
    LabelList out;
    out.multi_ = multi_;
    out.tags_.reserve(items.size());
    for (auto i : items) out.tags_.push_back(tags_.at(static_cast<std::size_t>(i)));
    return out;
}

LabelList read_labels(std::istream& in, bool multi_label)
{
    std::vector<std::vector<std::string>> tags;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        detail::strip_cr(line);
        if (multi_label) {
            std::vector<std::string> t;
            for (auto f : detail::split(line, ',')) {
                if (!f.empty()) t.emplace_back(f);
            }
            tags.push_back(std::move(t));
        } else {
            if (line.empty()) {
                throw LoadError(LoadError::Reason::parse, row,
                                "labels row " + std::to_string(row) + ": empty label");
            }
            tags.push_back({line});
        }
    }
    if (tags.empty()) throw LoadError(LoadError::Reason::empty, 0, "label file is empty");
    if (multi_label) return LabelList::multi(std::move(tags));
    std::vector<std::string> flat;
    flat.reserve(tags.size());
    for (auto& t : tags) flat.push_back(std::move(t.front()));
    return LabelList::single(std::move(flat));
}

LabelList load_labels(const std::filesystem::path& path, bool multi_label)
{
    auto in = open_in(path);
    return read_labels(in, multi_label);
}

void save_labels(const LabelList& labels, const std::filesystem::path& path)
{
    auto out = open_out(path);
    for (std::size_t j = 0; j < labels.size(); ++j) {
        const auto& t = labels.tags(j);
        for (std::size_t k = 0; k < t.size(); ++k) {
            if (k) out << ',';
            out << t[k];
        }
        out << '\n';
    }
    check_written(out, path);
}

// ---------------------------------------------------------------------------
// LabelEmbeddingTable
// ---------------------------------------------------------------------------

const Vector& LabelEmbeddingTable::at(const std::string& label) const
{
    auto it = entries_.find(label);
    if (it == entries_.end()) throw ValidationError("label '" + label + "' has no embedding");
    return it->second;
}

void LabelEmbeddingTable::insert(const std::string& label, const Vector& vector)
{
    if (dim_ == 0) dim_ = vector.size();
    if (vector.size() != dim_) {
        throw LoadError(LoadError::Reason::dimension_mismatch, 0,
                        "embedding for '" + label + "' has dimension " +
                            std::to_string(vector.size()) + ", expected " + std::to_string(dim_));
    }
    if (!vector.allFinite()) {
        throw LoadError(LoadError::Reason::non_finite, 0,
                        "embedding for '" + label + "' has non-finite entries");
    }
    const double norm = vector.norm();
    if (norm == 0.0) {
        throw LoadError(LoadError::Reason::zero_vector, 0,
                        "embedding for '" + label + "' is the zero vector");
    }
    if (entries_.count(label)) {
        throw LoadError(LoadError::Reason::duplicate, 0, "duplicate embedding token '" + label + "'");
    }
    entries_.emplace(label, vector / norm);
}

LabelEmbeddingTable read_embeddings(std::istream& in)
{
    std::string line;
    std::size_t row = 0;
    std::size_t vocab = 0;
    Index dim = 0;
    while (std::getline(in, line)) {
        ++row;
        detail::strip_cr(line);
        const auto f = detail::split_ws(line);
        if (f.empty()) continue;
        const auto a = f.size() == 2 ? detail::parse_size(f[0]) : std::nullopt;
        const auto b = f.size() == 2 ? detail::parse_size(f[1]) : std::nullopt;
        if (!a || !b || *b == 0) {
            throw LoadError(LoadError::Reason::bad_header, row,
                            "embedding file: expected header 'vocab_count dim'");
        }
        vocab = *a;
        dim = static_cast<Index>(*b);
        break;
    }
    if (row == 0 || dim == 0) throw LoadError(LoadError::Reason::empty, 0, "embedding file is empty");

    LabelEmbeddingTable table(dim);
    while (table.size() < vocab && std::getline(in, line)) {
        ++row;
        detail::strip_cr(line);
        const auto f = detail::split_ws(line);
        if (f.empty()) continue;
        const auto width = static_cast<Index>(f.size()) - 1;
        if (width != dim) {
            throw LoadError(LoadError::Reason::dimension_mismatch, row,
                            "embedding row " + std::to_string(row) + ": ragged dimension " +
                                std::to_string(width) + ", expected " + std::to_string(dim));
        }
        Vector v(dim);
        for (Index k = 0; k < dim; ++k) {
            const auto x = detail::parse_double(f[static_cast<std::size_t>(k) + 1]);
            if (!x) {
                throw LoadError(LoadError::Reason::parse, row,
                                "embedding row " + std::to_string(row) + ": bad number");
            }
            v(k) = *x;
        }
        try {
            table.insert(std::string(f[0]), v);
        } catch (const LoadError& e) {
            throw LoadError(e.reason(), row,
                            "embedding row " + std::to_string(row) + ": " + e.what());
        }
    }
    if (table.size() < vocab) {
        throw LoadError(LoadError::Reason::truncated, row,
                        "embedding file declares " + std::to_string(vocab) + " entries, found " +
                            std::to_string(table.size()));
    }
    return table;
}

LabelEmbeddingTable load_embeddings(const std::filesystem::path& path)
{
    auto in = open_in(path);
    return read_embeddings(in);
}

void save_embeddings(const LabelEmbeddingTable& table, const std::filesystem::path& path)
{
    auto out = open_out(path);
    out << table.size() << ' ' << table.dim() << '\n';
    for (const auto& [label, v] : table.entries()) {
        out << label;
        for (Index k = 0; k < v.size(); ++k) out << ' ' << detail::format_double(v(k));
        out << '\n';
    }
    check_written(out, path);
}

Matrix assemble_Y(const LabelList& labels, const LabelEmbeddingTable& table)
{
    if (labels.is_multi_label()) {
        throw ValidationError("training supervision requires single-label items");
    }
    std::set<std::string> missing;
    for (std::size_t j = 0; j < labels.size(); ++j) {
        if (!table.contains(labels.label(j))) missing.insert(labels.label(j));
    }
    if (!missing.empty()) {
        std::string names;
        for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
        throw ValidationError("labels missing from embedding table: " + names);
    }
    Matrix Y(table.dim(), static_cast<Index>(labels.size()));
    for (std::size_t j = 0; j < labels.size(); ++j) {
        Y.col(static_cast<Index>(j)) = table.at(labels.label(j));
    }
    return Y;
}

double cosine_similarity(const Vector& a, const Vector& b)
{
    if (a.size() != b.size()) throw ValidationError("cosine_similarity: dimension mismatch");
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw ValidationError("cosine_similarity: zero vector");
    return a.dot(b) / (na * nb);
}

// ---------------------------------------------------------------------------
// SplitSpec / RelatedPairs
// ---------------------------------------------------------------------------

void SplitSpec::validate() const
{
    for (const auto& s : seen) {
        if (unseen.count(s)) {
            throw ProtocolError("label '" + s + "' is declared both seen and unseen");
        }
    }
}

SplitSpec read_split(std::istream& in)
{
    SplitSpec split;
    std::set<std::string>* section = nullptr;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        detail::strip_cr(line);
        if (line.empty() || line.front() == '#') continue;
        if (line == "[seen]") {
            section = &split.seen;
        } else if (line == "[unseen]") {
            section = &split.unseen;
        } else if (!section) {
            throw LoadError(LoadError::Reason::parse, row,
                            "split row " + std::to_string(row) + ": label outside a section");
        } else {
            section->insert(line);
        }
    }
    split.validate();
    return split;
}

SplitSpec load_split(const std::filesystem::path& path)
{
    auto in = open_in(path);
    return read_split(in);
}

void save_split(const SplitSpec& split, const std::filesystem::path& path)
{
    auto out = open_out(path);
    out << "[seen]\n";
    for (const auto& s : split.seen) out << s << '\n';
    out << "[unseen]\n";
    for (const auto& s : split.unseen) out << s << '\n';
    check_written(out, path);
}

void RelatedPairs::add(const std::string& a, const std::string& b)
{
    if (a == b) throw ValidationError("related pair relates '" + a + "' to itself");
    pairs_.insert(a < b ? std::pair{a, b} : std::pair{b, a});
    labels_.insert(a);
    labels_.insert(b);
}

bool RelatedPairs::related(const std::string& a, const std::string& b) const
{
    if (a == b) return false;
    return pairs_.count(a < b ? std::pair{a, b} : std::pair{b, a}) != 0;
}

RelatedPairs read_related_pairs(std::istream& in)
{
    RelatedPairs pairs;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        detail::strip_cr(line);
        if (line.empty()) continue;
        const auto f = detail::split(line, '\t');
        if (f.size() != 2 || f[0].empty() || f[1].empty()) {
            throw LoadError(LoadError::Reason::parse, row,
                            "related-pairs row " + std::to_string(row) + ": expected 'A<TAB>B'");
        }
        try {
            pairs.add(std::string(f[0]), std::string(f[1]));
        } catch (const ValidationError& e) {
            throw LoadError(LoadError::Reason::parse, row,
                            "related-pairs row " + std::to_string(row) + ": " + e.what());
        }
    }
    return pairs;
}

RelatedPairs load_related_pairs(const std::filesystem::path& path)
{
    auto in = open_in(path);
    return read_related_pairs(in);
}

} // namespace zsh
