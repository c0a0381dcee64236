#include "zsh/codes.hpp"

#include "binary_io.hpp"
#include "text_util.hpp"
#include "zsh/error.hpp"
#include "zsh/parallel.hpp"

#include <bit>
#include <fstream>
#include <unordered_set>

namespace zsh {
namespace {

constexpr std::string_view kCodeMagic = "ZSHC";
constexpr std::uint32_t kCodeVersion = 1;

std::uint64_t padding_mask(Index bits)
{
    const auto used = static_cast<unsigned>(bits % 64);
    return used == 0 ? 0 : ~std::uint64_t{0} << used;
}

void check_padding(Index bits, std::span<const std::uint64_t> words)
{
    if (bits > 0 && (words.back() & padding_mask(bits)) != 0) {
        throw ValidationError("binary code has non-zero padding bits");
    }
}

} // namespace

// ---------------------------------------------------------------------------
// BinaryCode
// ---------------------------------------------------------------------------

BinaryCode::BinaryCode(Index bits)
    : bits_(bits), words_(static_cast<std::size_t>(words_for_bits(bits)), 0)
{
    if (bits < 0) throw ValidationError("code length must be >= 0");
}

BinaryCode BinaryCode::from_signs(const Eigen::Ref<const Vector>& values)
{
    BinaryCode c(values.size());
    for (Index j = 0; j < values.size(); ++j) {
        if (values(j) >= 0.0) c.words_[static_cast<std::size_t>(j / 64)] |= std::uint64_t{1} << (j % 64);
    }
    return c;
}

BinaryCode BinaryCode::from_bits(const std::vector<bool>& bits)
{
    BinaryCode c(static_cast<Index>(bits.size()));
    for (std::size_t j = 0; j < bits.size(); ++j) {
        if (bits[j]) c.words_[j / 64] |= std::uint64_t{1} << (j % 64);
    }
    return c;
}

BinaryCode BinaryCode::from_words(Index bits, std::vector<std::uint64_t> words)
{
    if (static_cast<Index>(words.size()) != words_for_bits(bits)) {
        throw ValidationError("binary code: " + std::to_string(words.size()) +
                              " words cannot hold " + std::to_string(bits) + " bits");
    }
    check_padding(bits, words);
    BinaryCode c;
    c.bits_ = bits;
    c.words_ = std::move(words);
    return c;
}

bool BinaryCode::bit(Index j) const
{
    if (j < 0 || j >= bits_) throw ValidationError("bit index out of range");
    return (words_[static_cast<std::size_t>(j / 64)] >> (j % 64)) & 1u;
}

void BinaryCode::set_bit(Index j, bool value)
{
    if (j < 0 || j >= bits_) throw ValidationError("bit index out of range");
    const auto mask = std::uint64_t{1} << (j % 64);
    auto& w = words_[static_cast<std::size_t>(j / 64)];
    w = value ? (w | mask) : (w & ~mask);
}

std::vector<bool> BinaryCode::unpack() const
{
    std::vector<bool> out(static_cast<std::size_t>(bits_));
    for (Index j = 0; j < bits_; ++j) out[static_cast<std::size_t>(j)] = bit(j);
    return out;
}

Vector BinaryCode::to_signs() const
{
    Vector v(bits_);
    for (Index j = 0; j < bits_; ++j) v(j) = bit(j) ? 1.0 : -1.0;
    return v;
}

BinaryCode BinaryCode::complement() const
{
    BinaryCode c = *this;
    for (auto& w : c.words_) w = ~w;
    if (!c.words_.empty()) c.words_.back() &= ~padding_mask(bits_);
    return c;
}

int hamming_words(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) noexcept
{
    int d = 0;
    for (std::size_t k = 0; k < a.size(); ++k) d += std::popcount(a[k] ^ b[k]);
    return d;
}

int hamming(const BinaryCode& a, const BinaryCode& b)
{
    if (a.length() != b.length()) {
        throw ValidationError("hamming: code lengths differ (" + std::to_string(a.length()) +
                              " vs " + std::to_string(b.length()) + ")");
    }
    return hamming_words(a.words(), b.words());
}

// ---------------------------------------------------------------------------
// CodeDatabase
// ---------------------------------------------------------------------------

CodeDatabase::CodeDatabase(Index code_length, std::vector<std::uint64_t> words,
                           std::vector<std::string> ids, std::optional<LabelList> labels)
    : bits_(code_length), words_(std::move(words)), ids_(std::move(ids)), labels_(std::move(labels))
{
    if (bits_ < 1) throw ValidationError("code database: code length must be >= 1");
    const auto wpc = static_cast<std::size_t>(words_per_code());
    if (words_.size() != wpc * ids_.size()) {
        throw ValidationError("code database: word count does not match " +
                              std::to_string(ids_.size()) + " codes of " + std::to_string(bits_) +
                              " bits");
    }
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        check_padding(bits_, std::span(words_).subspan(i * wpc, wpc));
    }
    std::unordered_set<std::string> seen;
    for (const auto& id : ids_) {
        if (!seen.insert(id).second) throw ValidationError("code database: duplicate id '" + id + "'");
    }
    if (labels_ && labels_->size() != ids_.size()) {
        throw ValidationError("code database: " + std::to_string(labels_->size()) +
                              " labels for " + std::to_string(ids_.size()) + " codes");
    }
}

namespace {

std::vector<std::uint64_t> concat_words(const std::vector<BinaryCode>& codes, Index& bits)
{
    bits = codes.empty() ? 0 : codes.front().length();
    std::vector<std::uint64_t> words;
    words.reserve(codes.size() * static_cast<std::size_t>(words_for_bits(bits)));
    for (const auto& c : codes) {
        if (c.length() != bits) throw ValidationError("code database: mixed code lengths");
        words.insert(words.end(), c.words().begin(), c.words().end());
    }
    return words;
}

} // namespace

CodeDatabase::CodeDatabase(const std::vector<BinaryCode>& codes, std::vector<std::string> ids,
                           std::optional<LabelList> labels)
{
    Index bits = 0;
    auto words = concat_words(codes, bits);
    *this = CodeDatabase(bits, std::move(words), std::move(ids), std::move(labels));
}

std::span<const std::uint64_t> CodeDatabase::code_words(Index i) const
{
    const auto wpc = static_cast<std::size_t>(words_per_code());
    return std::span(words_).subspan(static_cast<std::size_t>(i) * wpc, wpc);
}

BinaryCode CodeDatabase::code(Index i) const
{
    const auto w = code_words(i);
    return BinaryCode::from_words(bits_, std::vector<std::uint64_t>(w.begin(), w.end()));
}

const LabelList& CodeDatabase::labels() const
{
    if (!labels_) throw ValidationError("code database carries no labels");
    return *labels_;
}

CodeDatabase CodeDatabase::select(const std::vector<Index>& items) const
{
    std::vector<std::uint64_t> words;
    std::vector<std::string> ids;
    words.reserve(items.size() * static_cast<std::size_t>(words_per_code()));
    for (auto i : items) {
        const auto w = code_words(i);
        words.insert(words.end(), w.begin(), w.end());
        ids.push_back(ids_.at(static_cast<std::size_t>(i)));
    }
    std::optional<LabelList> labels;
    if (labels_) labels = labels_->select(items);
    return CodeDatabase(bits_, std::move(words), std::move(ids), std::move(labels));
}

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

BinaryCode encode(const Eigen::Ref<const Vector>& x, const ZshModel& model)
{
    if (x.size() != model.d()) {
        throw ValidationError("encode: vector has dimension " + std::to_string(x.size()) +
                              ", model expects " + std::to_string(model.d()));
    }
    const Vector f = model.P.transpose() * kernel_map(x, model.anchors);
    return BinaryCode::from_signs(f);
}

CodeDatabase encode_database(const FeatureMatrix& features, const ZshModel& model,
                             std::optional<LabelList> labels)
{
    if (features.d() != model.d()) {
        throw ValidationError("encode: features have dimension " + std::to_string(features.d()) +
                              ", model expects " + std::to_string(model.d()));
    }
    const Index n = features.n();
    const auto wpc = static_cast<std::size_t>(words_for_bits(model.l()));
    std::vector<std::uint64_t> words(static_cast<std::size_t>(n) * wpc);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            const auto c = encode(features.values().col(static_cast<Index>(j)), model);
            std::copy(c.words().begin(), c.words().end(), words.begin() + static_cast<std::ptrdiff_t>(j * wpc));
        }
    });
    return CodeDatabase(model.l(), std::move(words), features.item_ids(), std::move(labels));
}

// ---------------------------------------------------------------------------
// Code file
// ---------------------------------------------------------------------------

void write_codes(const CodeDatabase& db, std::ostream& out)
{
    detail::LeWriter w(out);
    w.magic(kCodeMagic);
    w.u32(kCodeVersion);
    w.u64(static_cast<std::uint64_t>(db.size()));
    w.u32(static_cast<std::uint32_t>(db.code_length()));
    for (auto word : db.words()) w.u64(word);
    for (const auto& id : db.ids()) w.line(id);
    if (!db.has_labels()) {
        w.u8(0);
        return;
    }
    const auto& labels = db.labels();
    w.u8(labels.is_multi_label() ? 2 : 1);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::string line;
        for (const auto& t : labels.tags(i)) line += (line.empty() ? "" : ",") + t;
        w.line(line);
    }
}

CodeDatabase read_codes(std::istream& in)
{
    detail::LeReader r(in, "code file");
    r.expect_magic(kCodeMagic);
    const auto version = r.u32();
    if (version != kCodeVersion) {
        throw LoadError(LoadError::Reason::version, 0,
                        "code file: unsupported version " + std::to_string(version));
    }
    const auto n = r.u64();
    const auto bits = static_cast<Index>(r.u32());
    if (bits < 1) throw LoadError(LoadError::Reason::bad_header, 0, "code file: zero code length");
    const auto wpc = static_cast<std::uint64_t>(words_for_bits(bits));
    std::vector<std::uint64_t> words;
    words.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(n * wpc, 1u << 24)));
    for (std::uint64_t k = 0; k < n * wpc; ++k) words.push_back(r.u64());
    std::vector<std::string> ids;
    for (std::uint64_t i = 0; i < n; ++i) ids.push_back(r.line());
    const auto flag = r.u8();
    std::optional<LabelList> labels;
    if (flag == 1 || flag == 2) {
        std::vector<std::vector<std::string>> tags;
        for (std::uint64_t i = 0; i < n; ++i) {
            std::vector<std::string> t;
            const auto line = r.line();
            for (auto f : detail::split(line, ',')) {
                if (!f.empty()) t.emplace_back(f);
            }
            tags.push_back(std::move(t));
        }
        if (flag == 2) {
            labels = LabelList::multi(std::move(tags));
        } else {
            std::vector<std::string> flat;
            for (auto& t : tags) {
                if (t.size() != 1) {
                    throw LoadError(LoadError::Reason::parse, 0, "code file: bad single label");
                }
                flat.push_back(std::move(t.front()));
            }
            labels = LabelList::single(std::move(flat));
        }
    } else if (flag != 0) {
        throw LoadError(LoadError::Reason::parse, 0, "code file: bad label flag");
    }
    try {
        return CodeDatabase(bits, std::move(words), std::move(ids), std::move(labels));
    } catch (const LoadError&) {
        throw;
    } catch (const ValidationError& e) {
        throw LoadError(LoadError::Reason::parse, 0, std::string("code file: ") + e.what());
    }
}

void save_codes(const CodeDatabase& db, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
    write_codes(db, out);
    if (!out) throw ValidationError("failed writing " + path.string());
}

CodeDatabase load_codes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError(LoadError::Reason::open_failed, 0, "cannot open " + path.string());
    return read_codes(in);
}

} // namespace zsh
