#pragma once

#include "zsh/data_io.hpp"
#include "zsh/model.hpp"
#include "zsh/types.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace zsh {

constexpr Index words_for_bits(Index bits) noexcept { return (bits + 63) / 64; }

/// Packed l-bit code. Bit j lives in bit (j mod 64) of word (j div 64); +1
/// maps to 1 and -1 to 0. Padding bits above l are always zero.
class BinaryCode
{
public:
    BinaryCode() = default;
    /// All bits 0 (every sign -1).
    explicit BinaryCode(Index bits);

    /// Bit j = [values(j) >= 0].
    static BinaryCode from_signs(const Eigen::Ref<const Vector>& values);
    static BinaryCode from_bits(const std::vector<bool>& bits);
    /// Throws when padding bits are set or the word count is wrong.
    static BinaryCode from_words(Index bits, std::vector<std::uint64_t> words);

    Index length() const noexcept { return bits_; }
    bool bit(Index j) const;
    void set_bit(Index j, bool value);
    std::span<const std::uint64_t> words() const noexcept { return words_; }

    std::vector<bool> unpack() const;
    /// +1 / -1 vector.
    Vector to_signs() const;
    BinaryCode complement() const;

    friend bool operator==(const BinaryCode&, const BinaryCode&) = default;

private:
    Index bits_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Popcount of the XOR of equally long word spans.
int hamming_words(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) noexcept;

/// Number of differing bits; throws on length mismatch.
int hamming(const BinaryCode& a, const BinaryCode& b);

/// n codes of a common length stored contiguously, with item ids and
/// optional labels for evaluation.
class CodeDatabase
{
public:
    CodeDatabase() = default;
    CodeDatabase(Index code_length, std::vector<std::uint64_t> words,
                 std::vector<std::string> ids, std::optional<LabelList> labels = std::nullopt);
    CodeDatabase(const std::vector<BinaryCode>& codes, std::vector<std::string> ids,
                 std::optional<LabelList> labels = std::nullopt);

    Index size() const noexcept { return static_cast<Index>(ids_.size()); }
    Index code_length() const noexcept { return bits_; }
    Index words_per_code() const noexcept { return words_for_bits(bits_); }

    std::span<const std::uint64_t> code_words(Index i) const;
    BinaryCode code(Index i) const;
    const std::vector<std::uint64_t>& words() const noexcept { return words_; }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    bool has_labels() const noexcept { return labels_.has_value(); }
    /// Throws when the database carries no labels.
    const LabelList& labels() const;

    CodeDatabase select(const std::vector<Index>& items) const;

private:
    Index bits_ = 0;
    std::vector<std::uint64_t> words_;
    std::vector<std::string> ids_;
    std::optional<LabelList> labels_;
};

/// Bit j = [(P^T phi(x))_j >= 0].
BinaryCode encode(const Eigen::Ref<const Vector>& x, const ZshModel& model);

/// Per-column encode, order preserved.
CodeDatabase encode_database(const FeatureMatrix& features, const ZshModel& model,
                             std::optional<LabelList> labels = std::nullopt);

/// Code file: "ZSHC", u32 version, u64 n, u32 l, packed little-endian
/// words, newline-terminated ids, then a u8 label flag (0 none, 1 single,
/// 2 multi) followed by one label line per item.
void save_codes(const CodeDatabase& db, const std::filesystem::path& path);
CodeDatabase load_codes(const std::filesystem::path& path);
void write_codes(const CodeDatabase& db, std::ostream& out);
CodeDatabase read_codes(std::istream& in);

} // namespace zsh
