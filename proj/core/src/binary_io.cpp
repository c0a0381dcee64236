#include "binary_io.hpp"

#include <bit>

namespace zsh::detail {

template <std::size_t N>
void LeWriter::bytes(std::uint64_t bits)
{
    std::array<char, N> buf{};
    for (std::size_t i = 0; i < N; ++i) {
        buf[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
    }
    out_.write(buf.data(), N);
}

void LeWriter::magic(std::string_view tag) { out_.write(tag.data(), static_cast<std::streamsize>(tag.size())); }
void LeWriter::u8(std::uint8_t v) { bytes<1>(v); }
void LeWriter::u32(std::uint32_t v) { bytes<4>(v); }
void LeWriter::u64(std::uint64_t v) { bytes<8>(v); }
void LeWriter::f32(float v) { bytes<4>(std::bit_cast<std::uint32_t>(v)); }
void LeWriter::f64(double v) { bytes<8>(std::bit_cast<std::uint64_t>(v)); }

void LeWriter::matrix(const Matrix& m)
{
    for (Index j = 0; j < m.cols(); ++j) {
        for (Index i = 0; i < m.rows(); ++i) f64(m(i, j));
    }
}

void LeWriter::line(std::string_view s)
{
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    out_.put('\n');
}

template <std::size_t N>
std::uint64_t LeReader::bytes()
{
    std::array<unsigned char, N> buf{};
    in_.read(reinterpret_cast<char*>(buf.data()), N);
    if (in_.gcount() != static_cast<std::streamsize>(N)) truncated();
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < N; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void LeReader::truncated() const
{
    throw LoadError(LoadError::Reason::truncated, 0, what_ + ": file is truncated");
}

void LeReader::expect_magic(std::string_view tag)
{
    std::string got(tag.size(), '\0');
    in_.read(got.data(), static_cast<std::streamsize>(tag.size()));
    if (in_.gcount() == 0) {
        throw LoadError(LoadError::Reason::empty, 0, what_ + ": file is empty");
    }
    if (in_.gcount() != static_cast<std::streamsize>(tag.size())) truncated();
    if (got != tag) {
        throw LoadError(LoadError::Reason::bad_header, 0,
                        what_ + ": bad magic, expected \"" + std::string(tag) + "\"");
    }
}

std::uint8_t LeReader::u8() { return static_cast<std::uint8_t>(bytes<1>()); }
std::uint32_t LeReader::u32() { return static_cast<std::uint32_t>(bytes<4>()); }
std::uint64_t LeReader::u64() { return bytes<8>(); }
float LeReader::f32() { return std::bit_cast<float>(static_cast<std::uint32_t>(bytes<4>())); }
double LeReader::f64() { return std::bit_cast<double>(bytes<8>()); }

Matrix LeReader::matrix(Index rows, Index cols)
{
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) m(i, j) = f64();
    }
    return m;
}

std::string LeReader::line()
{
    std::string s;
    if (!std::getline(in_, s) || in_.eof()) {
        // A missing final newline also counts as truncation: every record is
        // newline-terminated.
        truncated();
    }
    return s;
}

bool LeReader::at_eof() { return in_.peek() == std::char_traits<char>::eof(); }

} // namespace zsh::detail
