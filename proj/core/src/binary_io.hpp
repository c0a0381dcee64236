#pragma once

// Little-endian primitive readers/writers shared by the binary file formats.

#include "zsh/error.hpp"
#include "zsh/types.hpp"

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

namespace zsh::detail {

class LeWriter
{
public:
    explicit LeWriter(std::ostream& out) : out_(out) {}

    void magic(std::string_view tag);
    void u8(std::uint8_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f32(float v);
    void f64(double v);
    // Column-major, f64.
    void matrix(const Matrix& m);
    void line(std::string_view s);

private:
    template <std::size_t N>
    void bytes(std::uint64_t bits);

    std::ostream& out_;
};

/// Reader that raises LoadError(truncated) on short reads. `what` names the
/// file kind in error messages.
class LeReader
{
public:
    LeReader(std::istream& in, std::string what) : in_(in), what_(std::move(what)) {}

    void expect_magic(std::string_view tag);
    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    float f32();
    double f64();
    Matrix matrix(Index rows, Index cols);
    std::string line();
    bool at_eof();

    [[noreturn]] void truncated() const;

private:
    template <std::size_t N>
    std::uint64_t bytes();

    std::istream& in_;
    std::string what_;
};

} // namespace zsh::detail
