#pragma once

#include "zsh/types.hpp"

#include <cstdint>
#include <algorithm>
#include <random>

namespace zsh::detail {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream `stream` of a user seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream)
{
    return splitmix64(seed ^ splitmix64(stream));
}

class Rng
{
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    Matrix normal(Index rows, Index cols)
    {
        std::normal_distribution<double> dist(0.0, 1.0);
        Matrix m(rows, cols);
        for (Index j = 0; j < cols; ++j)
            for (Index i = 0; i < rows; ++i) m(i, j) = dist(engine_);
        return m;
    }

    Matrix signs(Index rows, Index cols)
    {
        std::bernoulli_distribution coin(0.5);
        Matrix m(rows, cols);
        for (Index j = 0; j < cols; ++j)
            for (Index i = 0; i < rows; ++i) m(i, j) = coin(engine_) ? 1.0 : -1.0;
        return m;
    }

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    double gaussian() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

    Index index(Index n) { return std::uniform_int_distribution<Index>(0, n - 1)(engine_); }

    template <class It>
    void shuffle(It first, It last) { std::shuffle(first, last, engine_); }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
};

} // namespace zsh::detail
