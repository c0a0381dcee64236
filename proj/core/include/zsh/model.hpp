#pragma once

#include "zsh/featurize.hpp"
#include "zsh/types.hpp"

#include <cstdint>
#include <filesystem>

namespace zsh {

/// Weights of the five objective terms plus run control. Defaults follow the
/// published configuration (alpha 1e-5, gamma 1e-6, lambda 1e-2, beta 1e-4,
/// 10 iterations).
struct Hyperparameters
{
    double lambda = 1e-2;  // ridge on W
    double alpha = 1e-5;   // code fitting |P^T phi(X) - B|^2
    double beta = 1e-4;    // ridge on P
    double gamma = 1e-6;   // Laplacian smoothness
    Index code_length = 32;
    int max_iters = 10;
    double tol = 1e-5;     // relative objective change that stops training
    std::uint64_t seed = 0;
    int dcc_max_passes = 30;

    void validate() const;
};

/// Trained parameters. P: m x l, W: l x e, R: e x e orthogonal, B: l x n in
/// {-1, +1}. B is kept for inspection but is not part of the model file.
struct ZshModel
{
    Matrix P;
    Matrix W;
    Matrix R;
    Matrix B;
    AnchorSet anchors;
    Hyperparameters hyper;

    Index m() const noexcept { return P.rows(); }
    Index l() const noexcept { return P.cols(); }
    Index e() const noexcept { return R.rows(); }
    Index d() const noexcept { return anchors.d(); }

    /// max |R^T R - I|
    double orthogonality_residual() const;

    /// Dimension consistency, finiteness, binary B, orthogonal R.
    void validate() const;
};

/// Binary model file: "ZSHM", u32 version, u64 m, l, e, d, then P, W, R,
/// anchors (column-major little-endian f64), delta, hyperparameters.
void save_model(const ZshModel& model, const std::filesystem::path& path);
ZshModel load_model(const std::filesystem::path& path);
void write_model(const ZshModel& model, std::ostream& out);
ZshModel read_model(std::istream& in);

} // namespace zsh
