#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>

namespace zsh {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

// sgn with the tie rule used everywhere in the library: sgn(0) = +1.
inline double sgn(double v) noexcept { return v >= 0.0 ? 1.0 : -1.0; }

} // namespace zsh
