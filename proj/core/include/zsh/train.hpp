#pragma once

#include "zsh/graph.hpp"
#include "zsh/model.hpp"
#include "zsh/types.hpp"

#include <Eigen/Cholesky>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace zsh {

// ---------------------------------------------------------------------------
// Objective
// ---------------------------------------------------------------------------

/// The five weighted terms of the training objective:
///   |R^T Y - W^T B|^2 + lambda |W|^2 + alpha |P^T phi(X) - B|^2
///   + beta |P|^2 + gamma Tr(P^T phi(X) L phi(X)^T P)
struct ObjectiveTerms
{
    double alignment = 0.0;
    double w_ridge = 0.0;
    double code_fit = 0.0;
    double p_ridge = 0.0;
    double laplacian = 0.0;

    double total() const noexcept { return alignment + w_ridge + code_fit + p_ridge + laplacian; }
};

ObjectiveTerms objective_terms(const Matrix& P, const Matrix& W, const Matrix& R, const Matrix& B,
                               const Matrix& phiX, const Matrix& Y, const SparseMatrix& L,
                               const Hyperparameters& hyper);

double objective(const ZshModel& model, const Matrix& phiX, const Matrix& Y, const SparseMatrix& L);

/// |W^T B|^2 - 2 Tr(B^T H): the part of the objective that depends on B.
double reduced_code_objective(const Matrix& W, const Matrix& H, const Matrix& B);

// ---------------------------------------------------------------------------
// Block updates
// ---------------------------------------------------------------------------

/// Exact minimiser over P of
///   alpha |P^T phi - B|^2 + beta |P|^2 + gamma Tr(P^T phi L phi^T P).
Matrix update_P(const Matrix& phiX, const Matrix& B, const SparseMatrix& L,
                double alpha, double beta, double gamma);

/// Factorises the m x m system of update_P once; the right-hand side
/// phi B^T is the only part that changes between iterations.
class PSolver
{
public:
    PSolver(const Matrix& phiX, const SparseMatrix& L, double alpha, double beta, double gamma);

    Matrix solve(const Matrix& B) const;
    const Matrix& system() const noexcept { return system_; }

private:
    const Matrix& phiX_;
    Matrix system_;
    Eigen::LLT<Matrix> llt_;
};

struct DccStats
{
    int passes = 0;
    bool converged = false;
    Index flips = 0;
};

/// Called after every bit-row update with the row index and current codes.
using DccRowObserver = std::function<void(Index row, const Matrix& B)>;

/// Cyclic discrete coordinate descent on |W^T B|^2 - 2 Tr(B^T H). Row i is
/// set to sgn(h_i - B_{-i}^T W_{-i} u_i) until a full sweep flips no bit or
/// `max_passes` sweeps have run.
Matrix discrete_coordinate_descent(const Matrix& W, const Matrix& H, Matrix B, int max_passes,
                                   DccStats* stats = nullptr,
                                   const DccRowObserver& observer = {});

/// H = W R^T Y + alpha P^T phi(X), then discrete_coordinate_descent.
Matrix update_B(const Matrix& W, const Matrix& R, const Matrix& Y, const Matrix& P,
                const Matrix& phiX, double alpha, Matrix B_init, int max_passes = 30,
                DccStats* stats = nullptr);

/// Orthogonal Procrustes: argmin over R^T R = I of |R^T Y - W^T B|^2,
/// R = U V^T from the SVD of Y (W^T B)^T.
Matrix update_R(const Matrix& Y, const Matrix& W, const Matrix& B);

/// Ridge solution W = (B B^T + lambda I)^{-1} B Y^T R.
Matrix update_W(const Matrix& B, const Matrix& Y, const Matrix& R, double lambda);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainConfig
{
    Hyperparameters hyper;
    Index anchors = 1000;
    std::optional<double> delta;  // kernel bandwidth; heuristic when unset
    Index knn = 5;
    double sigma = 1.0;
    Affinity affinity = Affinity::gaussian;

    void validate() const;
};

enum class StopReason { converged, max_iters };

std::string to_string(StopReason reason);

struct IterationRecord
{
    int iter = 0;  // 1-based
    ObjectiveTerms after_P;
    ObjectiveTerms after_B;
    ObjectiveTerms after_R;
    ObjectiveTerms after_W;
    DccStats dcc;
    double relative_change = 0.0;
};

struct TrainTrace
{
    ObjectiveTerms initial;
    std::vector<IterationRecord> iterations;
    StopReason stop = StopReason::max_iters;

    /// Initial objective followed by the objective after every iteration.
    std::vector<double> objective_sequence() const;
};

/// CSV `iter,objective,term1,...,term5`; iteration 0 is the initialisation.
void write_trace_csv(const TrainTrace& trace, std::ostream& out);

struct TrainResult
{
    ZshModel model;
    TrainTrace trace;
};

/// Alternating minimisation over precomputed kernel features. Initialises B,
/// P, W and R from `hyper.seed`, then repeats update_P, update_B, update_R,
/// update_W until the relative objective change drops below `hyper.tol` or
/// `hyper.max_iters` iterations have run.
TrainResult train_on_features(const Matrix& phiX, const Matrix& Y, const SparseMatrix& L,
                              AnchorSet anchors, const Hyperparameters& hyper);

/// Samples anchors from X, maps X and trains with the given Laplacian.
TrainResult train(const Matrix& X, const Matrix& Y, const LaplacianMatrix& L,
                  const TrainConfig& config);

/// Full pipeline: kNN graph and Laplacian from X, then `train` above.
TrainResult train(const Matrix& X, const Matrix& Y, const TrainConfig& config);

} // namespace zsh
