#include "zsh/train.hpp"

#include "rng.hpp"
#include "text_util.hpp"
#include "zsh/error.hpp"
#include "zsh/parallel.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>

namespace zsh {
namespace {

// Reciprocal condition estimate below which a normal-equation system is
// reported as singular.
constexpr double kSingularRcond = 1e-14;

void require(bool ok, const std::string& what)
{
    if (!ok) throw ValidationError(what);
}

std::string dims(const Matrix& m)
{
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void check_finite(const ObjectiveTerms& t, const char* block)
{
    if (!std::isfinite(t.total())) {
        throw SolverError(std::string("objective became non-finite after ") + block);
    }
}

} // namespace

// ---------------------------------------------------------------------------
// Hyperparameters / model invariants
// ---------------------------------------------------------------------------

void Hyperparameters::validate() const
{
    auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    require(finite_nonneg(lambda), "lambda must be finite and >= 0");
    require(std::isfinite(alpha) && alpha > 0.0, "alpha must be finite and > 0");
    require(finite_nonneg(beta), "beta must be finite and >= 0");
    require(finite_nonneg(gamma), "gamma must be finite and >= 0");
    require(code_length >= 1, "code length must be >= 1");
    require(max_iters >= 1, "max_iters must be >= 1");
    require(!std::isnan(tol) && tol >= 0.0, "tol must be >= 0");
    require(dcc_max_passes >= 1, "dcc pass cap must be >= 1");
}

double ZshModel::orthogonality_residual() const
{
    if (R.size() == 0) return 0.0;
    return (R.transpose() * R - Matrix::Identity(R.cols(), R.cols())).cwiseAbs().maxCoeff();
}

void ZshModel::validate() const
{
    anchors.validate();
    require(P.rows() == anchors.m(), "P has " + std::to_string(P.rows()) + " rows but there are " +
                                         std::to_string(anchors.m()) + " anchors");
    require(W.rows() == l(), "W is " + dims(W) + ", expected " + std::to_string(l()) + " rows");
    require(R.rows() == R.cols() && R.rows() == W.cols(),
            "R is " + dims(R) + ", expected " + std::to_string(W.cols()) + " square");
    require(P.allFinite() && W.allFinite() && R.allFinite(), "model has non-finite parameters");
    if (B.size() != 0) {
        require(B.rows() == l(), "B is " + dims(B) + ", expected " + std::to_string(l()) + " rows");
        require((B.array().abs() == 1.0).all(), "B has entries outside {-1, +1}");
    }
    require(orthogonality_residual() <= 1e-8, "R is not orthogonal");
}

// ---------------------------------------------------------------------------
// Objective
// ---------------------------------------------------------------------------

ObjectiveTerms objective_terms(const Matrix& P, const Matrix& W, const Matrix& R, const Matrix& B,
                               const Matrix& phiX, const Matrix& Y, const SparseMatrix& L,
                               const Hyperparameters& h)
{
    const Index n = phiX.cols();
    require(P.rows() == phiX.rows(), "objective: P is " + dims(P) + ", phi(X) is " + dims(phiX));
    require(B.rows() == P.cols() && B.cols() == n, "objective: B is " + dims(B));
    require(W.rows() == B.rows() && W.cols() == Y.rows(), "objective: W is " + dims(W));
    require(R.rows() == Y.rows() && R.cols() == Y.rows(), "objective: R is " + dims(R));
    require(Y.cols() == n, "objective: Y is " + dims(Y));
    require(L.rows() == n && L.cols() == n, "objective: L is " + std::to_string(L.rows()) + "x" +
                                                std::to_string(L.cols()));

    const Matrix F = P.transpose() * phiX;
    ObjectiveTerms t;
    t.alignment = (R.transpose() * Y - W.transpose() * B).squaredNorm();
    t.w_ridge = h.lambda * W.squaredNorm();
    t.code_fit = h.alpha * (F - B).squaredNorm();
    t.p_ridge = h.beta * P.squaredNorm();
    if (h.gamma != 0.0) {
        const Matrix FL = F * L;
        t.laplacian = h.gamma * FL.cwiseProduct(F).sum();
    }
    if (!std::isfinite(t.total())) throw SolverError("objective: non-finite intermediate value");
    return t;
}

double objective(const ZshModel& model, const Matrix& phiX, const Matrix& Y, const SparseMatrix& L)
{
    return objective_terms(model.P, model.W, model.R, model.B, phiX, Y, L, model.hyper).total();
}

double reduced_code_objective(const Matrix& W, const Matrix& H, const Matrix& B)
{
    return (W.transpose() * B).squaredNorm() - 2.0 * B.cwiseProduct(H).sum();
}

// ---------------------------------------------------------------------------
// P
// ---------------------------------------------------------------------------

PSolver::PSolver(const Matrix& phiX, const SparseMatrix& L, double alpha, double beta, double gamma)
    : phiX_(phiX)
{
    require(alpha > 0.0, "update_P requires alpha > 0");
    require(L.rows() == phiX.cols() && L.cols() == phiX.cols(), "update_P: Laplacian size mismatch");
    const Index m = phiX.rows();
    system_ = phiX * phiX.transpose();
    system_.diagonal().array() += beta / alpha;
    if (gamma != 0.0) {
        const Matrix phiL = phiX * L;
        system_.noalias() += (gamma / alpha) * (phiL * phiX.transpose());
    }
    system_ = 0.5 * (system_ + system_.transpose()).eval();
    llt_.compute(system_);
    if (llt_.info() != Eigen::Success || !(llt_.rcond() > kSingularRcond)) {
        throw SolverError("update_P: the " + std::to_string(m) + "x" + std::to_string(m) +
                          " system is singular; use beta > 0");
    }
}

Matrix PSolver::solve(const Matrix& B) const
{
    require(B.cols() == phiX_.cols(), "update_P: B has " + std::to_string(B.cols()) +
                                          " columns, phi(X) has " + std::to_string(phiX_.cols()));
    const Matrix rhs = phiX_ * B.transpose();
    return llt_.solve(rhs);
}

Matrix update_P(const Matrix& phiX, const Matrix& B, const SparseMatrix& L,
                double alpha, double beta, double gamma)
{
    return PSolver(phiX, L, alpha, beta, gamma).solve(B);
}

// ---------------------------------------------------------------------------
// B
// ---------------------------------------------------------------------------

Matrix discrete_coordinate_descent(const Matrix& W, const Matrix& H, Matrix B, int max_passes,
                                   DccStats* stats, const DccRowObserver& observer)
{
    const Index l = B.rows();
    const Index n = B.cols();
    require(W.rows() == l, "dcc: W is " + dims(W) + " but B is " + dims(B));
    require(H.rows() == l && H.cols() == n, "dcc: H is " + dims(H) + " but B is " + dims(B));
    require(max_passes >= 1, "dcc: pass cap must be >= 1");

    // (W W^T)_{k,i} = u_k^T u_i, so B_{-i}^T W_{-i} u_i = B^T v with v = column
    // i of W W^T and v_i = 0.
    const Matrix G = W * W.transpose();
    DccStats local;
    Vector v(l);
    for (int pass = 0; pass < max_passes; ++pass) {
        Index pass_flips = 0;
        for (Index i = 0; i < l; ++i) {
            v = G.col(i);
            v(i) = 0.0;
            std::atomic<Index> flips{0};
            parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
                Index f = 0;
                for (auto j = static_cast<Index>(begin); j < static_cast<Index>(end); ++j) {
                    const double q = sgn(H(i, j) - B.col(j).dot(v));
                    if (q != B(i, j)) {
                        B(i, j) = q;
                        ++f;
                    }
                }
                flips += f;
            });
            pass_flips += flips.load();
            if (observer) observer(i, B);
        }
        local.passes = pass + 1;
        local.flips += pass_flips;
        if (pass_flips == 0) {
            local.converged = true;
            break;
        }
    }
    if (stats) *stats = local;
    return B;
}

Matrix update_B(const Matrix& W, const Matrix& R, const Matrix& Y, const Matrix& P,
                const Matrix& phiX, double alpha, Matrix B_init, int max_passes, DccStats* stats)
{
    require(R.rows() == Y.rows(), "update_B: R is " + dims(R) + ", Y is " + dims(Y));
    require(P.rows() == phiX.rows(), "update_B: P is " + dims(P) + ", phi(X) is " + dims(phiX));
    require((B_init.array().abs() == 1.0).all(), "update_B: initial codes must be in {-1, +1}");
    Matrix H = W * (R.transpose() * Y);
    H.noalias() += alpha * (P.transpose() * phiX);
    return discrete_coordinate_descent(W, H, std::move(B_init), max_passes, stats);
}

// ---------------------------------------------------------------------------
// R, W
// ---------------------------------------------------------------------------

Matrix update_R(const Matrix& Y, const Matrix& W, const Matrix& B)
{
    require(W.cols() == Y.rows(), "update_R: W is " + dims(W) + ", Y is " + dims(Y));
    require(B.rows() == W.rows() && B.cols() == Y.cols(), "update_R: B is " + dims(B));
    const Matrix M = W.transpose() * B;
    const Matrix C = Y * M.transpose();
    Eigen::JacobiSVD<Matrix> svd(C, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

Matrix update_W(const Matrix& B, const Matrix& Y, const Matrix& R, double lambda)
{
    require(B.cols() == Y.cols(), "update_W: B is " + dims(B) + ", Y is " + dims(Y));
    require(R.rows() == Y.rows() && R.cols() == Y.rows(), "update_W: R is " + dims(R));
    require(std::isfinite(lambda) && lambda >= 0.0, "update_W: lambda must be >= 0");
    Matrix G = B * B.transpose();
    G.diagonal().array() += lambda;
    Eigen::LLT<Matrix> llt(G);
    if (llt.info() != Eigen::Success || !(llt.rcond() > kSingularRcond)) {
        throw SolverError("update_W: B B^T + lambda I is singular; use lambda > 0");
    }
    const Matrix rhs = B * (Y.transpose() * R);
    return llt.solve(rhs);
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

void TrainConfig::validate() const
{
    hyper.validate();
    require(anchors >= 1, "anchor count must be >= 1");
    require(!delta || (std::isfinite(*delta) && *delta > 0.0), "kernel bandwidth must be > 0");
    require(knn >= 1, "knn must be >= 1");
    require(std::isfinite(sigma) && sigma > 0.0, "sigma must be > 0");
}

std::string to_string(StopReason reason)
{
    return reason == StopReason::converged ? "converged" : "max_iters";
}

std::vector<double> TrainTrace::objective_sequence() const
{
    std::vector<double> out;
    out.reserve(iterations.size() + 1);
    out.push_back(initial.total());
    for (const auto& it : iterations) out.push_back(it.after_W.total());
    return out;
}

void write_trace_csv(const TrainTrace& trace, std::ostream& out)
{
    out << "iter,objective,term1,term2,term3,term4,term5\n";
    auto row = [&](int iter, const ObjectiveTerms& t) {
        using detail::format_double;
        out << iter << ',' << format_double(t.total()) << ',' << format_double(t.alignment) << ','
            << format_double(t.w_ridge) << ',' << format_double(t.code_fit) << ','
            << format_double(t.p_ridge) << ',' << format_double(t.laplacian) << '\n';
    };
    row(0, trace.initial);
    for (const auto& it : trace.iterations) row(it.iter, it.after_W);
}

TrainResult train_on_features(const Matrix& phiX, const Matrix& Y, const SparseMatrix& L,
                              AnchorSet anchors, const Hyperparameters& hyper)
{
    hyper.validate();
    const Index m = phiX.rows();
    const Index n = phiX.cols();
    const Index e = Y.rows();
    const Index l = hyper.code_length;
    require(n >= 1 && m >= 1 && e >= 1, "training data is empty");
    require(Y.cols() == n, "Y has " + std::to_string(Y.cols()) + " columns, phi(X) has " +
                               std::to_string(n));
    require(L.rows() == n && L.cols() == n, "Laplacian size does not match the training set");
    require(anchors.m() == m, "anchor count does not match phi(X)");

    detail::Rng rng(detail::derive_seed(hyper.seed, 1));
    TrainResult result;
    ZshModel& model = result.model;
    model.anchors = std::move(anchors);
    model.hyper = hyper;
    model.B = rng.signs(l, n);
    model.P = rng.normal(m, l) / std::sqrt(static_cast<double>(m));
    model.W = rng.normal(l, e) / std::sqrt(static_cast<double>(l));
    model.R = Eigen::HouseholderQR<Matrix>(rng.normal(e, e)).householderQ() * Matrix::Identity(e, e);

    auto terms = [&] {
        return objective_terms(model.P, model.W, model.R, model.B, phiX, Y, L, hyper);
    };

    TrainTrace& trace = result.trace;
    trace.initial = terms();
    check_finite(trace.initial, "initialisation");

    const PSolver psolver(phiX, L, hyper.alpha, hyper.beta, hyper.gamma);
    double previous = trace.initial.total();
    trace.stop = StopReason::max_iters;
    for (int iter = 1; iter <= hyper.max_iters; ++iter) {
        IterationRecord rec;
        rec.iter = iter;

        model.P = psolver.solve(model.B);
        rec.after_P = terms();
        check_finite(rec.after_P, "update_P");

        model.B = update_B(model.W, model.R, Y, model.P, phiX, hyper.alpha, std::move(model.B),
                           hyper.dcc_max_passes, &rec.dcc);
        rec.after_B = terms();
        check_finite(rec.after_B, "update_B");

        model.R = update_R(Y, model.W, model.B);
        rec.after_R = terms();
        check_finite(rec.after_R, "update_R");

        model.W = update_W(model.B, Y, model.R, hyper.lambda);
        rec.after_W = terms();
        check_finite(rec.after_W, "update_W");

        const double current = rec.after_W.total();
        rec.relative_change = std::abs(previous - current) /
                              std::max(std::abs(previous), std::numeric_limits<double>::min());
        trace.iterations.push_back(rec);
        previous = current;
        if (rec.relative_change < hyper.tol) {
            trace.stop = StopReason::converged;
            break;
        }
    }
    return result;
}

TrainResult train(const Matrix& X, const Matrix& Y, const LaplacianMatrix& L,
                  const TrainConfig& config)
{
    config.validate();
    AnchorSet anchors = sample_anchors(X, config.anchors, config.hyper.seed, config.delta);
    const Matrix phiX = kernel_map_batch(X, anchors);
    return train_on_features(phiX, Y, L.L, std::move(anchors), config.hyper);
}

TrainResult train(const Matrix& X, const Matrix& Y, const TrainConfig& config)
{
    config.validate();
    LaplacianMatrix L;
    if (config.hyper.gamma != 0.0) {
        L = laplacian(build_similarity(X, config.knn, config.sigma, config.affinity));
    } else {
        // The smoothness term vanishes; an empty Laplacian avoids the O(n^2) kNN search.
        L.L.resize(X.cols(), X.cols());
        L.degree = Vector::Zero(X.cols());
    }
    return train(X, Y, L, config);
}

} // namespace zsh
