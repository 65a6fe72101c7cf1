/**
 * Lowest eigenpairs of a SparseHermitian operator.
 *
 * dense_eigh is the reference path (LAPACK's Hermitian eigensolvers on the
 * densified matrix). lanczos_lowest runs Lanczos with full
 * reorthogonalization and locking: each pass works on the complement of the
 * pairs already locked, so eigenvalues that a single Krylov sequence would
 * see only once (degenerate levels) are still found with full multiplicity.
 */
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "hamiltonian.hpp"

#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

namespace mflux {

enum class SolverMethod { dense, lanczos, automatic };

inline SolverMethod parse_solver_method(const std::string& s) {
    if (s == "dense") return SolverMethod::dense;
    if (s == "lanczos") return SolverMethod::lanczos;
    if (s == "auto") return SolverMethod::automatic;
    throw std::invalid_argument("unknown solver '" + s + "' (expected dense, lanczos or auto)");
}

/// Dimension up to which SolverMethod::automatic uses the dense path.
inline constexpr int dense_auto_limit = 1024;
/// Largest dimension dense_eigh accepts.
inline constexpr int dense_max_dim = 4096;

struct SolverConfig {
    int k = 6;
    double tol = 1e-10;
    int max_iter = 0;  // 0 means 10 * n
    std::uint64_t seed = 20130517;
    SolverMethod method = SolverMethod::automatic;
};

struct EigenResult {
    std::vector<double> values;  // ascending
    Eigen::MatrixXcd vectors;    // unit columns, one per value
    std::vector<double> residuals;

    std::size_t size() const { return values.size(); }
};

class SolverError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Lanczos ran out of iterations; carries what it had.
class NoConvergenceError : public SolverError {
  public:
    NoConvergenceError(const std::string& what, EigenResult best)
        : SolverError(what), best_(std::move(best)) {}
    const EigenResult& best_so_far() const { return best_; }

  private:
    EigenResult best_;
};

/// ||H v_i - lambda_i v_i||_2, recomputed from scratch.
inline std::vector<double> residual_report(const SparseHermitian& h, const EigenResult& res) {
    if (res.vectors.rows() != h.dim() || res.vectors.cols() != static_cast<Eigen::Index>(res.values.size())) {
        throw SolverError("eigenpairs do not match the operator dimension");
    }
    std::vector<double> out(res.values.size());
    for (std::size_t i = 0; i < res.values.size(); ++i) {
        const Eigen::VectorXcd v = res.vectors.col(static_cast<Eigen::Index>(i));
        out[i] = (h.apply(v) - res.values[i] * v).norm();
    }
    return out;
}

/// Scale used by the residual certificate: max(1, |lambda_max estimate|).
inline double residual_scale(const SparseHermitian& h) { return std::max(1.0, h.norm_bound()); }

namespace detail {

inline void check_dense_dim(const SparseHermitian& h) {
    if (h.dim() > dense_max_dim) {
        throw SolverError("dimension " + std::to_string(h.dim()) + " too large for the dense solver");
    }
}

}  // namespace detail

/// All eigenpairs via LAPACK zheevd (divide and conquer).
inline EigenResult dense_eigh(const SparseHermitian& h) {
    detail::check_dense_dim(h);
    EigenResult res;
    const int n = h.dim();
    if (n == 0) return res;
    Eigen::MatrixXcd a = h.to_dense();
    res.values.resize(static_cast<std::size_t>(n));
    const lapack_int info =
        LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, res.values.data());
    if (info != 0) throw SolverError("zheevd failed with info " + std::to_string(info));
    res.vectors = std::move(a);
    res.residuals = residual_report(h, res);
    return res;
}

/// The k lowest eigenpairs via LAPACK zheevr, which skips the rest of the
/// spectrum.
inline EigenResult dense_lowest(const SparseHermitian& h, int k) {
    detail::check_dense_dim(h);
    const int n = h.dim();
    if (k < 1 || k > n) throw SolverError("requested k outside [1, n]");
    Eigen::MatrixXcd a = h.to_dense();
    EigenResult res;
    res.values.resize(static_cast<std::size_t>(n));
    res.vectors.resize(n, k);
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(k));
    lapack_int found = 0;
    const lapack_int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, a.data(), n, 0.0, 0.0, 1, k,
                                           0.0, &found, res.values.data(), res.vectors.data(), n,
                                           support.data());
    if (info != 0 || found != k) throw SolverError("zheevr failed with info " + std::to_string(info));
    res.values.resize(static_cast<std::size_t>(k));
    res.residuals = residual_report(h, res);
    return res;
}

/// Eigenvalues only, for callers that never look at the states.
inline std::vector<double> dense_eigenvalues(const SparseHermitian& h) {
    detail::check_dense_dim(h);
    const int n = h.dim();
    if (n == 0) return {};
    Eigen::MatrixXcd a = h.to_dense();
    std::vector<double> values(static_cast<std::size_t>(n));
    const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, values.data());
    if (info != 0) throw SolverError("zheevd failed with info " + std::to_string(info));
    return values;
}

/// Krylov basis cap per Lanczos pass (plus 20 per wanted pair).
inline constexpr int max_lanczos_basis = 500;

namespace detail {

inline EigenResult take_lowest(EigenResult all, int k) {
    const auto n = static_cast<Eigen::Index>(std::min<std::size_t>(static_cast<std::size_t>(k), all.size()));
    EigenResult out;
    out.values.assign(all.values.begin(), all.values.begin() + n);
    out.residuals.assign(all.residuals.begin(), all.residuals.begin() + n);
    out.vectors = all.vectors.leftCols(n);
    return out;
}

/// Removes the components of v along the first `cols` columns of q.
inline void orthogonalize(Eigen::VectorXcd& v, const Eigen::MatrixXcd& q, Eigen::Index cols) {
    if (cols == 0) return;
    const Eigen::VectorXcd coeffs = q.leftCols(cols).adjoint() * v;
    v.noalias() -= q.leftCols(cols) * coeffs;
}

struct LanczosPass {
    std::vector<double> values;
    Eigen::MatrixXcd vectors;
    std::vector<double> residuals;
    bool converged = false;
    int iterations = 0;
};

/**
 * One Lanczos pass on the complement of `locked` (n x nlocked). Returns up
 * to `want` lowest Ritz pairs with their true residuals. The pass ends when
 * those pairs meet the tolerance, when the Krylov space becomes invariant,
 * or when the iteration budget runs out.
 */
inline LanczosPass lanczos_pass(const SparseHermitian& h, const Eigen::MatrixXcd& locked, int want,
                                double tol_abs, int budget, std::mt19937_64& rng) {
    const int n = h.dim();
    const auto nlocked = locked.cols();
    const int room = n - static_cast<int>(nlocked);
    LanczosPass pass;
    if (room <= 0 || want <= 0) {
        pass.converged = true;
        return pass;
    }
    const int max_basis = std::min({room, std::max(budget, 1), max_lanczos_basis + 20 * want});

    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v[i] = cplx(unif(rng), unif(rng));
    orthogonalize(v, locked, nlocked);
    orthogonalize(v, locked, nlocked);
    if (v.norm() == 0.0) {
        pass.converged = true;
        return pass;
    }
    v.normalize();

    Eigen::MatrixXcd basis(n, max_basis);
    std::vector<double> alpha;
    std::vector<double> beta;  // beta[m] couples basis m and m+1
    basis.col(0) = v;
    const double breakdown = 1e-12 * std::max(1.0, h.norm_bound());

    Eigen::VectorXd ritz_values;
    Eigen::MatrixXd ritz_vectors;
    int m = 0;
    bool invariant = false;
    while (true) {
        Eigen::VectorXcd w = h.apply(basis.col(m));
        alpha.push_back(basis.col(m).dot(w).real());
        // Interleaved so neither projection reintroduces the other's directions.
        for (int sweep = 0; sweep < 2; ++sweep) {
            orthogonalize(w, locked, nlocked);
            orthogonalize(w, basis, m + 1);
        }
        const double b = w.norm();
        ++m;

        // Ritz values of the m x m tridiagonal.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
        Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
        Eigen::VectorXd sub = m > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(beta.data(), m - 1))
                                    : Eigen::VectorXd();
        tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        ritz_values = tri.eigenvalues();
        ritz_vectors = tri.eigenvectors();

        invariant = b <= breakdown;
        const int count = std::min(want, m);
        bool done = invariant || m == max_basis;
        if (!done && count == want) {
            done = true;
            for (int i = 0; i < count; ++i) {
                if (std::abs(b * ritz_vectors(m - 1, i)) > 0.1 * tol_abs) {
                    done = false;
                    break;
                }
            }
        }
        if (done) {
            pass.iterations = m;
            const Eigen::MatrixXcd ritz =
                basis.leftCols(m) * ritz_vectors.leftCols(count).cast<cplx>();
            for (int i = 0; i < count; ++i) {
                Eigen::VectorXcd x = ritz.col(i);
                x.normalize();
                pass.values.push_back(ritz_values[i]);
                pass.residuals.push_back((h.apply(x) - ritz_values[i] * x).norm());
                pass.vectors.conservativeResize(n, i + 1);
                pass.vectors.col(i) = x;
            }
            pass.converged = std::all_of(pass.residuals.begin(), pass.residuals.end(),
                                         [&](double r) { return r <= tol_abs; });
            return pass;
        }
        beta.push_back(b);
        basis.col(m) = w / b;
    }
}

}  // namespace detail

/**
 * k lowest eigenpairs by Lanczos with full reorthogonalization.
 *
 * Converged pairs are locked and a fresh pass is started on their
 * orthogonal complement; the search stops once a pass finds nothing below
 * the k-th locked value. Deterministic for a fixed seed.
 */
inline EigenResult lanczos_lowest(const SparseHermitian& h, const SolverConfig& cfg) {
    const int n = h.dim();
    if (cfg.k < 1 || cfg.k > n) throw SolverError("requested k outside [1, n]");
    if (!(cfg.tol > 0.0)) throw SolverError("tolerance must be positive");
    const double tol_abs = cfg.tol * residual_scale(h);
    int budget = cfg.max_iter > 0 ? cfg.max_iter : 10 * n;
    std::mt19937_64 rng(cfg.seed);

    EigenResult locked;
    locked.vectors.resize(n, 0);
    const auto kth_locked = [&] {
        return static_cast<int>(locked.size()) >= cfg.k ? locked.values[static_cast<std::size_t>(cfg.k - 1)]
                                                        : std::numeric_limits<double>::infinity();
    };
    const auto sort_locked = [&] {
        std::vector<std::size_t> order(locked.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return locked.values[a] < locked.values[b]; });
        EigenResult sorted;
        sorted.vectors.resize(n, static_cast<Eigen::Index>(order.size()));
        for (std::size_t c = 0; c < order.size(); ++c) {
            sorted.values.push_back(locked.values[order[c]]);
            sorted.residuals.push_back(locked.residuals[order[c]]);
            sorted.vectors.col(static_cast<Eigen::Index>(c)) = locked.vectors.col(static_cast<Eigen::Index>(order[c]));
        }
        locked = std::move(sorted);
    };

    while (true) {
        const int missing = std::max(cfg.k - static_cast<int>(locked.size()), 1);
        const auto pass = detail::lanczos_pass(h, locked.vectors, missing, tol_abs, budget, rng);
        budget -= pass.iterations;

        // Keep converged pairs that can still enter the lowest k.
        bool added = false;
        const double threshold = kth_locked();
        for (std::size_t i = 0; i < pass.values.size(); ++i) {
            if (pass.residuals[i] > tol_abs || pass.values[i] >= threshold - tol_abs) continue;
            locked.values.push_back(pass.values[i]);
            locked.residuals.push_back(pass.residuals[i]);
            locked.vectors.conservativeResize(n, locked.vectors.cols() + 1);
            locked.vectors.col(locked.vectors.cols() - 1) = pass.vectors.col(static_cast<Eigen::Index>(i));
            added = true;
        }
        sort_locked();

        const bool exhausted = static_cast<int>(locked.size()) >= n;
        const bool complete = static_cast<int>(locked.size()) >= cfg.k;
        if (exhausted || (complete && !added && (pass.converged || pass.values.empty()))) {
            return detail::take_lowest(std::move(locked), cfg.k);
        }
        if (budget <= 0 || (!added && !pass.converged)) {
            EigenResult best = locked;
            for (std::size_t i = 0; i < pass.values.size(); ++i) {
                best.values.push_back(pass.values[i]);
                best.residuals.push_back(pass.residuals[i]);
                best.vectors.conservativeResize(n, best.vectors.cols() + 1);
                best.vectors.col(best.vectors.cols() - 1) = pass.vectors.col(static_cast<Eigen::Index>(i));
            }
            throw NoConvergenceError("Lanczos did not converge within the iteration budget", std::move(best));
        }
    }
}

/// Dispatches on cfg.method and returns the cfg.k lowest pairs.
inline EigenResult solve_lowest(const SparseHermitian& h, const SolverConfig& cfg) {
    const bool dense = cfg.method == SolverMethod::dense ||
                       (cfg.method == SolverMethod::automatic && h.dim() <= dense_auto_limit);
    if (dense) {
        return dense_lowest(h, cfg.k);
    }
    return lanczos_lowest(h, cfg);
}

}  // namespace mflux
