#pragma once

#include "wc4dvar/lmp.hpp"
#include "wc4dvar/operators.hpp"
#include "wc4dvar/ritz.hpp"
#include "wc4dvar/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace wc4dvar {

// Scalars and vectors harvested from a PCG solve. The normalized residuals
// f_j = r_j / ||r_j|| are retained when Lanczos harvesting is on.
struct CgHistory {
    std::vector<double> alphas;
    std::vector<double> betas;
    std::vector<double> residual_norms;    // ||r_0||, ||r_1||, ...
    std::vector<double> quadratic_costs;   // one entry per iterate incl. x_0
    std::vector<Vector> normalized_residuals;
    int iterations = 0;
    bool converged = false;
    std::string stop_reason;

    double relative_residual(int j) const {
        return residual_norms.at(j) / residual_norms.at(0);
    }
};

struct PcgOptions {
    int max_iter = 100;
    double rel_tol = 1e-6;
    bool reorthogonalize = false;  // re-orthogonalize r_j against stored f_i
    bool store_residual_vectors = false;
    std::function<double(const Vector&)> cost_eval;  // optional J^delta recorder
};

struct PcgResult {
    Vector x;
    CgHistory history;
};

// Split preconditioned CG for A x = b with P = C C^T. One operator apply
// per iteration; the preconditioned matrix is never formed. A zero (or
// omitted) initial guess skips the initial operator apply.
PcgResult pcg_split(const LinearOperator& op, const Vector& b, const LmpFactor& precond,
                    const Vector& x0, const PcgOptions& opts);
PcgResult pcg_split(const LinearOperator& op, const Vector& b, const LmpFactor& precond,
                    const PcgOptions& opts);
PcgResult pcg_split(const LinearOperator& op, const Vector& b, const PcgOptions& opts);

// Symmetric tridiagonal matrix in the Lanczos gamma/tau parameterization.
struct TridiagonalMatrix {
    Vector gammas;  // diagonal
    Vector taus;    // off-diagonal, size dim-1

    Index dim() const { return gammas.size(); }
    Matrix dense() const;
};

// Lanczos tridiagonal recovered from CG coefficients:
// gamma_1 = 1/alpha_1, gamma_j = 1/alpha_j + beta_{j-1}/alpha_{j-1},
// tau_j = sqrt(beta_j)/alpha_j.
TridiagonalMatrix tridiagonal_from_cg(const CgHistory& history);

// Top-k Ritz pairs of A from T_j and the stored normalized residuals
// F_j = (f_0, ..., f_{j-1}); near-duplicate Ritz values are collapsed as
// suspected ghosts, keeping the first.
RitzPairs ritz_from_tridiagonal(const TridiagonalMatrix& T,
                                const std::vector<Vector>& residual_basis, Index k);

struct LanczosOptions {
    int max_iter = 0;       // 0: choose from k and dim
    double tol = 1e-10;     // relative residual tolerance on each pair
    std::uint64_t seed = 0x5eed0f4dULL;
};

// Matrix-free Lanczos with full reorthogonalization, run until the top-k
// Ritz pairs converge. Stands in for a highly accurate sparse eigensolver
// when dense decomposition is out of reach.
RitzPairs lanczos_eigenpairs(const LinearOperator& op, Index k, const LanczosOptions& opts = {});

}  // namespace wc4dvar
