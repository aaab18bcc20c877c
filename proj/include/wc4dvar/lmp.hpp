#pragma once

#include "wc4dvar/ritz.hpp"
#include "wc4dvar/types.hpp"

namespace wc4dvar {

// Factored spectral limited-memory preconditioner
//   C_k = prod_{i=1..k} (I - (1 - theta_i^{-1/2}) u_i u_i^T),
// applied as a sequence of rank-1 updates in O(n_A k) per product.
// k = 0 is the identity factor.
struct LmpFactor {
    Matrix vectors;  // U, n_A x k, orthonormal
    Vector values;   // Theta, k strictly positive entries

    Index k() const { return values.size(); }
    Index dim() const { return vectors.rows(); }
    bool is_identity() const { return k() == 0; }

    // C v: rank-1 factors applied right to left (i = k..1).
    Vector apply(const Vector& v) const;
    // C^T v: exact reverse order (i = 1..k).
    Vector apply_transpose(const Vector& v) const;

    static LmpFactor identity(Index n);
};

LmpFactor build_spectral_lmp(const RitzPairs& pairs);

// Dense P_k of the general LMP formula; oracle/testing path only.
Matrix build_general_lmp_dense(const Matrix& S, const Matrix& A);

// Dense Ritz-LMP P_k^{Rt}; oracle/testing path only.
Matrix build_ritz_lmp_dense(const Matrix& U, const Vector& theta, const Matrix& A);

// Dense P_k^{sp} = I - sum (1 - theta_i^{-1}) u_i u_i^T, for factor checks.
Matrix dense_spectral_lmp(const Matrix& U, const Vector& theta);

}  // namespace wc4dvar
