#pragma once

#include "wc4dvar/operators.hpp"
#include "wc4dvar/ritz.hpp"
#include "wc4dvar/types.hpp"

#include <cstdint>

namespace wc4dvar {

enum class SketchMethod { Revd, Nystrom, Ritzit };

struct SketchConfig {
    int target_rank = 1;      // k
    int oversample = 5;       // l
    std::uint64_t seed = 0;
    SketchMethod method = SketchMethod::Revd;

    int sample_size() const { return target_rank + oversample; }
    void validate(Index n) const;
};

// Seeded Gaussian matrix with pinned generator and column-major fill order.
Matrix gaussian_matrix(Index rows, Index cols, std::uint64_t seed);

// Rayleigh-Ritz projection onto the orthonormal columns of Z.
RitzPairs rayleigh_ritz(const LinearOperator& op, const Matrix& Z);

// Randomized eigenvalue decomposition: sketch Y = A G, orthonormalize,
// Rayleigh-Ritz, truncate. Two block products with the operator.
RitzPairs revd(const LinearOperator& op, const SketchConfig& cfg);

// Nystrom decomposition for symmetric positive semidefinite operators.
// Two block products; Cholesky failure is surfaced, never patched.
RitzPairs nystrom(const LinearOperator& op, const SketchConfig& cfg);

// Single-pass variant built on the ritzit R-factor product K = R R^T.
// One block product with the operator.
RitzPairs revd_ritzit(const LinearOperator& op, const SketchConfig& cfg);

RitzPairs sketch_eigenpairs(const LinearOperator& op, const SketchConfig& cfg);

const char* to_string(SketchMethod m);

}  // namespace wc4dvar
