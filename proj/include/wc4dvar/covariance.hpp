#pragma once

#include "wc4dvar/types.hpp"

#include <cstdint>

namespace wc4dvar {

enum class CovKind { Diagonal, Soar, Laplacian };

struct CovarianceSpec {
    CovKind kind = CovKind::Diagonal;
    double sigma = 1.0;         // standard deviation
    double length_scale = 1.0;  // correlation length in grid-spacing units
    int n = 0;
};

// Second-order auto-regressive correlations on the periodic domain,
// C_ij = sigma^2 (1 + r/L) exp(-r/L) with r the chordal distance between
// grid points i and j.
Matrix build_soar(const CovarianceSpec& spec);

// Laplacian correlations realized as the inverse-squared shifted periodic
// Laplacian, sigma^2 gamma (I + L^2 Lambda)^-2, normalized to unit diagonal
// before the sigma^2 scaling.
Matrix build_laplacian_corr(const CovarianceSpec& spec);

Matrix build_covariance(const CovarianceSpec& spec);

// Symmetric square root of an SPD matrix with its inverse action.
struct CovarianceFactor {
    Matrix half;      // D^{1/2}
    Matrix half_inv;  // D^{-1/2}

    Index dim() const { return half.rows(); }
    Vector apply(const Vector& v) const { return half * v; }
    Vector apply_inv(const Vector& v) const { return half_inv * v; }
};

CovarianceFactor sym_sqrt(const Matrix& C);

// half * g with iid standard normal g; deterministic per seed.
Vector sample_noise(const CovarianceFactor& factor, std::uint64_t seed);

}  // namespace wc4dvar
