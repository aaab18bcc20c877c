#include "wc4dvar/covariance.hpp"

#include "wc4dvar/random.hpp"

#include <cmath>
#include <sstream>

namespace wc4dvar {

namespace {

void check_spd(const Matrix& C, const char* who) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(C, Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig <= 0.0) {
        std::ostringstream msg;
        msg << who << ": matrix is not positive definite (smallest eigenvalue "
            << min_eig << ")";
        throw NumericalError(msg.str());
    }
}

}  // namespace

Matrix build_soar(const CovarianceSpec& spec) {
    require(spec.n >= 1, "build_soar: dimension must be positive");
    require(spec.sigma > 0.0, "build_soar: sigma must be positive");
    require(spec.length_scale > 0.0, "build_soar: length scale must be positive");
    const int n = spec.n;
    const double L = spec.length_scale;
    const double s2 = spec.sigma * spec.sigma;
    const double pi = 3.14159265358979323846;
    Matrix C(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            const int d = std::min(i - j, n - (i - j));
            // Chordal distance keeps the kernel positive definite on the
            // circle for every length scale; it agrees with the cyclic
            // distance to second order at short range.
            const double r = (n / pi) * std::sin(pi * d / n);
            const double c = s2 * (1.0 + r / L) * std::exp(-r / L);
            C(i, j) = c;
            C(j, i) = c;
        }
    }
    check_spd(C, "build_soar");
    return C;
}

Matrix build_laplacian_corr(const CovarianceSpec& spec) {
    require(spec.n >= 2, "build_laplacian_corr: dimension must be >= 2");
    require(spec.sigma > 0.0, "build_laplacian_corr: sigma must be positive");
    require(spec.length_scale > 0.0, "build_laplacian_corr: length scale must be positive");
    const int n = spec.n;
    const double l2 = spec.length_scale * spec.length_scale;
    // Periodic second-difference operator.
    Matrix M = Matrix::Identity(n, n);
    for (int i = 0; i < n; ++i) {
        M(i, i) += 2.0 * l2;
        M(i, (i + 1) % n) -= l2;
        M(i, (i + n - 1) % n) -= l2;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(M);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw NumericalError("build_laplacian_corr: shifted Laplacian not positive definite");
    const Vector inv_sq = es.eigenvalues().array().inverse().square();
    Matrix C0 = es.eigenvectors() * inv_sq.asDiagonal() * es.eigenvectors().transpose();
    C0 = 0.5 * (C0 + C0.transpose());
    const double gamma = 1.0 / C0.diagonal().maxCoeff();
    return (spec.sigma * spec.sigma * gamma) * C0;
}

Matrix build_covariance(const CovarianceSpec& spec) {
    switch (spec.kind) {
        case CovKind::Diagonal:
            require(spec.n >= 1 && spec.sigma > 0.0, "build_covariance: bad diagonal spec");
            return spec.sigma * spec.sigma * Matrix::Identity(spec.n, spec.n);
        case CovKind::Soar:
            return build_soar(spec);
        case CovKind::Laplacian:
            return build_laplacian_corr(spec);
    }
    throw std::invalid_argument("build_covariance: unknown kind");
}

CovarianceFactor sym_sqrt(const Matrix& C) {
    require(C.rows() == C.cols(), "sym_sqrt: matrix must be square");
    require((C - C.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + C.cwiseAbs().maxCoeff()),
            "sym_sqrt: matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(C);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig <= 0.0) {
        std::ostringstream msg;
        msg << "sym_sqrt: matrix is not positive definite (eigenvalue " << min_eig << ")";
        throw NumericalError(msg.str());
    }
    const Vector root = es.eigenvalues().array().sqrt();
    const Vector inv_root = root.array().inverse();
    CovarianceFactor f;
    f.half = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
    f.half_inv = es.eigenvectors() * inv_root.asDiagonal() * es.eigenvectors().transpose();
    f.half = 0.5 * (f.half + f.half.transpose());
    f.half_inv = 0.5 * (f.half_inv + f.half_inv.transpose());
    return f;
}

Vector sample_noise(const CovarianceFactor& factor, std::uint64_t seed) {
    NormalStream stream(seed);
    if (factor.dim() == 0) return Vector(0);
    return factor.half * stream.draw(factor.dim());
}

}  // namespace wc4dvar
