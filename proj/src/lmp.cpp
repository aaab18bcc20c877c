#include "wc4dvar/lmp.hpp"

#include <cmath>
#include <sstream>

namespace wc4dvar {

Vector LmpFactor::apply(const Vector& v) const {
    require(v.size() == dim() || is_identity(), "LmpFactor::apply: dimension mismatch");
    Vector out = v;
    for (Index i = k() - 1; i >= 0; --i) {
        const double c = 1.0 - 1.0 / std::sqrt(values(i));
        out -= (c * vectors.col(i).dot(out)) * vectors.col(i);
    }
    return out;
}

Vector LmpFactor::apply_transpose(const Vector& v) const {
    require(v.size() == dim() || is_identity(), "LmpFactor::apply_transpose: dimension mismatch");
    Vector out = v;
    for (Index i = 0; i < k(); ++i) {
        const double c = 1.0 - 1.0 / std::sqrt(values(i));
        out -= (c * vectors.col(i).dot(out)) * vectors.col(i);
    }
    return out;
}

LmpFactor LmpFactor::identity(Index n) {
    LmpFactor f;
    f.vectors = Matrix(n, 0);
    f.values = Vector(0);
    return f;
}

LmpFactor build_spectral_lmp(const RitzPairs& pairs) {
    if (pairs.k() == 0) return LmpFactor::identity(pairs.dim());
    if (pairs.values.minCoeff() <= 0.0) {
        std::ostringstream msg;
        msg << "build_spectral_lmp: nonpositive Ritz value " << pairs.values.minCoeff();
        throw NumericalError(msg.str());
    }
    const double defect = pairs.orthonormality_defect();
    if (defect > 1e-8) {
        std::ostringstream msg;
        msg << "build_spectral_lmp: Ritz vectors not orthonormal (defect " << defect << ")";
        throw NumericalError(msg.str());
    }
    LmpFactor f;
    f.vectors = pairs.vectors;
    f.values = pairs.values;
    return f;
}

Matrix build_general_lmp_dense(const Matrix& S, const Matrix& A) {
    require(S.rows() == A.rows() && A.rows() == A.cols(),
            "build_general_lmp_dense: dimension mismatch");
    const Index n = A.rows();
    const Matrix AS = A * S;
    Matrix G = S.transpose() * AS;
    G = 0.5 * (G + G.transpose());
    Eigen::LDLT<Matrix> ldlt(G);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-14 * ldlt.vectorD().maxCoeff())
        throw NumericalError("build_general_lmp_dense: S^T A S is rank deficient");
    const Matrix Ginv_St = ldlt.solve(S.transpose());
    const Matrix left = Matrix::Identity(n, n) - S * ldlt.solve(AS.transpose());
    const Matrix right = Matrix::Identity(n, n) - AS * Ginv_St;
    return left * right + S * Ginv_St;
}

Matrix build_ritz_lmp_dense(const Matrix& U, const Vector& theta, const Matrix& A) {
    require(U.rows() == A.rows() && U.cols() == theta.size(),
            "build_ritz_lmp_dense: dimension mismatch");
    require(theta.minCoeff() > 0.0, "build_ritz_lmp_dense: Ritz values must be positive");
    const Index n = A.rows();
    const Matrix Uti = U * theta.cwiseInverse().asDiagonal();
    const Matrix left = Matrix::Identity(n, n) - Uti * (U.transpose() * A);
    const Matrix right = Matrix::Identity(n, n) - (A * Uti) * U.transpose();
    return left * right + Uti * U.transpose();
}

Matrix dense_spectral_lmp(const Matrix& U, const Vector& theta) {
    require(U.cols() == theta.size(), "dense_spectral_lmp: dimension mismatch");
    Matrix P = Matrix::Identity(U.rows(), U.rows());
    for (Index i = 0; i < theta.size(); ++i)
        P -= (1.0 - 1.0 / theta(i)) * U.col(i) * U.col(i).transpose();
    return P;
}

}  // namespace wc4dvar
