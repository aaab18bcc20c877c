#include "wc4dvar/spectrum.hpp"

#include <algorithm>
#include <limits>

namespace wc4dvar {

double ClusteredSpectrum::min_eigenvalue() const {
    double m = unit_multiplicity > 0 ? 1.0 : std::numeric_limits<double>::infinity();
    if (nonunit.size() > 0) m = std::min(m, nonunit.minCoeff());
    return m;
}

double ClusteredSpectrum::max_eigenvalue() const {
    double m = unit_multiplicity > 0 ? 1.0 : -std::numeric_limits<double>::infinity();
    if (nonunit.size() > 0) m = std::max(m, nonunit.maxCoeff());
    return m;
}

Vector ClusteredSpectrum::full() const {
    Vector all(nonunit.size() + unit_multiplicity);
    Index w = 0;
    Index i = 0;
    while (i < nonunit.size() && nonunit(i) >= 1.0) all(w++) = nonunit(i++);
    for (Index u = 0; u < unit_multiplicity; ++u) all(w++) = 1.0;
    while (i < nonunit.size()) all(w++) = nonunit(i++);
    std::sort(all.data(), all.data() + all.size(), std::greater<double>());
    return all;
}

ClusteredSpectrum clustered_spectrum(const HessianOperator& op, const LmpFactor* precond,
                                     const Matrix* obs_range) {
    const Index n = op.dim();
    const Matrix range = obs_range ? Matrix() : op.observation_range();
    const Matrix& W = obs_range ? *obs_range : range;
    require(W.rows() == n, "clustered_spectrum: observation range mismatch");

    const Index k = (precond && !precond->is_identity()) ? precond->k() : 0;
    Matrix B(n, W.cols() + k);
    B.leftCols(W.cols()) = W;
    if (k > 0) B.rightCols(k) = precond->vectors;

    // Orthonormal columns spanning (at least) the invariant subspace where
    // C^T A C can differ from the identity.
    Eigen::HouseholderQR<Matrix> qr(B);
    const Matrix Q = qr.householderQ() * Matrix::Identity(n, B.cols());

    Matrix Y(n, Q.cols());
    for (Index j = 0; j < Q.cols(); ++j) {
        Vector v = Q.col(j);
        if (precond) v = precond->apply(v);
        v = op.apply(v);
        if (precond) v = precond->apply_transpose(v);
        Y.col(j) = v;
    }
    Matrix K = Q.transpose() * Y;
    K = 0.5 * (K + K.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(K, Eigen::EigenvaluesOnly);

    ClusteredSpectrum out;
    out.nonunit = es.eigenvalues().reverse();
    out.unit_multiplicity = n - Q.cols();
    return out;
}

}  // namespace wc4dvar
