#include "wc4dvar/krylov.hpp"

#include "wc4dvar/random.hpp"

#include <cmath>
#include <sstream>

namespace wc4dvar {

namespace {

void check_finite(double v, const char* what, int iteration) {
    if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "pcg_split: non-finite " << what << " at iteration " << iteration;
        throw NumericalError(msg.str());
    }
}

}  // namespace

PcgResult pcg_split(const LinearOperator& op, const Vector& b, const LmpFactor& precond,
                    const Vector& x0, const PcgOptions& opts) {
    const Index n = op.dim();
    require(b.size() == n, "pcg_split: right-hand side dimension mismatch");
    require(x0.size() == 0 || x0.size() == n, "pcg_split: initial guess dimension mismatch");

    PcgResult result;
    CgHistory& hist = result.history;
    const bool keep_f = opts.reorthogonalize || opts.store_residual_vectors;

    Vector x = x0.size() == 0 ? Vector::Zero(n) : x0;
    Vector r;
    if (x0.size() == 0 || x0.isZero(0.0)) {
        r = precond.apply_transpose(b);
    } else {
        r = precond.apply_transpose(b - op.apply(x));
    }
    Vector p = precond.apply(r);

    double rho = r.squaredNorm();
    const double r0_norm = std::sqrt(rho);
    hist.residual_norms.push_back(r0_norm);
    if (opts.cost_eval) hist.quadratic_costs.push_back(opts.cost_eval(x));
    if (keep_f && r0_norm > 0.0) hist.normalized_residuals.push_back(r / r0_norm);

    if (r0_norm == 0.0) {
        hist.converged = true;
        hist.stop_reason = "zero initial residual";
        result.x = x;
        return result;
    }

    Vector w(n), ct_w(n);
    for (int j = 1; j <= opts.max_iter; ++j) {
        op.apply(p, w);  // the single operator apply of this iteration
        const double curvature = p.dot(w);
        check_finite(curvature, "curvature", j);
        if (curvature <= 0.0) {
            std::ostringstream msg;
            msg << "pcg_split: p^T A p = " << curvature << " at iteration " << j
                << "; operator lost positive definiteness";
            throw NumericalError(msg.str());
        }
        const double alpha = rho / curvature;
        check_finite(alpha, "alpha", j);
        x += alpha * p;
        ct_w = precond.apply_transpose(w);
        r -= alpha * ct_w;

        if (opts.reorthogonalize) {
            // Modified Gram-Schmidt against all stored normalized residuals.
            for (const Vector& f : hist.normalized_residuals) r -= f.dot(r) * f;
        }

        const double rho_next = r.squaredNorm();
        const double beta = rho_next / rho;
        check_finite(beta, "beta", j);

        hist.alphas.push_back(alpha);
        hist.betas.push_back(beta);
        hist.residual_norms.push_back(std::sqrt(rho_next));
        if (opts.cost_eval) hist.quadratic_costs.push_back(opts.cost_eval(x));
        if (keep_f && rho_next > 0.0)
            hist.normalized_residuals.push_back(r / std::sqrt(rho_next));
        hist.iterations = j;

        if (std::sqrt(rho_next) / r0_norm <= opts.rel_tol) {
            hist.converged = true;
            hist.stop_reason = "relative residual tolerance reached";
            break;
        }
        p = precond.apply(r) + beta * p;
        rho = rho_next;
    }
    if (!hist.converged) hist.stop_reason = "maximum iterations reached";
    result.x = std::move(x);
    return result;
}

PcgResult pcg_split(const LinearOperator& op, const Vector& b, const LmpFactor& precond,
                    const PcgOptions& opts) {
    return pcg_split(op, b, precond, Vector(), opts);
}

PcgResult pcg_split(const LinearOperator& op, const Vector& b, const PcgOptions& opts) {
    return pcg_split(op, b, LmpFactor::identity(op.dim()), Vector(), opts);
}

Matrix TridiagonalMatrix::dense() const {
    Matrix T = Matrix::Zero(dim(), dim());
    for (Index i = 0; i < dim(); ++i) {
        T(i, i) = gammas(i);
        if (i + 1 < dim()) {
            T(i, i + 1) = taus(i);
            T(i + 1, i) = taus(i);
        }
    }
    return T;
}

TridiagonalMatrix tridiagonal_from_cg(const CgHistory& history) {
    const Index j = static_cast<Index>(history.alphas.size());
    require(j >= 1, "tridiagonal_from_cg: history is empty");
    TridiagonalMatrix T;
    T.gammas.resize(j);
    T.taus.resize(j - 1);
    for (Index i = 0; i < j; ++i) {
        T.gammas(i) = 1.0 / history.alphas[i];
        if (i > 0) T.gammas(i) += history.betas[i - 1] / history.alphas[i - 1];
        if (i + 1 < j) T.taus(i) = std::sqrt(history.betas[i]) / history.alphas[i];
    }
    return T;
}

RitzPairs ritz_from_tridiagonal(const TridiagonalMatrix& T,
                                const std::vector<Vector>& residual_basis, Index k) {
    const Index j = T.dim();
    require(k >= 1 && k <= j, "ritz_from_tridiagonal: k out of range");
    require(static_cast<Index>(residual_basis.size()) >= j,
            "ritz_from_tridiagonal: residual basis shorter than T");

    // The Lanczos basis hiding in CG is v_i = (-1)^i f_i; the sign flip is
    // what makes the positive-off-diagonal T consistent with the basis.
    Matrix F(residual_basis[0].size(), j);
    for (Index i = 0; i < j; ++i) F.col(i) = (i % 2 == 0 ? 1.0 : -1.0) * residual_basis[i];
    const Matrix gram_defect = F.transpose() * F - Matrix::Identity(j, j);
    if (gram_defect.cwiseAbs().maxCoeff() > 1e-8)
        throw NumericalError(
            "ritz_from_tridiagonal: residual basis lost orthogonality; "
            "run CG with reorthogonalization");

    Eigen::SelfAdjointEigenSolver<Matrix> es(T.dense());
    Vector values = es.eigenvalues().reverse();
    Matrix W = es.eigenvectors().rowwise().reverse();

    // Collapse suspected ghost values (near-duplicates), keeping the first.
    const double ghost_tol = 1e-10 * std::abs(values(0));
    std::vector<Index> keep;
    for (Index i = 0; i < j; ++i) {
        if (!keep.empty() && std::abs(values(keep.back()) - values(i)) <= ghost_tol) continue;
        keep.push_back(i);
    }
    if (static_cast<Index>(keep.size()) < k)
        throw NumericalError("ritz_from_tridiagonal: fewer distinct Ritz values than requested");

    RitzPairs pairs;
    pairs.source = RitzPairs::Source::Lanczos;
    pairs.values.resize(k);
    pairs.vectors.resize(F.rows(), k);
    for (Index i = 0; i < k; ++i) {
        pairs.values(i) = values(keep[i]);
        pairs.vectors.col(i) = F * W.col(keep[i]);
    }
    return pairs;
}

RitzPairs lanczos_eigenpairs(const LinearOperator& op, Index k, const LanczosOptions& opts) {
    const Index n = op.dim();
    require(k >= 1 && k <= n, "lanczos_eigenpairs: k out of range");
    const int max_iter =
        opts.max_iter > 0 ? opts.max_iter : static_cast<int>(std::min<Index>(n, 8 * k + 120));

    NormalStream stream(opts.seed);
    std::vector<Vector> basis;
    basis.push_back(stream.draw(n).normalized());

    std::vector<double> diag, offdiag;
    Vector w(n);
    Matrix W;
    Vector values;
    int converged_at = -1;

    for (int j = 0; j < max_iter; ++j) {
        op.apply(basis[j], w);
        if (j > 0) w -= offdiag[j - 1] * basis[j - 1];
        const double a = basis[j].dot(w);
        diag.push_back(a);
        w -= a * basis[j];
        // Full reorthogonalization, twice for safety.
        for (int pass = 0; pass < 2; ++pass)
            for (const Vector& v : basis) w -= v.dot(w) * v;
        const double b = w.norm();

        const Index m = static_cast<Index>(diag.size());
        if (m >= k) {
            Matrix T = Matrix::Zero(m, m);
            for (Index i = 0; i < m; ++i) {
                T(i, i) = diag[i];
                if (i + 1 < m) {
                    T(i, i + 1) = offdiag[i];
                    T(i + 1, i) = offdiag[i];
                }
            }
            Eigen::SelfAdjointEigenSolver<Matrix> es(T);
            values = es.eigenvalues().reverse();
            W = es.eigenvectors().rowwise().reverse();
            const double scale = std::abs(values(0));
            bool all_converged = true;
            for (Index i = 0; i < k; ++i) {
                const double resid = b * std::abs(W(m - 1, i));
                if (resid > opts.tol * scale) {
                    all_converged = false;
                    break;
                }
            }
            if (all_converged) {
                converged_at = static_cast<int>(m);
                break;
            }
        }

        if (b <= 1e-14) {
            // Invariant subspace hit; restart with a fresh orthogonal direction.
            Vector f = stream.draw(n);
            for (int pass = 0; pass < 2; ++pass)
                for (const Vector& v : basis) f -= v.dot(f) * v;
            const double fn = f.norm();
            if (fn <= 1e-14) break;
            offdiag.push_back(0.0);
            basis.push_back(f / fn);
        } else {
            offdiag.push_back(b);
            basis.push_back(w / b);
        }
    }

    if (converged_at < 0) {
        const Index m = static_cast<Index>(diag.size());
        Matrix T = Matrix::Zero(m, m);
        for (Index i = 0; i < m; ++i) {
            T(i, i) = diag[i];
            if (i + 1 < m) {
                T(i, i + 1) = offdiag[i];
                T(i + 1, i) = offdiag[i];
            }
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(T);
        values = es.eigenvalues().reverse();
        W = es.eigenvectors().rowwise().reverse();
        converged_at = static_cast<int>(m);
    }

    if (values.size() < k)
        throw NumericalError("lanczos_eigenpairs: Krylov space exhausted before k pairs");

    const Index m = converged_at;
    RitzPairs pairs;
    pairs.source = RitzPairs::Source::Exact;
    pairs.values = values.head(k);
    pairs.vectors.resize(n, k);
    for (Index i = 0; i < k; ++i) {
        Vector u = Vector::Zero(n);
        for (Index row = 0; row < m; ++row) u += W(row, i) * basis[row];
        pairs.vectors.col(i) = u.normalized();
    }
    return pairs;
}

}  // namespace wc4dvar
