#pragma once

#include "wc4dvar/lmp.hpp"
#include "wc4dvar/operators.hpp"

namespace wc4dvar {

// Full spectrum of C^T A C split into the eigenvalues that can differ from
// one and the multiplicity of the exact-unit cluster.
struct ClusteredSpectrum {
    Vector nonunit;            // sorted decreasing, size <= q + k
    Index unit_multiplicity;   // eigenvalue 1 with this multiplicity in addition

    double min_eigenvalue() const;
    double max_eigenvalue() const;
    // All eigenvalues sorted decreasing.
    Vector full() const;
};

// Exact spectrum of C^T A C for A = I + (rank-q PSD part). Both A - I and
// C - I act inside the span of the observation range and the LMP vectors,
// so a projection onto that subspace captures every eigenvalue that can
// differ from one; the orthogonal complement contributes exact ones. Costs
// q adjoint sweeps (reusable via obs_range) plus q + k operator applies,
// with no dense n_A x n_A assembly.
ClusteredSpectrum clustered_spectrum(const HessianOperator& op,
                                     const LmpFactor* precond = nullptr,
                                     const Matrix* obs_range = nullptr);

// C^T A C as a matrix-free operator; applications of the wrapped operator
// are counted on the wrapped operator itself.
class SplitPreconditionedOperator final : public LinearOperator {
public:
    SplitPreconditionedOperator(const LinearOperator& op, const LmpFactor& factor)
        : op_(op), factor_(factor) {
        require(factor.is_identity() || factor.dim() == op.dim(),
                "SplitPreconditionedOperator: factor dimension mismatch");
    }

    using LinearOperator::apply;
    Index dim() const override { return op_.dim(); }
    void apply(const Vector& in, Vector& out) const override {
        out = factor_.apply_transpose(op_.apply(factor_.apply(in)));
    }

private:
    const LinearOperator& op_;
    const LmpFactor& factor_;
};

}  // namespace wc4dvar
