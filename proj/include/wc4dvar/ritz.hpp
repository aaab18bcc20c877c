#pragma once

#include "wc4dvar/types.hpp"

namespace wc4dvar {

// Approximate eigenpairs: orthonormal columns U with decreasing positive
// Ritz values Theta, tagged with the method that produced them.
struct RitzPairs {
    enum class Source { Lanczos, Revd, Nystrom, Ritzit, Exact };

    Matrix vectors;  // n_A x k, orthonormal
    Vector values;   // k, decreasing, positive
    Source source = Source::Exact;

    Index k() const { return values.size(); }
    Index dim() const { return vectors.rows(); }

    // Gram deviation from the identity.
    double orthonormality_defect() const {
        if (k() == 0) return 0.0;
        const Matrix G = vectors.transpose() * vectors;
        return (G - Matrix::Identity(k(), k())).cwiseAbs().maxCoeff();
    }

    void validate(double tol = 1e-10) const;
};

const char* to_string(RitzPairs::Source s);

}  // namespace wc4dvar
