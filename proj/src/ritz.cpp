#include "wc4dvar/ritz.hpp"

#include <sstream>

namespace wc4dvar {

void RitzPairs::validate(double tol) const {
    require(vectors.cols() == values.size(), "RitzPairs: U/Theta size mismatch");
    for (Index i = 0; i + 1 < values.size(); ++i)
        if (values(i) < values(i + 1))
            throw NumericalError("RitzPairs: values are not decreasing");
    if (k() > 0 && values.minCoeff() <= 0.0)
        throw NumericalError("RitzPairs: nonpositive Ritz value");
    const double defect = orthonormality_defect();
    if (defect > tol) {
        std::ostringstream msg;
        msg << "RitzPairs: vectors not orthonormal (defect " << defect << ")";
        throw NumericalError(msg.str());
    }
}

const char* to_string(RitzPairs::Source s) {
    switch (s) {
        case RitzPairs::Source::Lanczos:
            return "lanczos";
        case RitzPairs::Source::Revd:
            return "revd";
        case RitzPairs::Source::Nystrom:
            return "nystrom";
        case RitzPairs::Source::Ritzit:
            return "ritzit";
        case RitzPairs::Source::Exact:
            return "exact";
    }
    return "unknown";
}

}  // namespace wc4dvar
