#include "wc4dvar/randevd.hpp"

#include "wc4dvar/random.hpp"

#include <cmath>
#include <sstream>

namespace wc4dvar {

void SketchConfig::validate(Index n) const {
    require(target_rank >= 1, "SketchConfig: target rank must be >= 1");
    require(oversample >= 0, "SketchConfig: oversampling must be >= 0");
    require(sample_size() <= n, "SketchConfig: k + l exceeds operator dimension");
}

Matrix gaussian_matrix(Index rows, Index cols, std::uint64_t seed) {
    NormalStream stream(seed);
    Matrix G(rows, cols);
    stream.fill(G);
    return G;
}

namespace {

// Thin orthonormal basis from Householder QR; Q columns are orthonormal
// regardless of the rank of Y.
Matrix householder_q(const Matrix& Y) {
    Eigen::HouseholderQR<Matrix> qr(Y);
    return qr.householderQ() * Matrix::Identity(Y.rows(), Y.cols());
}

struct SortedEvd {
    Vector values;  // decreasing
    Matrix vectors;
};

SortedEvd sorted_symmetric_evd(const Matrix& K) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (K + K.transpose()));
    SortedEvd out;
    out.values = es.eigenvalues().reverse();
    out.vectors = es.eigenvectors().rowwise().reverse();
    return out;
}

}  // namespace

RitzPairs rayleigh_ritz(const LinearOperator& op, const Matrix& Z) {
    require(Z.rows() == op.dim(), "rayleigh_ritz: dimension mismatch");
    const Index m = Z.cols();
    const Matrix gram_defect = Z.transpose() * Z - Matrix::Identity(m, m);
    if (gram_defect.cwiseAbs().maxCoeff() > 1e-8)
        throw NumericalError("rayleigh_ritz: Z is not orthonormal");
    const Matrix AZ = op.apply_block(Z);
    const SortedEvd evd = sorted_symmetric_evd(Z.transpose() * AZ);
    RitzPairs pairs;
    pairs.values = evd.values;
    pairs.vectors = Z * evd.vectors;
    pairs.source = RitzPairs::Source::Revd;
    return pairs;
}

RitzPairs revd(const LinearOperator& op, const SketchConfig& cfg) {
    cfg.validate(op.dim());
    const Index m = cfg.sample_size();
    const Matrix G = gaussian_matrix(op.dim(), m, cfg.seed);
    const Matrix Y = op.apply_block(G);
    Eigen::ColPivHouseholderQR<Matrix> rank_probe(Y);
    if (rank_probe.rank() < m) {
        std::ostringstream msg;
        msg << "revd: sample matrix rank collapsed to " << rank_probe.rank()
            << " of " << m << " columns";
        throw NumericalError(msg.str());
    }
    const Matrix Z = householder_q(Y);
    RitzPairs pairs = rayleigh_ritz(op, Z);  // second block product
    pairs.values.conservativeResize(cfg.target_rank);
    pairs.vectors.conservativeResize(Eigen::NoChange, cfg.target_rank);
    pairs.source = RitzPairs::Source::Revd;
    return pairs;
}

RitzPairs nystrom(const LinearOperator& op, const SketchConfig& cfg) {
    cfg.validate(op.dim());
    const Index m = cfg.sample_size();
    const Matrix G = gaussian_matrix(op.dim(), m, cfg.seed);
    const Matrix Y = op.apply_block(G);
    // Rank-revealing orthonormalization so exactly low-rank operators pass
    // through; the Ritz count is then capped by the detected rank.
    Eigen::ColPivHouseholderQR<Matrix> qr(Y);
    const Index rank = qr.rank();
    if (rank == 0) throw NumericalError("nystrom: sample matrix is zero");
    const Matrix Z = (qr.householderQ() * Matrix::Identity(Y.rows(), m)).leftCols(rank);

    const Matrix E1 = op.apply_block(Z);
    Matrix E2 = Z.transpose() * E1;
    E2 = 0.5 * (E2 + E2.transpose());
    Eigen::LLT<Matrix> llt(E2);
    if (llt.info() != Eigen::Success)
        throw NumericalError(
            "nystrom: Cholesky of Z^T A Z failed; the projected operator is "
            "numerically indefinite. Increase the oversampling parameter or "
            "use revd for indefinite spectra.");
    const Matrix U = llt.matrixU();
    const Matrix F =
        U.transpose().triangularView<Eigen::Lower>().solve(E1.transpose()).transpose();
    Eigen::BDCSVD<Matrix> svd(F, Eigen::ComputeThinU);

    const Index keep = std::min<Index>(cfg.target_rank, rank);
    RitzPairs pairs;
    pairs.values = svd.singularValues().head(keep).array().square();
    pairs.vectors = svd.matrixU().leftCols(keep);
    pairs.source = RitzPairs::Source::Nystrom;
    return pairs;
}

RitzPairs revd_ritzit(const LinearOperator& op, const SketchConfig& cfg) {
    cfg.validate(op.dim());
    const Index m = cfg.sample_size();
    const Matrix G = gaussian_matrix(op.dim(), m, cfg.seed);
    const Matrix G3 = householder_q(G);
    const Matrix Y3 = op.apply_block(G3);  // the single block product
    Eigen::HouseholderQR<Matrix> qr(Y3);
    const Matrix Z3 = qr.householderQ() * Matrix::Identity(Y3.rows(), m);
    const Matrix R3 = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    if (R3.diagonal().cwiseAbs().minCoeff() <=
        1e-14 * R3.diagonal().cwiseAbs().maxCoeff())
        throw NumericalError("revd_ritzit: QR of the sample matrix is rank deficient");
    const SortedEvd evd = sorted_symmetric_evd(R3 * R3.transpose());
    if (evd.values(std::min<Index>(cfg.target_rank, m) - 1) <= 0.0)
        throw NumericalError("revd_ritzit: nonpositive squared Ritz value");
    RitzPairs pairs;
    pairs.values = evd.values.head(cfg.target_rank).array().sqrt();
    pairs.vectors = Z3 * evd.vectors.leftCols(cfg.target_rank);
    pairs.source = RitzPairs::Source::Ritzit;
    return pairs;
}

RitzPairs sketch_eigenpairs(const LinearOperator& op, const SketchConfig& cfg) {
    switch (cfg.method) {
        case SketchMethod::Revd:
            return revd(op, cfg);
        case SketchMethod::Nystrom:
            return nystrom(op, cfg);
        case SketchMethod::Ritzit:
            return revd_ritzit(op, cfg);
    }
    throw std::invalid_argument("sketch_eigenpairs: unknown method");
}

const char* to_string(SketchMethod m) {
    switch (m) {
        case SketchMethod::Revd:
            return "revd";
        case SketchMethod::Nystrom:
            return "nystrom";
        case SketchMethod::Ritzit:
            return "ritzit";
    }
    return "unknown";
}

}  // namespace wc4dvar
