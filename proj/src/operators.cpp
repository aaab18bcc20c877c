#include "wc4dvar/operators.hpp"

#include "wc4dvar/threads.hpp"

#include <sstream>

namespace wc4dvar {

Matrix LinearOperator::apply_block(const Matrix& V) const {
    require(V.rows() == dim(), "LinearOperator::apply_block: dimension mismatch");
    Matrix out(V.rows(), V.cols());
    parallel_for(V.cols(), [&](Index j) {
        const Vector in = V.col(j);
        Vector col;
        apply(in, col);
        out.col(j) = col;
    });
    return out;
}

DenseOperator::DenseOperator(Matrix A) : A_(std::move(A)) {
    require(A_.rows() == A_.cols(), "DenseOperator: matrix must be square");
}

void DenseOperator::apply(const Vector& in, Vector& out) const {
    require(in.size() == A_.rows(), "DenseOperator::apply: dimension mismatch");
    count(1);
    out.noalias() = A_ * in;
}

AdvectionLinearized::AdvectionLinearized(int n, int N, double courant)
    : n_(n), N_(N), courant_(courant) {
    require(n >= 1 && N >= 0, "AdvectionLinearized: bad window");
}

void AdvectionLinearized::tlm(int, const Vector& in, Vector& out) const {
    out = advection_step(in, courant_);
}

void AdvectionLinearized::adj(int, const Vector& in, Vector& out) const {
    out = advection_adjoint_step(in, courant_);
}

Lorenz96Linearized::Lorenz96Linearized(const Matrix& trajectory, double forcing,
                                       double dt)
    : n_(trajectory.rows()), N_(static_cast<int>(trajectory.cols()) - 1), dt_(dt) {
    require(trajectory.cols() >= 2, "Lorenz96Linearized: trajectory too short");
    stages_.reserve(N_);
    for (int i = 0; i < N_; ++i)
        stages_.push_back(Lorenz96Stages::at(trajectory.col(i), forcing, dt));
}

void Lorenz96Linearized::tlm(int step, const Vector& in, Vector& out) const {
    out = lorenz96_tlm_step(stages_[step], in, dt_);
}

void Lorenz96Linearized::adj(int step, const Vector& in, Vector& out) const {
    out = lorenz96_adjoint_step(stages_[step], in, dt_);
}

HessianOperator::HessianOperator(std::shared_ptr<const LinearizedModel> model,
                                 ObservationNetwork net,
                                 std::shared_ptr<const CovarianceFactor> background_half,
                                 std::shared_ptr<const CovarianceFactor> model_error_half,
                                 double sigma_obs)
    : model_(std::move(model)),
      net_(std::move(net)),
      b_half_(std::move(background_half)),
      q_half_(std::move(model_error_half)),
      sigma_obs_(sigma_obs),
      n_(model_->state_dim()),
      N_(model_->steps()) {
    require(sigma_obs_ > 0.0, "HessianOperator: sigma_obs must be positive");
    require(b_half_ && b_half_->dim() == n_, "HessianOperator: background factor mismatch");
    require(q_half_ && q_half_->dim() == n_, "HessianOperator: model-error factor mismatch");
    require(net_.n == n_ && net_.N == N_, "HessianOperator: network/window mismatch");
}

Vector HessianOperator::apply_Linv(const Vector& p) const {
    require(p.size() == dim(), "apply_Linv: window length mismatch");
    Vector out(dim());
    out.segment(0, n_) = p.segment(0, n_);
    Vector prop(n_);
    for (int i = 0; i < N_; ++i) {
        model_->tlm(i, out.segment(i * n_, n_), prop);
        out.segment((i + 1) * n_, n_) = prop + p.segment((i + 1) * n_, n_);
    }
    return out;
}

Vector HessianOperator::apply_LinvT(const Vector& v) const {
    require(v.size() == dim(), "apply_LinvT: window length mismatch");
    Vector out(dim());
    out.segment(N_ * n_, n_) = v.segment(N_ * n_, n_);
    Vector back(n_);
    for (int i = N_ - 1; i >= 0; --i) {
        model_->adj(i, out.segment((i + 1) * n_, n_), back);
        out.segment(i * n_, n_) = v.segment(i * n_, n_) + back;
    }
    return out;
}

Vector HessianOperator::apply_D_half(const Vector& v) const {
    require(v.size() == dim(), "apply_D_half: dimension mismatch");
    Vector out(dim());
    out.segment(0, n_).noalias() = b_half_->half * v.segment(0, n_);
    if (N_ > 0) {
        Eigen::Map<const Matrix> tail(v.data() + n_, n_, N_);
        Eigen::Map<Matrix> res(out.data() + n_, n_, N_);
        res.noalias() = q_half_->half * tail;
    }
    return out;
}

Vector HessianOperator::apply_D_half_inv(const Vector& v) const {
    require(v.size() == dim(), "apply_D_half_inv: dimension mismatch");
    Vector out(dim());
    out.segment(0, n_).noalias() = b_half_->half_inv * v.segment(0, n_);
    if (N_ > 0) {
        Eigen::Map<const Matrix> tail(v.data() + n_, n_, N_);
        Eigen::Map<Matrix> res(out.data() + n_, n_, N_);
        res.noalias() = q_half_->half_inv * tail;
    }
    return out;
}

void HessianOperator::apply(const Vector& in, Vector& out) const {
    require(in.size() == dim(), "HessianOperator::apply: dimension mismatch");
    count(1);
    const double r_inv = 1.0 / (sigma_obs_ * sigma_obs_);
    Vector t = apply_D_half(in);
    Vector traj = apply_Linv(t);
    if (!traj.allFinite())
        throw NumericalError("hessian apply: non-finite value after forward sweep");
    Vector y = observe(traj, net_);
    y *= r_inv;
    Vector scattered = observe_adjoint(y, net_);
    Vector s = apply_LinvT(scattered);
    if (!s.allFinite())
        throw NumericalError("hessian apply: non-finite value after adjoint sweep");
    out = in + apply_D_half(s);
    if (!out.allFinite())
        throw NumericalError("hessian apply: non-finite result");
}

Matrix HessianOperator::observation_range() const {
    Matrix W(dim(), net_.q);
    parallel_for(net_.q, [&](Index r) {
        Vector e = Vector::Zero(net_.q);
        e(r) = 1.0;
        W.col(r) = apply_D_half(apply_LinvT(observe_adjoint(e, net_)));
    });
    return W;
}

Matrix assemble_dense(const LinearOperator& op, Index cap) {
    if (op.dim() > cap) {
        std::ostringstream msg;
        msg << "assemble_dense: dimension " << op.dim() << " exceeds cap " << cap;
        throw DenseCapError(msg.str());
    }
    const Matrix A = op.apply_block(Matrix::Identity(op.dim(), op.dim()));
    return 0.5 * (A + A.transpose());
}

}  // namespace wc4dvar
