#pragma once

#include "wc4dvar/covariance.hpp"
#include "wc4dvar/models.hpp"
#include "wc4dvar/types.hpp"

#include <atomic>
#include <memory>

namespace wc4dvar {

// Matrix-free SPD operator contract shared by the Hessian, test stubs and
// dense wrappers. Applications are counted so solver and sketch tests can
// account for every operator-vector product.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;

    virtual Index dim() const = 0;
    virtual void apply(const Vector& in, Vector& out) const = 0;

    Vector apply(const Vector& in) const {
        Vector out;
        apply(in, out);
        return out;
    }

    // Column-wise apply; columns fan out to workers and the result is
    // independent of the execution order.
    virtual Matrix apply_block(const Matrix& V) const;

    long apply_count() const { return applies_.load(); }
    void reset_apply_count() const { applies_.store(0); }

protected:
    void count(long applications) const { applies_.fetch_add(applications); }

private:
    mutable std::atomic<long> applies_{0};
};

class DenseOperator final : public LinearOperator {
public:
    explicit DenseOperator(Matrix A);

    using LinearOperator::apply;
    Index dim() const override { return A_.rows(); }
    void apply(const Vector& in, Vector& out) const override;
    const Matrix& matrix() const { return A_; }

private:
    Matrix A_;
};

// Tangent-linear and adjoint step actions along a stored linearization
// trajectory. Step i maps perturbations at t_i to perturbations at t_{i+1}.
class LinearizedModel {
public:
    virtual ~LinearizedModel() = default;
    virtual Index state_dim() const = 0;
    virtual int steps() const = 0;
    virtual void tlm(int step, const Vector& in, Vector& out) const = 0;
    virtual void adj(int step, const Vector& in, Vector& out) const = 0;
};

// The advection model is linear, so its TLM is the model itself and no
// trajectory is stored.
class AdvectionLinearized final : public LinearizedModel {
public:
    AdvectionLinearized(int n, int N, double courant);
    Index state_dim() const override { return n_; }
    int steps() const override { return N_; }
    void tlm(int step, const Vector& in, Vector& out) const override;
    void adj(int step, const Vector& in, Vector& out) const override;

private:
    Index n_;
    int N_;
    double courant_;
};

class Lorenz96Linearized final : public LinearizedModel {
public:
    // trajectory has N+1 columns of length n; steps are linearized at
    // columns 0..N-1.
    Lorenz96Linearized(const Matrix& trajectory, double forcing, double dt);
    Index state_dim() const override { return n_; }
    int steps() const override { return N_; }
    void tlm(int step, const Vector& in, Vector& out) const override;
    void adj(int step, const Vector& in, Vector& out) const override;

private:
    Index n_;
    int N_;
    double dt_;
    std::vector<Lorenz96Stages> stages_;
};

// M_i = I for every step; used by unit tests and identity-model toys.
class IdentityLinearized final : public LinearizedModel {
public:
    IdentityLinearized(Index n, int N) : n_(n), N_(N) {}
    Index state_dim() const override { return n_; }
    int steps() const override { return N_; }
    void tlm(int, const Vector& in, Vector& out) const override { out = in; }
    void adj(int, const Vector& in, Vector& out) const override { out = in; }

private:
    Index n_;
    int N_;
};

// First-level-preconditioned Hessian A = I + D^{1/2} L^-T H^T R^-1 H L^-1 D^{1/2},
// applied matrix-free via one forward and one adjoint model sweep per call.
// Immutable after construction; re-linearization builds a new operator.
class HessianOperator final : public LinearOperator {
public:
    HessianOperator(std::shared_ptr<const LinearizedModel> model,
                    ObservationNetwork net,
                    std::shared_ptr<const CovarianceFactor> background_half,
                    std::shared_ptr<const CovarianceFactor> model_error_half,
                    double sigma_obs);

    using LinearOperator::apply;
    Index dim() const override { return n_ * (N_ + 1); }
    void apply(const Vector& in, Vector& out) const override;

    // Forward substitution x_0 = p_0, x_{i+1} = M_i x_i + p_{i+1}.
    Vector apply_Linv(const Vector& p) const;
    // Reverse sweep with adjoint steps; exact transpose of apply_Linv.
    Vector apply_LinvT(const Vector& v) const;
    // Block-diagonal D^{1/2} = diag(B^{1/2}, Q^{1/2}, ..., Q^{1/2}).
    Vector apply_D_half(const Vector& v) const;
    Vector apply_D_half_inv(const Vector& v) const;

    // Columns D^{1/2} L^-T H^T e_r spanning the range of A - I.
    Matrix observation_range() const;

    const ObservationNetwork& network() const { return net_; }
    double sigma_obs() const { return sigma_obs_; }
    int state_size() const { return static_cast<int>(n_); }
    int window_steps() const { return N_; }

private:
    std::shared_ptr<const LinearizedModel> model_;
    ObservationNetwork net_;
    std::shared_ptr<const CovarianceFactor> b_half_;
    std::shared_ptr<const CovarianceFactor> q_half_;
    double sigma_obs_;
    Index n_;
    int N_;
};

// A e_j columns, symmetrized; refuses dimensions above the desk-scale cap.
Matrix assemble_dense(const LinearOperator& op, Index cap = 4096);

}  // namespace wc4dvar
