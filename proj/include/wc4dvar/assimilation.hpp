#pragma once

#include "wc4dvar/covariance.hpp"
#include "wc4dvar/krylov.hpp"
#include "wc4dvar/models.hpp"
#include "wc4dvar/operators.hpp"
#include "wc4dvar/randevd.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

namespace wc4dvar {

enum class ModelKind { Advection, Lorenz96 };

// Everything that stays fixed across outer loops: model, observation
// network and error statistics.
struct AssimilationSystem {
    ModelKind kind = ModelKind::Advection;
    ModelGrid grid;
    double courant = 0.0;     // advection
    double forcing = 8.0;     // lorenz96
    int spinup_steps = 500;   // lorenz96 truth spin-up
    ObservationNetwork net;
    std::shared_ptr<const CovarianceFactor> background_half;
    std::shared_ptr<const CovarianceFactor> model_error_half;
    double sigma_obs = 0.0;

    Index window_dim() const { return grid.window_dim(); }

    Vector model_step(const Vector& x) const;
    // Trajectory columns x_0..x_N from p = (x_0, eta_1, ..., eta_N).
    Matrix integrate_p(const Vector& p) const;
    std::shared_ptr<const LinearizedModel> linearize(const Matrix& trajectory) const;
    std::shared_ptr<HessianOperator> hessian(const Matrix& trajectory) const;
};

struct TwinSeeds {
    std::uint64_t background = 1;
    std::uint64_t observations = 2;
    std::uint64_t model_error = 3;
};

// Synthetic truth, background and observations for an identical twin
// experiment; regeneration with equal seeds is bitwise stable.
struct TwinData {
    Matrix truth;       // n x (N+1)
    Vector background;  // n
    Vector y;           // q, stacked in network order
    TwinSeeds seeds;
};

// noise_scale scales both noise draws (0 gives exact data); when
// truth_model_error is set the truth integration is forced with Q^{1/2}
// noise drawn from the model-error seed.
TwinData generate_twin(const AssimilationSystem& sys, const TwinSeeds& seeds,
                       double noise_scale = 1.0, bool truth_model_error = false);

// Current outer-loop estimate: control vector p and its trajectory.
struct OuterState {
    Vector p;     // (x_0, eta_1, ..., eta_N)
    Matrix traj;  // n x (N+1), consistent with p under the nonlinear model
    int loop_index = 0;
};

OuterState initial_state(const AssimilationSystem& sys, const TwinData& twin);

// b = (x^b - x_0, -eta_1, ..., -eta_N); d = stacked y_i - H_i(x_i).
struct Innovations {
    Vector b;
    Vector d;
};
Innovations compute_innovations(const AssimilationSystem& sys, const OuterState& state,
                                const TwinData& twin);

// Quadratic cost of the inner loop in first-level-preconditioned variables,
// J(dp~) = 1/2 ||dp~ - D^{-1/2} b||^2 + 1/2 ||H L^{-1} D^{1/2} dp~ - d||^2_{R^{-1}}.
class QuadraticCost {
public:
    QuadraticCost(const HessianOperator& op, Vector b, Vector d);

    double operator()(const Vector& dp_tilde) const;
    // D^{-1/2} b + D^{1/2} L^{-T} H^T R^{-1} d.
    Vector rhs() const;
    Vector gradient(const Vector& dp_tilde) const;

private:
    const HessianOperator* op_;
    Vector b_tilde_;  // D^{-1/2} b
    Vector d_;
};

struct PrecondSpec {
    enum class Kind { None, Deterministic, Revd, Nystrom, Ritzit };
    Kind kind = Kind::None;
    int k = 0;
    int l = 5;
    std::uint64_t seed = 0;

    std::string label() const;  // stable identifier for CSV output
    bool randomized() const {
        return kind == Kind::Revd || kind == Kind::Nystrom || kind == Kind::Ritzit;
    }
};

struct SolverSpec {
    int max_iter = 100;
    double rel_tol = 1e-6;
    bool reorthogonalize = false;
    bool record_cost = true;
};

struct InnerLoopReport {
    Vector delta_p;        // increment in physical variables
    Vector delta_p_tilde;  // PCG solution
    std::vector<double> quadratic_costs;
    std::vector<double> residual_norms;
    int iterations = 0;
    bool converged = false;
    PrecondSpec precond;
    Vector ritz_values;  // values used to build the LMP (empty for none)
    // Extremes of C^T A C, filled at desk scale only.
    std::optional<std::pair<double, double>> preconditioned_extremes;
};

// Exact top-k eigenpairs of an SPD operator: dense decomposition at desk
// scale, matrix-free Lanczos above it.
RitzPairs exact_top_pairs(const LinearOperator& op, Index k, Index dense_cap = 4096,
                          std::uint64_t lanczos_seed = 0x5eed0f4dULL);

// One inner loop at the state's linearization: build the LMP per spec,
// solve the first-level-preconditioned system with PCG, map the increment
// back. The deterministic spec needs the previous loop's Hessian.
InnerLoopReport run_inner_loop(const AssimilationSystem& sys, const OuterState& state,
                               const TwinData& twin, const HessianOperator& hessian,
                               const PrecondSpec& precond, const SolverSpec& solver,
                               const HessianOperator* previous_hessian = nullptr,
                               Index dense_cap = 4096);

OuterState outer_update(const AssimilationSystem& sys, const OuterState& state,
                        const Vector& delta_p);

}  // namespace wc4dvar
