#include "wc4dvar/assimilation.hpp"

#include "wc4dvar/random.hpp"
#include "wc4dvar/spectrum.hpp"

#include <cmath>
#include <sstream>

namespace wc4dvar {

Vector AssimilationSystem::model_step(const Vector& x) const {
    switch (kind) {
        case ModelKind::Advection:
            return advection_step(x, courant);
        case ModelKind::Lorenz96:
            return lorenz96_step(x, forcing, grid.dt);
    }
    throw std::invalid_argument("AssimilationSystem: unknown model kind");
}

Matrix AssimilationSystem::integrate_p(const Vector& p) const {
    require(p.size() == window_dim(), "integrate_p: control vector length mismatch");
    const Index n = grid.n;
    Matrix traj(n, grid.N + 1);
    traj.col(0) = p.segment(0, n);
    for (int i = 0; i < grid.N; ++i) {
        traj.col(i + 1) = model_step(traj.col(i)) + p.segment((i + 1) * n, n);
        if (!traj.col(i + 1).allFinite())
            throw NumericalError("integrate_p: non-finite trajectory at step " +
                                 std::to_string(i + 1));
    }
    return traj;
}

std::shared_ptr<const LinearizedModel> AssimilationSystem::linearize(
    const Matrix& trajectory) const {
    switch (kind) {
        case ModelKind::Advection:
            return std::make_shared<AdvectionLinearized>(grid.n, grid.N, courant);
        case ModelKind::Lorenz96:
            return std::make_shared<Lorenz96Linearized>(trajectory, forcing, grid.dt);
    }
    throw std::invalid_argument("AssimilationSystem: unknown model kind");
}

std::shared_ptr<HessianOperator> AssimilationSystem::hessian(
    const Matrix& trajectory) const {
    return std::make_shared<HessianOperator>(linearize(trajectory), net, background_half,
                                             model_error_half, sigma_obs);
}

namespace {

Vector advection_initial_condition(const ModelGrid& grid) {
    // Gaussian bump 6 exp(-(z - 0.5)^2 / (2 * 0.1^2)) on z in [0, 1).
    Vector u(grid.n);
    for (int j = 0; j < grid.n; ++j) {
        const double z = j * grid.dx;
        const double arg = (z - 0.5) / 0.1;
        u(j) = 6.0 * std::exp(-0.5 * arg * arg);
    }
    return u;
}

Vector lorenz96_initial_condition(const AssimilationSystem& sys) {
    // Perturbed equilibrium integrated onto the attractor.
    Vector x = Vector::Constant(sys.grid.n, sys.forcing);
    x(0) += 0.01;
    for (int i = 0; i < sys.spinup_steps; ++i) x = lorenz96_step(x, sys.forcing, sys.grid.dt);
    return x;
}

}  // namespace

TwinData generate_twin(const AssimilationSystem& sys, const TwinSeeds& seeds,
                       double noise_scale, bool truth_model_error) {
    require(noise_scale >= 0.0, "generate_twin: noise scale must be nonnegative");
    TwinData twin;
    twin.seeds = seeds;

    const Index n = sys.grid.n;
    Vector x0 = sys.kind == ModelKind::Advection ? advection_initial_condition(sys.grid)
                                                 : lorenz96_initial_condition(sys);
    twin.truth.resize(n, sys.grid.N + 1);
    twin.truth.col(0) = x0;
    NormalStream model_noise(seeds.model_error);
    for (int i = 0; i < sys.grid.N; ++i) {
        Vector next = sys.model_step(twin.truth.col(i));
        if (truth_model_error && noise_scale > 0.0)
            next += noise_scale * (sys.model_error_half->half * model_noise.draw(n));
        if (!next.allFinite())
            throw NumericalError("generate_twin: truth integration became non-finite");
        twin.truth.col(i + 1) = next;
    }

    NormalStream bg_noise(seeds.background);
    twin.background = twin.truth.col(0);
    if (noise_scale > 0.0)
        twin.background += noise_scale * (sys.background_half->half * bg_noise.draw(n));

    NormalStream obs_noise(seeds.observations);
    Eigen::Map<const Vector> truth_flat(twin.truth.data(), twin.truth.size());
    twin.y = observe(truth_flat, sys.net);
    if (noise_scale > 0.0)
        for (Index i = 0; i < twin.y.size(); ++i)
            twin.y(i) += noise_scale * sys.sigma_obs * obs_noise.next();
    return twin;
}

OuterState initial_state(const AssimilationSystem& sys, const TwinData& twin) {
    OuterState state;
    state.p = Vector::Zero(sys.window_dim());
    state.p.segment(0, sys.grid.n) = twin.background;
    state.traj = sys.integrate_p(state.p);
    state.loop_index = 0;
    return state;
}

Innovations compute_innovations(const AssimilationSystem& sys, const OuterState& state,
                                const TwinData& twin) {
    const Index n = sys.grid.n;
    Innovations inn;
    inn.b = -state.p;
    inn.b.segment(0, n) = twin.background - state.traj.col(0);
    Eigen::Map<const Vector> traj_flat(state.traj.data(), state.traj.size());
    inn.d = twin.y - observe(traj_flat, sys.net);
    return inn;
}

QuadraticCost::QuadraticCost(const HessianOperator& op, Vector b, Vector d)
    : op_(&op), b_tilde_(op.apply_D_half_inv(b)), d_(std::move(d)) {
    require(d_.size() == op.network().q, "QuadraticCost: innovation length mismatch");
}

double QuadraticCost::operator()(const Vector& dp_tilde) const {
    const double r_inv = 1.0 / (op_->sigma_obs() * op_->sigma_obs());
    const Vector traj = op_->apply_Linv(op_->apply_D_half(dp_tilde));
    const Vector misfit = observe(traj, op_->network()) - d_;
    return 0.5 * (dp_tilde - b_tilde_).squaredNorm() + 0.5 * r_inv * misfit.squaredNorm();
}

Vector QuadraticCost::rhs() const {
    const double r_inv = 1.0 / (op_->sigma_obs() * op_->sigma_obs());
    const Vector scattered = observe_adjoint(d_, op_->network());
    return b_tilde_ + r_inv * op_->apply_D_half(op_->apply_LinvT(scattered));
}

Vector QuadraticCost::gradient(const Vector& dp_tilde) const {
    return op_->apply(dp_tilde) - rhs();
}

std::string PrecondSpec::label() const {
    std::ostringstream s;
    switch (kind) {
        case Kind::None:
            return "none";
        case Kind::Deterministic:
            s << "deterministic_k" << k;
            return s.str();
        case Kind::Revd:
            s << "revd_k" << k << "_l" << l;
            return s.str();
        case Kind::Nystrom:
            s << "nystrom_k" << k << "_l" << l;
            return s.str();
        case Kind::Ritzit:
            s << "ritzit_k" << k << "_l" << l;
            return s.str();
    }
    return "unknown";
}

RitzPairs exact_top_pairs(const LinearOperator& op, Index k, Index dense_cap,
                          std::uint64_t lanczos_seed) {
    require(k >= 1 && k <= op.dim(), "exact_top_pairs: k out of range");
    if (op.dim() <= dense_cap) {
        const Matrix A = assemble_dense(op, dense_cap);
        Eigen::SelfAdjointEigenSolver<Matrix> es(A);
        RitzPairs pairs;
        pairs.values = es.eigenvalues().reverse().head(k);
        pairs.vectors = es.eigenvectors().rowwise().reverse().leftCols(k);
        pairs.source = RitzPairs::Source::Exact;
        return pairs;
    }
    LanczosOptions opts;
    opts.seed = lanczos_seed;
    RitzPairs pairs = lanczos_eigenpairs(op, k, opts);
    pairs.source = RitzPairs::Source::Exact;
    return pairs;
}

InnerLoopReport run_inner_loop(const AssimilationSystem& sys, const OuterState& state,
                               const TwinData& twin, const HessianOperator& hessian,
                               const PrecondSpec& precond, const SolverSpec& solver,
                               const HessianOperator* previous_hessian, Index dense_cap) {
    const Innovations inn = compute_innovations(sys, state, twin);
    const QuadraticCost cost(hessian, inn.b, inn.d);

    LmpFactor factor = LmpFactor::identity(hessian.dim());
    Vector ritz_values;
    switch (precond.kind) {
        case PrecondSpec::Kind::None:
            break;
        case PrecondSpec::Kind::Deterministic: {
            if (previous_hessian == nullptr)
                throw std::invalid_argument(
                    "run_inner_loop: deterministic LMP needs a previous inner loop");
            const RitzPairs pairs = exact_top_pairs(*previous_hessian, precond.k, dense_cap);
            factor = build_spectral_lmp(pairs);
            ritz_values = pairs.values;
            break;
        }
        case PrecondSpec::Kind::Revd:
        case PrecondSpec::Kind::Nystrom:
        case PrecondSpec::Kind::Ritzit: {
            SketchConfig cfg;
            cfg.target_rank = precond.k;
            cfg.oversample = precond.l;
            cfg.seed = precond.seed;
            cfg.method = precond.kind == PrecondSpec::Kind::Revd ? SketchMethod::Revd
                         : precond.kind == PrecondSpec::Kind::Nystrom
                             ? SketchMethod::Nystrom
                             : SketchMethod::Ritzit;
            const RitzPairs pairs = sketch_eigenpairs(hessian, cfg);
            factor = build_spectral_lmp(pairs);
            ritz_values = pairs.values;
            break;
        }
    }

    PcgOptions opts;
    opts.max_iter = solver.max_iter;
    opts.rel_tol = solver.rel_tol;
    opts.reorthogonalize = solver.reorthogonalize;
    if (solver.record_cost) opts.cost_eval = [&cost](const Vector& x) { return cost(x); };

    PcgResult sol = pcg_split(hessian, cost.rhs(), factor, opts);

    InnerLoopReport report;
    report.delta_p_tilde = sol.x;
    report.delta_p = hessian.apply_D_half(sol.x);
    report.quadratic_costs = std::move(sol.history.quadratic_costs);
    report.residual_norms = std::move(sol.history.residual_norms);
    report.iterations = sol.history.iterations;
    report.converged = sol.history.converged;
    report.precond = precond;
    report.ritz_values = std::move(ritz_values);
    if (hessian.dim() <= dense_cap) {
        const ClusteredSpectrum cs = clustered_spectrum(hessian, &factor);
        report.preconditioned_extremes = {cs.min_eigenvalue(), cs.max_eigenvalue()};
    }
    return report;
}

OuterState outer_update(const AssimilationSystem& sys, const OuterState& state,
                        const Vector& delta_p) {
    require(delta_p.size() == state.p.size(), "outer_update: increment length mismatch");
    OuterState next;
    next.p = state.p + delta_p;
    next.traj = sys.integrate_p(next.p);
    next.loop_index = state.loop_index + 1;
    return next;
}

}  // namespace wc4dvar
