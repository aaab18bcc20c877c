#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "wc4dvar/assimilation.hpp"
#include "wc4dvar/random.hpp"

#include "test_support.hpp"

#include <cmath>

using namespace wc4dvar;

namespace {

AssimilationSystem tiny_advection(int n = 4, int N = 2, int sx = 2, int st = 1) {
    AssimilationSystem sys;
    sys.kind = ModelKind::Advection;
    sys.grid = ModelGrid(n, N, 0.8 / n, 1.0 / n);
    sys.courant = 0.8;
    sys.net = ObservationNetwork::build(n, N, sx, st);
    sys.background_half = std::make_shared<CovarianceFactor>(
        sym_sqrt(build_soar({CovKind::Soar, 0.1, 2.0, n})));
    sys.model_error_half = std::make_shared<CovarianceFactor>(
        sym_sqrt(build_laplacian_corr({CovKind::Laplacian, 0.05, 1.5, n})));
    sys.sigma_obs = 0.05;
    return sys;
}

AssimilationSystem tiny_lorenz(int n = 8, int N = 5) {
    AssimilationSystem sys;
    sys.kind = ModelKind::Lorenz96;
    sys.grid = ModelGrid(n, N, 0.025, 1.0 / n);
    sys.forcing = 8.0;
    sys.spinup_steps = 120;
    sys.net = ObservationNetwork::build(n, N, 2, 2);
    sys.background_half = std::make_shared<CovarianceFactor>(
        sym_sqrt(build_soar({CovKind::Soar, 0.2, 2.0, n})));
    sys.model_error_half = std::make_shared<CovarianceFactor>(
        sym_sqrt(build_laplacian_corr({CovKind::Laplacian, 0.1, 2.0, n})));
    sys.sigma_obs = 0.15;
    return sys;
}

}  // namespace

TEST_CASE("twin data with zero noise reproduces the observed truth") {
    const AssimilationSystem sys = tiny_advection();
    const TwinData twin = generate_twin(sys, TwinSeeds{}, 0.0);
    Eigen::Map<const Vector> truth_flat(twin.truth.data(), twin.truth.size());
    const Vector expected = observe(truth_flat, sys.net);
    CHECK((twin.y - expected).cwiseAbs().maxCoeff() == 0.0);
    CHECK((twin.background - twin.truth.col(0)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("twin generation is bitwise deterministic per seeds") {
    const AssimilationSystem sys = tiny_lorenz();
    const TwinSeeds seeds{7, 8, 9};
    const TwinData a = generate_twin(sys, seeds);
    const TwinData b = generate_twin(sys, seeds);
    CHECK((a.truth - b.truth).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.background - b.background).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.y - b.y).cwiseAbs().maxCoeff() == 0.0);

    const TwinData c = generate_twin(sys, TwinSeeds{7, 8, 10});
    CHECK((a.y - c.y).cwiseAbs().maxCoeff() == 0.0);  // model-error seed unused by default
    const TwinData d = generate_twin(sys, TwinSeeds{7, 10, 9});
    CHECK((a.y - d.y).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("forced truth integration uses the model-error seed") {
    const AssimilationSystem sys = tiny_lorenz();
    const TwinData plain = generate_twin(sys, TwinSeeds{1, 2, 3}, 1.0, false);
    const TwinData forced = generate_twin(sys, TwinSeeds{1, 2, 3}, 1.0, true);
    CHECK((plain.truth - forced.truth).cwiseAbs().maxCoeff() > 0.0);
    const TwinData forced2 = generate_twin(sys, TwinSeeds{1, 2, 3}, 1.0, true);
    CHECK((forced.truth - forced2.truth).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the advection twin reproduces the q = 100 study shape") {
    AssimilationSystem sys;
    sys.kind = ModelKind::Advection;
    sys.grid = ModelGrid(40, 50, 0.02, 1.0 / 40);
    sys.courant = 0.8;
    sys.net = ObservationNetwork::build(40, 50, 4, 5);
    sys.background_half = std::make_shared<CovarianceFactor>(
        sym_sqrt(build_soar({CovKind::Soar, 0.1, 10.0, 40})));
    sys.model_error_half = std::make_shared<CovarianceFactor>(
        sym_sqrt(build_laplacian_corr({CovKind::Laplacian, 0.05, 10.0, 40})));
    sys.sigma_obs = 0.05;
    const TwinData twin = generate_twin(sys, TwinSeeds{});
    CHECK(twin.y.size() == 100);
    CHECK(twin.y.allFinite());
    CHECK(sys.window_dim() == 2040);
    // Gaussian bump initial condition peaks at the domain center.
    CHECK(twin.truth.col(0).maxCoeff() == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("initial state has zero background innovation") {
    const AssimilationSystem sys = tiny_advection();
    const TwinData twin = generate_twin(sys, TwinSeeds{});
    const OuterState s0 = initial_state(sys, twin);
    const Innovations inn = compute_innovations(sys, s0, twin);
    CHECK(inn.b.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("innovations vanish on the truth with exact data") {
    const AssimilationSystem sys = tiny_advection();
    const TwinData twin = generate_twin(sys, TwinSeeds{}, 0.0);
    OuterState truth_state;
    truth_state.p = Vector::Zero(sys.window_dim());
    truth_state.p.segment(0, sys.grid.n) = twin.truth.col(0);
    truth_state.traj = sys.integrate_p(truth_state.p);
    const Innovations inn = compute_innovations(sys, truth_state, twin);
    CHECK(inn.d.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("innovations match a hand-stacked construction") {
    const AssimilationSystem sys = tiny_advection();
    const TwinData twin = generate_twin(sys, TwinSeeds{11, 12, 13});
    NormalStream s(5);
    OuterState state;
    state.p = s.draw(sys.window_dim());
    state.traj = sys.integrate_p(state.p);
    const Innovations inn = compute_innovations(sys, state, twin);

    const Index n = sys.grid.n;
    CHECK((inn.b.segment(0, n) - (twin.background - state.traj.col(0))).cwiseAbs().maxCoeff() ==
          0.0);
    for (int i = 1; i <= sys.grid.N; ++i)
        CHECK((inn.b.segment(i * n, n) + state.p.segment(i * n, n)).cwiseAbs().maxCoeff() ==
              0.0);
    Eigen::Map<const Vector> traj_flat(state.traj.data(), state.traj.size());
    CHECK((inn.d - (twin.y - observe(traj_flat, sys.net))).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("quadratic cost at zero is the plug-in of the innovations") {
    const AssimilationSystem sys = tiny_advection();
    const TwinData twin = generate_twin(sys, TwinSeeds{21, 22, 23});
    NormalStream s(9);
    OuterState state;
    state.p = 0.1 * s.draw(sys.window_dim());
    state.traj = sys.integrate_p(state.p);
    const auto hessian = sys.hessian(state.traj);
    const Innovations inn = compute_innovations(sys, state, twin);
    const QuadraticCost cost(*hessian, inn.b, inn.d);

    const double at_zero = cost(Vector::Zero(sys.window_dim()));
    const double expect = 0.5 * hessian->apply_D_half_inv(inn.b).squaredNorm() +
                          0.5 * inn.d.squaredNorm() / (sys.sigma_obs * sys.sigma_obs);
    CHECK(at_zero == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("quadratic cost gradient matches central finite differences") {
    const AssimilationSystem sys = tiny_lorenz();
    const TwinData twin = generate_twin(sys, TwinSeeds{31, 32, 33});
    const OuterState s0 = initial_state(sys, twin);
    const auto hessian = sys.hessian(s0.traj);
    const Innovations inn = compute_innovations(sys, s0, twin);
    const QuadraticCost cost(*hessian, inn.b, inn.d);

    NormalStream s(13);
    const Vector x = 0.3 * s.draw(sys.window_dim());
    const Vector grad = cost.gradient(x);
    for (int rep = 0; rep < 10; ++rep) {
        const Vector dir = s.draw(sys.window_dim()).normalized();
        const double eps = 1e-6;
        const double fd = (cost(x + eps * dir) - cost(x - eps * dir)) / (2.0 * eps);
        const double an = grad.dot(dir);
        CHECK(std::abs(fd - an) <= 1e-6 * (1.0 + std::abs(an)));
    }
}

TEST_CASE("quadratic cost equals its second-order expansion") {
    const AssimilationSystem sys = tiny_advection();
    const TwinData twin = generate_twin(sys, TwinSeeds{41, 42, 43});
    const OuterState s0 = initial_state(sys, twin);
    const auto hessian = sys.hessian(s0.traj);
    const Innovations inn = compute_innovations(sys, s0, twin);
    const QuadraticCost cost(*hessian, inn.b, inn.d);

    NormalStream s(17);
    const Vector x = s.draw(sys.window_dim());
    const double direct = cost(x);
    const double expansion = 0.5 * x.dot(hessian->apply(x)) - x.dot(cost.rhs()) +
                             cost(Vector::Zero(sys.window_dim()));
    CHECK(direct == doctest::Approx(expansion).epsilon(1e-10));
}

TEST_CASE("inner loop solution matches the dense solve of the preconditioned system") {
    const AssimilationSystem sys = tiny_advection(4, 2, 2, 1);
    const TwinData twin = generate_twin(sys, TwinSeeds{51, 52, 53});
    const OuterState s0 = initial_state(sys, twin);
    const auto hessian = sys.hessian(s0.traj);
    const Innovations inn = compute_innovations(sys, s0, twin);
    const QuadraticCost cost(*hessian, inn.b, inn.d);

    SolverSpec solver;
    solver.max_iter = 200;
    solver.rel_tol = 1e-12;
    PrecondSpec none;
    const InnerLoopReport rep = run_inner_loop(sys, s0, twin, *hessian, none, solver);

    const Matrix A = assemble_dense(*hessian);
    const Vector direct = A.ldlt().solve(cost.rhs());
    CHECK((rep.delta_p_tilde - direct).norm() <= 1e-8 * direct.norm());
    CHECK((rep.delta_p - hessian->apply_D_half(direct)).norm() <= 1e-8 * direct.norm());

    // Optimality: the preconditioned-variable gradient is tiny.
    CHECK(cost.gradient(rep.delta_p_tilde).norm() <= 1e-6 * cost.rhs().norm());

    // Desk-scale runs report the operator extremes; without an LMP these are
    // the extremes of A itself.
    REQUIRE(rep.preconditioned_extremes.has_value());
    Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
    CHECK(rep.preconditioned_extremes->first ==
          doctest::Approx(es.eigenvalues().minCoeff()).epsilon(1e-8));
    CHECK(rep.preconditioned_extremes->second ==
          doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-8));
}

TEST_CASE("the control-variable transform leaves the minimizer invariant") {
    // Solve the untransformed normal equations densely and compare with the
    // transformed solve mapped back through D^{1/2}.
    const AssimilationSystem sys = tiny_advection(4, 3, 2, 1);
    const TwinData twin = generate_twin(sys, TwinSeeds{141, 142, 143});
    const OuterState s0 = initial_state(sys, twin);
    const auto hessian = sys.hessian(s0.traj);
    const Innovations inn = compute_innovations(sys, s0, twin);

    const auto model = std::make_shared<AdvectionLinearized>(4, 3, 0.8);
    const Matrix L = testing::dense_Linv(*model);
    const Matrix H = testing::dense_H(sys.net);
    const Matrix D_half =
        testing::dense_D_half(*sys.background_half, *sys.model_error_half, 3);
    const Matrix D_inv = D_half.inverse() * D_half.inverse();
    const double r_inv = 1.0 / (sys.sigma_obs * sys.sigma_obs);
    const Matrix HL = H * L;
    const Matrix A_untransformed = D_inv + r_inv * HL.transpose() * HL;
    const Vector rhs_untransformed =
        D_inv * inn.b + r_inv * L.transpose() * H.transpose() * inn.d;
    const Vector dp_direct = A_untransformed.ldlt().solve(rhs_untransformed);

    SolverSpec solver;
    solver.max_iter = 300;
    solver.rel_tol = 1e-13;
    PrecondSpec none;
    const InnerLoopReport rep = run_inner_loop(sys, s0, twin, *hessian, none, solver);
    CHECK((rep.delta_p - dp_direct).norm() <= 1e-8 * dp_direct.norm());
}

TEST_CASE("no preconditioner and an empty LMP give bitwise identical runs") {
    const AssimilationSystem sys = tiny_advection();
    const TwinData twin = generate_twin(sys, TwinSeeds{61, 62, 63});
    const OuterState s0 = initial_state(sys, twin);
    const auto hessian = sys.hessian(s0.traj);
    SolverSpec solver;
    solver.max_iter = 30;

    PrecondSpec none;
    const InnerLoopReport a = run_inner_loop(sys, s0, twin, *hessian, none, solver);

    // k = 0 via an empty randomized spec is not expressible; emulate with the
    // identity factor through the same PCG entry point.
    const Innovations inn = compute_innovations(sys, s0, twin);
    const QuadraticCost cost(*hessian, inn.b, inn.d);
    PcgOptions opts;
    opts.max_iter = 30;
    opts.rel_tol = solver.rel_tol;
    opts.cost_eval = [&cost](const Vector& x) { return cost(x); };
    const PcgResult b = pcg_split(*hessian, cost.rhs(), LmpFactor::identity(hessian->dim()),
                                  opts);
    CHECK((a.delta_p_tilde - b.x).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(a.quadratic_costs.size() == b.history.quadratic_costs.size());
    for (size_t i = 0; i < a.quadratic_costs.size(); ++i)
        CHECK(a.quadratic_costs[i] == b.history.quadratic_costs[i]);
}

TEST_CASE("deterministic preconditioning requires a previous loop") {
    const AssimilationSystem sys = tiny_advection();
    const TwinData twin = generate_twin(sys, TwinSeeds{71, 72, 73});
    const OuterState s0 = initial_state(sys, twin);
    const auto hessian = sys.hessian(s0.traj);
    SolverSpec solver;
    PrecondSpec det;
    det.kind = PrecondSpec::Kind::Deterministic;
    det.k = 2;
    CHECK_THROWS_AS(run_inner_loop(sys, s0, twin, *hessian, det, solver, nullptr),
                    std::invalid_argument);
}

TEST_CASE("linear model: one outer loop attains the quadratic minimum") {
    const AssimilationSystem sys = tiny_advection(6, 3, 2, 1);
    const TwinData twin = generate_twin(sys, TwinSeeds{81, 82, 83});
    const OuterState s0 = initial_state(sys, twin);
    const auto h1 = sys.hessian(s0.traj);
    SolverSpec solver;
    solver.max_iter = 400;
    solver.rel_tol = 1e-13;
    PrecondSpec none;
    const InnerLoopReport rep1 = run_inner_loop(sys, s0, twin, *h1, none, solver);
    const OuterState s1 = outer_update(sys, s0, rep1.delta_p);
    const auto h2 = sys.hessian(s1.traj);
    const Innovations inn2 = compute_innovations(sys, s1, twin);
    const QuadraticCost cost2(*h2, inn2.b, inn2.d);

    // The second loop has (numerically) nothing left to gain.
    const double j2_at_zero = cost2(Vector::Zero(sys.window_dim()));
    CHECK(cost2.rhs().norm() <= 1e-6 * (1.0 + j2_at_zero));

    // For a linear model the new cost at zero equals the converged cost.
    CHECK(j2_at_zero == doctest::Approx(rep1.quadratic_costs.back()).epsilon(1e-9));
}

TEST_CASE("outer update with a zero increment only advances the loop index") {
    const AssimilationSystem sys = tiny_lorenz();
    const TwinData twin = generate_twin(sys, TwinSeeds{91, 92, 93});
    const OuterState s0 = initial_state(sys, twin);
    const OuterState s1 = outer_update(sys, s0, Vector::Zero(sys.window_dim()));
    CHECK((s1.p - s0.p).cwiseAbs().maxCoeff() == 0.0);
    CHECK((s1.traj - s0.traj).cwiseAbs().maxCoeff() == 0.0);
    CHECK(s1.loop_index == 1);
}

TEST_CASE("outer state trajectories always re-integrate consistently") {
    const AssimilationSystem sys = tiny_lorenz();
    const TwinData twin = generate_twin(sys, TwinSeeds{101, 102, 103});
    const OuterState s0 = initial_state(sys, twin);
    const auto h1 = sys.hessian(s0.traj);
    SolverSpec solver;
    solver.max_iter = 60;
    PrecondSpec none;
    const InnerLoopReport rep = run_inner_loop(sys, s0, twin, *h1, none, solver);
    const OuterState s1 = outer_update(sys, s0, rep.delta_p);
    const Matrix recomputed = sys.integrate_p(s1.p);
    CHECK((recomputed - s1.traj).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("randomized inner loops record the Ritz values they used") {
    const AssimilationSystem sys = tiny_lorenz();
    const TwinData twin = generate_twin(sys, TwinSeeds{111, 112, 113});
    const OuterState s0 = initial_state(sys, twin);
    const auto h1 = sys.hessian(s0.traj);
    SolverSpec solver;
    solver.max_iter = 40;
    PrecondSpec spec;
    spec.kind = PrecondSpec::Kind::Nystrom;
    spec.k = 4;
    spec.l = 3;
    spec.seed = 9;
    const InnerLoopReport rep = run_inner_loop(sys, s0, twin, *h1, spec, solver);
    CHECK(rep.ritz_values.size() == 4);
    CHECK(rep.ritz_values.minCoeff() > 0.0);
    CHECK(rep.precond.label() == "nystrom_k4_l3");

    // Quadratic cost decreases monotonically under every preconditioner.
    for (size_t i = 0; i + 1 < rep.quadratic_costs.size(); ++i)
        CHECK(rep.quadratic_costs[i + 1] <=
              rep.quadratic_costs[i] + 1e-10 * std::abs(rep.quadratic_costs[i]));
}

TEST_CASE("exact_top_pairs agrees between dense and lanczos routes") {
    const AssimilationSystem sys = tiny_lorenz();
    const TwinData twin = generate_twin(sys, TwinSeeds{121, 122, 123});
    const OuterState s0 = initial_state(sys, twin);
    const auto h1 = sys.hessian(s0.traj);
    const RitzPairs dense = exact_top_pairs(*h1, 4, 4096);
    const RitzPairs lanczos = exact_top_pairs(*h1, 4, 8);  // force the matrix-free route
    CHECK((dense.values - lanczos.values).cwiseAbs().maxCoeff() <=
          1e-8 * dense.values.maxCoeff());
    for (Index i = 0; i < 4; ++i) {
        const double align = std::abs(dense.vectors.col(i).dot(lanczos.vectors.col(i)));
        CHECK(align == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("deterministic second-loop preconditioning runs end to end") {
    const AssimilationSystem sys = tiny_lorenz();
    const TwinData twin = generate_twin(sys, TwinSeeds{131, 132, 133});
    const OuterState s0 = initial_state(sys, twin);
    const auto h1 = sys.hessian(s0.traj);
    SolverSpec solver;
    solver.max_iter = 60;
    PrecondSpec none;
    const InnerLoopReport rep1 = run_inner_loop(sys, s0, twin, *h1, none, solver);
    const OuterState s1 = outer_update(sys, s0, rep1.delta_p);
    const auto h2 = sys.hessian(s1.traj);

    PrecondSpec det;
    det.kind = PrecondSpec::Kind::Deterministic;
    det.k = 3;
    const InnerLoopReport rep2 =
        run_inner_loop(sys, s1, twin, *h2, det, solver, h1.get());
    CHECK(rep2.ritz_values.size() == 3);
    CHECK(rep2.converged);
}
