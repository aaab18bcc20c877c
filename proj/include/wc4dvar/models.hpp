#pragma once

#include "wc4dvar/types.hpp"

#include <vector>

namespace wc4dvar {

// Discretization of the assimilation window: n grid points, N model steps
// (times t_0..t_N), time step dt, grid spacing dx.
struct ModelGrid {
    int n = 0;
    int N = 0;
    double dt = 0.0;
    double dx = 0.0;

    ModelGrid() = default;
    ModelGrid(int n_, int N_, double dt_, double dx_);

    Index window_dim() const { return static_cast<Index>(n) * (N + 1); }
};

// Linear advection on a periodic domain, discretized with the first-order
// upwind scheme. Stable for Courant numbers in (0, 1].
struct AdvectionModel {
    ModelGrid grid;
    double courant = 0.0;

    AdvectionModel(ModelGrid g, double courant_number);

    Vector step(const Vector& u) const;
};

// Lorenz 96: dX^j/dt = -X^{j-2}X^{j-1} + X^{j-1}X^{j+1} - X^j + F with
// cyclic indices, integrated with classical RK4.
struct Lorenz96Model {
    ModelGrid grid;
    double forcing = 8.0;

    Lorenz96Model(ModelGrid g, double forcing_);

    Vector step(const Vector& x) const;
};

Vector advection_step(const Vector& u, double courant);
Vector advection_adjoint_step(const Vector& lambda, double courant);

Vector lorenz96_rhs(const Vector& x, double forcing);
Vector lorenz96_step(const Vector& x, double forcing, double dt);

// RK4 stage states needed to linearize one discrete step at x.
struct Lorenz96Stages {
    Vector x1, x2, x3, x4;
    static Lorenz96Stages at(const Vector& x, double forcing, double dt);
};

// Exact Jacobian-vector product of the discrete RK4 map and its transpose.
Vector lorenz96_tlm_step(const Lorenz96Stages& s, const Vector& dx, double dt);
Vector lorenz96_adjoint_step(const Lorenz96Stages& s, const Vector& lambda, double dt);

// Convenience overloads that recompute the stages from x.
Vector lorenz96_tlm_step(const Vector& x, const Vector& dx, double forcing, double dt);
Vector lorenz96_adjoint_step(const Vector& x, const Vector& lambda, double forcing, double dt);

// Observation pattern over the window: every space_stride-th variable at
// every time_stride-th step, anchored so the final step t_N is observed.
// t_0 never carries observations.
struct ObservationNetwork {
    int n = 0;
    int N = 0;
    int space_stride = 1;
    int time_stride = 1;
    std::vector<int> times;   // observed steps, ascending, last one == N
    std::vector<int> points;  // observed variables, ascending, offset 0
    int q = 0;                // total observation count

    static ObservationNetwork build(int n, int N, int space_stride, int time_stride);

    int q_at(int t) const;
};

// Selects the observed components from a stacked trajectory of length
// n(N+1); the adjoint scatters back with zeros elsewhere.
Vector observe(const Vector& trajectory, const ObservationNetwork& net);
Vector observe_adjoint(const Vector& y, const ObservationNetwork& net);

}  // namespace wc4dvar
