#include "wc4dvar/models.hpp"

#include <algorithm>
#include <cmath>

namespace wc4dvar {

ModelGrid::ModelGrid(int n_, int N_, double dt_, double dx_)
    : n(n_), N(N_), dt(dt_), dx(dx_) {
    require(n >= 4, "ModelGrid: n must be >= 4");
    require(N >= 1, "ModelGrid: N must be >= 1");
    require(dt > 0.0, "ModelGrid: dt must be positive");
    require(dx > 0.0, "ModelGrid: dx must be positive");
}

AdvectionModel::AdvectionModel(ModelGrid g, double courant_number)
    : grid(g), courant(courant_number) {
    require(courant > 0.0 && courant <= 1.0,
            "AdvectionModel: Courant number must lie in (0, 1]");
}

Vector AdvectionModel::step(const Vector& u) const {
    require(u.size() == grid.n, "AdvectionModel::step: dimension mismatch");
    return advection_step(u, courant);
}

Vector advection_step(const Vector& u, double courant) {
    const Index n = u.size();
    Vector out(n);
    for (Index j = 0; j < n; ++j) {
        const Index jm = (j == 0) ? n - 1 : j - 1;
        out(j) = u(j) - courant * (u(j) - u(jm));
    }
    return out;
}

Vector advection_adjoint_step(const Vector& lambda, double courant) {
    const Index n = lambda.size();
    Vector out(n);
    for (Index j = 0; j < n; ++j) {
        const Index jp = (j + 1 == n) ? 0 : j + 1;
        out(j) = (1.0 - courant) * lambda(j) + courant * lambda(jp);
    }
    return out;
}

Lorenz96Model::Lorenz96Model(ModelGrid g, double forcing_)
    : grid(g), forcing(forcing_) {
    require(grid.n >= 4, "Lorenz96Model: n must be >= 4");
}

Vector Lorenz96Model::step(const Vector& x) const {
    require(x.size() == grid.n, "Lorenz96Model::step: dimension mismatch");
    Vector out = lorenz96_step(x, forcing, grid.dt);
    if (!out.allFinite()) throw NumericalError("Lorenz96Model::step: non-finite state");
    return out;
}

Vector lorenz96_rhs(const Vector& x, double forcing) {
    const Index n = x.size();
    require(n >= 4, "lorenz96_rhs: n must be >= 4");
    Vector d(n);
    for (Index j = 0; j < n; ++j) {
        const Index jm2 = (j + n - 2) % n;
        const Index jm1 = (j + n - 1) % n;
        const Index jp1 = (j + 1) % n;
        d(j) = -x(jm2) * x(jm1) + x(jm1) * x(jp1) - x(j) + forcing;
    }
    return d;
}

Vector lorenz96_step(const Vector& x, double forcing, double dt) {
    const Vector k1 = lorenz96_rhs(x, forcing);
    const Vector k2 = lorenz96_rhs(x + 0.5 * dt * k1, forcing);
    const Vector k3 = lorenz96_rhs(x + 0.5 * dt * k2, forcing);
    const Vector k4 = lorenz96_rhs(x + dt * k3, forcing);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Lorenz96Stages Lorenz96Stages::at(const Vector& x, double forcing, double dt) {
    Lorenz96Stages s;
    s.x1 = x;
    s.x2 = x + 0.5 * dt * lorenz96_rhs(s.x1, forcing);
    s.x3 = x + 0.5 * dt * lorenz96_rhs(s.x2, forcing);
    s.x4 = x + dt * lorenz96_rhs(s.x3, forcing);
    return s;
}

namespace {

// Jacobian of lorenz96_rhs at x applied to v.
void jac_apply(const Vector& x, const Vector& v, Vector& out) {
    const Index n = x.size();
    out.resize(n);
    for (Index j = 0; j < n; ++j) {
        const Index jm2 = (j + n - 2) % n;
        const Index jm1 = (j + n - 1) % n;
        const Index jp1 = (j + 1) % n;
        out(j) = -v(jm2) * x(jm1) - x(jm2) * v(jm1) + v(jm1) * x(jp1) +
                 x(jm1) * v(jp1) - v(j);
    }
}

// Transpose of the Jacobian at x applied to lambda.
void jac_adjoint(const Vector& x, const Vector& lambda, Vector& out) {
    const Index n = x.size();
    out.resize(n);
    for (Index j = 0; j < n; ++j) {
        const Index jm2 = (j + n - 2) % n;
        const Index jm1 = (j + n - 1) % n;
        const Index jp1 = (j + 1) % n;
        const Index jp2 = (j + 2) % n;
        out(j) = -x(jp1) * lambda(jp2) + (x(jp2) - x(jm1)) * lambda(jp1) +
                 x(jm2) * lambda(jm1) - lambda(j);
    }
}

}  // namespace

Vector lorenz96_tlm_step(const Lorenz96Stages& s, const Vector& dx, double dt) {
    require(dx.size() == s.x1.size(), "lorenz96_tlm_step: dimension mismatch");
    Vector a1, a2, a3, a4;
    jac_apply(s.x1, dx, a1);
    jac_apply(s.x2, dx + 0.5 * dt * a1, a2);
    jac_apply(s.x3, dx + 0.5 * dt * a2, a3);
    jac_apply(s.x4, dx + dt * a3, a4);
    return dx + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
}

Vector lorenz96_adjoint_step(const Lorenz96Stages& s, const Vector& lambda, double dt) {
    require(lambda.size() == s.x1.size(), "lorenz96_adjoint_step: dimension mismatch");
    const double e = dt / 6.0;
    Vector acc = lambda;
    Vector w;
    // Reverse sweep through the four stage evaluations.
    jac_adjoint(s.x4, Vector(e * lambda), w);
    acc += w;
    Vector bar3 = 2.0 * e * lambda + dt * w;
    jac_adjoint(s.x3, bar3, w);
    acc += w;
    Vector bar2 = 2.0 * e * lambda + 0.5 * dt * w;
    jac_adjoint(s.x2, bar2, w);
    acc += w;
    Vector bar1 = e * lambda + 0.5 * dt * w;
    jac_adjoint(s.x1, bar1, w);
    acc += w;
    return acc;
}

Vector lorenz96_tlm_step(const Vector& x, const Vector& dx, double forcing, double dt) {
    return lorenz96_tlm_step(Lorenz96Stages::at(x, forcing, dt), dx, dt);
}

Vector lorenz96_adjoint_step(const Vector& x, const Vector& lambda, double forcing,
                             double dt) {
    return lorenz96_adjoint_step(Lorenz96Stages::at(x, forcing, dt), lambda, dt);
}

ObservationNetwork ObservationNetwork::build(int n, int N, int space_stride,
                                             int time_stride) {
    require(n >= 1 && N >= 1, "ObservationNetwork: grid must be nonempty");
    require(space_stride >= 1 && space_stride <= n,
            "ObservationNetwork: space stride inconsistent with grid");
    require(time_stride >= 1 && time_stride <= N,
            "ObservationNetwork: time stride inconsistent with window");
    ObservationNetwork net;
    net.n = n;
    net.N = N;
    net.space_stride = space_stride;
    net.time_stride = time_stride;
    for (int t = N; t >= 1; t -= time_stride) net.times.push_back(t);
    std::reverse(net.times.begin(), net.times.end());
    for (int j = 0; j < n; j += space_stride) net.points.push_back(j);
    net.q = static_cast<int>(net.times.size() * net.points.size());
    return net;
}

int ObservationNetwork::q_at(int t) const {
    for (int obs_t : times)
        if (obs_t == t) return static_cast<int>(points.size());
    return 0;
}

Vector observe(const Vector& trajectory, const ObservationNetwork& net) {
    require(trajectory.size() == static_cast<Index>(net.n) * (net.N + 1),
            "observe: trajectory length mismatch");
    Vector y(net.q);
    Index k = 0;
    for (int t : net.times)
        for (int j : net.points) y(k++) = trajectory(static_cast<Index>(t) * net.n + j);
    return y;
}

Vector observe_adjoint(const Vector& y, const ObservationNetwork& net) {
    require(y.size() == net.q, "observe_adjoint: observation length mismatch");
    Vector out = Vector::Zero(static_cast<Index>(net.n) * (net.N + 1));
    Index k = 0;
    for (int t : net.times)
        for (int j : net.points) out(static_cast<Index>(t) * net.n + j) = y(k++);
    return out;
}

}  // namespace wc4dvar
