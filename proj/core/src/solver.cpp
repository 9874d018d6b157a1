#include "vfd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vfd/errors.hpp"

namespace vfd {

namespace {

inline double phi(double u, double m) { return std::pow(u, m) / m; }
inline double dphi(double u, double m) { return std::pow(u, m - 1.0); }

void require_exponent(double m) {
    if (!(m > -1.0 && m < 0.0)) throw ParameterOutOfRange("m must lie in (-1,0)");
}

// Backward-Euler system for one step: residual and Jacobian around u.
// The Jacobian is tridiagonal except for one extra entry per flux row
// (columns 2 and n-3), which Gaussian elimination removes before the
// Thomas sweep.
struct StepSystem {
    const std::vector<double>& uold;
    const BoundarySpec& bc;
    double m;
    double h;
    double dt;
    double t_new;

    double bc_left = 0.0, bc_right = 0.0;

    StepSystem(const std::vector<double>& uold_, const BoundarySpec& bc_, double m_, double h_,
               double dt_, double t_new_)
        : uold(uold_), bc(bc_), m(m_), h(h_), dt(dt_), t_new(t_new_) {
        bc_left = bc.left(t_new);
        bc_right = bc.right(t_new);
        if (bc.kind == BoundarySpec::Kind::Dirichlet && (bc_left <= 0.0 || bc_right <= 0.0))
            throw ParameterOutOfRange("Dirichlet boundary values must be > 0");
    }

    void residual(const std::vector<double>& u, std::vector<double>& F) const {
        const std::size_t n = u.size();
        const double c = dt / (h * h);
        F.resize(n);
        if (bc.kind == BoundarySpec::Kind::Dirichlet) {
            F[0] = u[0] - bc_left;
            F[n - 1] = u[n - 1] - bc_right;
        } else {
            F[0] = (-3.0 * phi(u[0], m) + 4.0 * phi(u[1], m) - phi(u[2], m)) / (2.0 * h) - bc_left;
            F[n - 1] = (3.0 * phi(u[n - 1], m) - 4.0 * phi(u[n - 2], m) + phi(u[n - 3], m)) /
                           (2.0 * h) +
                       bc_right;
        }
        for (std::size_t j = 1; j + 1 < n; ++j) {
            F[j] = u[j] - c * (phi(u[j - 1], m) - 2.0 * phi(u[j], m) + phi(u[j + 1], m)) - uold[j];
        }
    }

    // Solves J(u) delta = -F and writes delta.
    void newton_direction(const std::vector<double>& u, const std::vector<double>& F,
                          std::vector<double>& delta) const {
        const std::size_t n = u.size();
        const double c = dt / (h * h);
        std::vector<double> sub(n, 0.0), diag(n, 0.0), sup(n, 0.0), rhs(n);
        for (std::size_t j = 0; j < n; ++j) rhs[j] = -F[j];
        for (std::size_t j = 1; j + 1 < n; ++j) {
            sub[j] = -c * dphi(u[j - 1], m);
            diag[j] = 1.0 + 2.0 * c * dphi(u[j], m);
            sup[j] = -c * dphi(u[j + 1], m);
        }
        double corner_top = 0.0, corner_bottom = 0.0; // (0,2) and (n-1,n-3)
        if (bc.kind == BoundarySpec::Kind::Dirichlet) {
            diag[0] = 1.0;
            diag[n - 1] = 1.0;
        } else {
            diag[0] = -3.0 * dphi(u[0], m) / (2.0 * h);
            sup[0] = 4.0 * dphi(u[1], m) / (2.0 * h);
            corner_top = -dphi(u[2], m) / (2.0 * h);
            corner_bottom = dphi(u[n - 3], m) / (2.0 * h);
            sub[n - 1] = -4.0 * dphi(u[n - 2], m) / (2.0 * h);
            diag[n - 1] = 3.0 * dphi(u[n - 1], m) / (2.0 * h);
        }

        // fold the corner entries into the neighbouring rows
        if (corner_top != 0.0) {
            if (sup[1] == 0.0) throw NewtonDiverged("singular Jacobian (top corner)");
            const double fac = corner_top / sup[1];
            diag[0] -= fac * sub[1];
            sup[0] -= fac * diag[1];
            rhs[0] -= fac * rhs[1];
        }
        if (corner_bottom != 0.0) {
            if (sub[n - 2] == 0.0) throw NewtonDiverged("singular Jacobian (bottom corner)");
            const double fac = corner_bottom / sub[n - 2];
            sub[n - 1] -= fac * diag[n - 2];
            diag[n - 1] -= fac * sup[n - 2];
            rhs[n - 1] -= fac * rhs[n - 2];
        }

        // Thomas sweep
        delta.resize(n);
        std::vector<double> cp(n), dp(n);
        double piv = diag[0];
        if (std::fabs(piv) < 1e-300) throw NewtonDiverged("singular Jacobian");
        cp[0] = sup[0] / piv;
        dp[0] = rhs[0] / piv;
        for (std::size_t j = 1; j < n; ++j) {
            piv = diag[j] - sub[j] * cp[j - 1];
            if (std::fabs(piv) < 1e-300) throw NewtonDiverged("singular Jacobian");
            cp[j] = sup[j] / piv;
            dp[j] = (rhs[j] - sub[j] * dp[j - 1]) / piv;
        }
        delta[n - 1] = dp[n - 1];
        for (std::size_t j = n - 1; j-- > 0;) delta[j] = dp[j] - cp[j] * delta[j + 1];
    }
};

double max_abs(const std::vector<double>& v) {
    double r = 0.0;
    for (double x : v) r = std::max(r, std::fabs(x));
    return r;
}

} // namespace

BoundarySpec BoundarySpec::dirichlet_constant(double m, double half_width, double mu) {
    require_exponent(m);
    if (!(mu > 0.0)) throw ParameterOutOfRange("mu must be > 0");
    const double val = std::pow(mu * std::fabs(m) * half_width, 1.0 / m);
    return {Kind::Dirichlet, [val](double) { return val; }, [val](double) { return val; }};
}

BoundarySpec BoundarySpec::dirichlet_rates(double m, double half_width, TimeFn f, TimeFn g) {
    require_exponent(m);
    const double am = std::fabs(m);
    const double R = half_width;
    return {Kind::Dirichlet,
            [g = std::move(g), am, R, m](double t) { return std::pow(g(t) * am * R, 1.0 / m); },
            [f = std::move(f), am, R, m](double t) { return std::pow(f(t) * am * R, 1.0 / m); }};
}

BoundarySpec BoundarySpec::neumann_rates(TimeFn f, TimeFn g) {
    return {Kind::NeumannFlux, std::move(g), std::move(f)};
}

double PdeState::mass() const {
    const double h = spacing();
    double acc = 0.5 * (u.front() + u.back());
    for (std::size_t j = 1; j + 1 < u.size(); ++j) acc += u[j];
    return acc * h;
}

double PdeState::interp(double xq) const {
    const double h = spacing();
    const double R = half_width;
    if (xq <= -R) return u.front();
    if (xq >= R) return u.back();
    const double pos = (xq + R) / h;
    const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(pos), u.size() - 2);
    const double w = pos - static_cast<double>(j);
    return (1.0 - w) * u[j] + w * u[j + 1];
}

PdeState make_initial(const std::function<double(double)>& u0, double eps, double half_width,
                      std::size_t n_nodes) {
    if (n_nodes < 5) throw ParameterOutOfRange("need at least 5 grid nodes");
    if (eps < 0.0) throw ParameterOutOfRange("eps must be >= 0");
    PdeState s;
    s.half_width = half_width;
    s.t = 0.0;
    s.u.resize(n_nodes);
    double umin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n_nodes; ++j) {
        const double v = u0(s.x(j));
        if (v < 0.0) throw ParameterOutOfRange("initial datum must be nonnegative");
        umin = std::min(umin, v);
        s.u[j] = v + eps;
    }
    if (eps == 0.0 && umin <= 0.0)
        throw NonPositiveInitial("eps = 0 requires strictly positive initial data");
    return s;
}

StepReport step_in_place(PdeState& state, double dt, const BoundarySpec& bc, double m,
                         const SolveControls& controls, double positivity_floor) {
    require_exponent(m);
    if (!(dt > 0.0)) throw ParameterOutOfRange("dt must be > 0");
    const std::size_t n = state.u.size();
    if (n < 5) throw ParameterOutOfRange("need at least 5 grid nodes");

    const double h = state.spacing();
    const double t_new = state.t + dt;
    StepSystem sys(state.u, bc, m, h, dt, t_new);

    std::vector<double> u = state.u;
    std::vector<double> F, delta, cand, Fc;
    sys.residual(u, F);
    double rn = max_abs(F);

    StepReport report;
    int it = 0;
    while (rn >= controls.newton_tol) {
        if (++it > controls.newton_max_iter)
            throw NewtonDiverged("Newton iteration budget exhausted");
        sys.newton_direction(u, F, delta);
        double lambda = 1.0;
        bool accepted = false;
        for (int halv = 0; halv <= controls.max_damping_halvings; ++halv) {
            cand = u;
            for (std::size_t j = 0; j < n; ++j)
                cand[j] = std::max(u[j] + lambda * delta[j], positivity_floor);
            sys.residual(cand, Fc);
            const double rc = max_abs(Fc);
            if (rc < rn || rc < controls.newton_tol) {
                u.swap(cand);
                F.swap(Fc);
                rn = rc;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) throw NewtonDiverged("damping exhausted without residual decrease");
    }
    report.newton_iters = it;
    report.max_residual = rn;
    for (double v : u)
        if (v <= positivity_floor * (1.0 + 1e-9)) report.floor_active = true;

    state.u = std::move(u);
    state.t = t_new;
    return report;
}

std::pair<PdeState, StepReport> step(const PdeState& state, double dt, const BoundarySpec& bc,
                                     double m, const SolveControls& controls) {
    PdeState next = state;
    const double floor = controls.positivity_floor_rel *
                         *std::max_element(state.u.begin(), state.u.end());
    StepReport rep = step_in_place(next, dt, bc, m, controls, floor);
    return {std::move(next), rep};
}

double barrier_value(double m, double mu0, double R0, double x) {
    const double ax = std::fabs(x);
    if (ax <= R0) return std::numeric_limits<double>::infinity();
    return std::pow(mu0 * std::fabs(m) * (ax - R0), 1.0 / m);
}

namespace {

LedgerRow make_ledger_row(const PdeState& before, const PdeState& after, double dt, double m,
                          std::size_t j_left, std::size_t j_right,
                          const std::optional<std::pair<double, double>>& barrier,
                          int newton_iters) {
    const std::size_t n = after.u.size();
    const double h = after.spacing();
    LedgerRow row;
    row.t = after.t;
    row.dt = dt;
    row.mass = after.mass();
    row.newton_iters = newton_iters;

    auto ph = [m](double u) { return phi(u, m); };
    row.flux_left = (-3.0 * ph(after.u[0]) + 4.0 * ph(after.u[1]) - ph(after.u[2])) / (2.0 * h);
    row.flux_right =
        (3.0 * ph(after.u[n - 1]) - 4.0 * ph(after.u[n - 2]) + ph(after.u[n - 3])) / (2.0 * h);

    // scheme fluxes: the exact algebraic fluxes of the discrete mass balance
    row.scheme_flux_right = (ph(after.u[n - 1]) - ph(after.u[n - 2])) / h +
                            0.5 * h * (after.u[n - 1] - before.u[n - 1]) / dt;
    row.scheme_flux_left = (ph(after.u[1]) - ph(after.u[0])) / h -
                           0.5 * h * (after.u[0] - before.u[0]) / dt;
    row.conservation_residual = std::fabs(
        (row.mass - before.mass()) - dt * (row.scheme_flux_right - row.scheme_flux_left));

    if (after.t > 0.0) {
        double worst = 0.0;
        const double cap = 1.0 / ((1.0 - m) * after.t);
        for (std::size_t j = 0; j < n; ++j) {
            const double ut = (after.u[j] - before.u[j]) / dt;
            worst = std::max(worst, ut - after.u[j] * cap);
        }
        row.ab_residual = worst;
    }

    row.station_flux_left = (ph(after.u[j_left + 1]) - ph(after.u[j_left - 1])) / (2.0 * h);
    row.station_flux_right = (ph(after.u[j_right + 1]) - ph(after.u[j_right - 1])) / (2.0 * h);

    if (barrier) {
        const auto [mu0, R0] = *barrier;
        double worst = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double ax = std::fabs(after.x(j));
            if (ax > R0)
                worst = std::max(worst, after.u[j] - barrier_value(m, mu0, R0, after.x(j)));
        }
        row.barrier_violation = worst;
    }
    return row;
}

} // namespace

const PdeState& Trajectory::nearest_state(double t) const {
    if (states.empty()) throw Error("trajectory has no states");
    const PdeState* best = &states.front();
    double dist = std::fabs(states.front().t - t);
    for (const PdeState& s : states) {
        const double d = std::fabs(s.t - t);
        if (d < dist) {
            dist = d;
            best = &s;
        }
    }
    return *best;
}

Trajectory solve(const PdeState& initial, const BoundarySpec& bc, double m, double t_end,
                 const SolveControls& controls) {
    require_exponent(m);
    if (!(t_end > initial.t)) throw ParameterOutOfRange("t_end must exceed the initial time");

    const double h = initial.spacing();
    const double floor =
        controls.positivity_floor_rel * *std::max_element(initial.u.begin(), initial.u.end());
    double dt_base = controls.dt0 > 0.0 ? controls.dt0 : h;
    const double dt_max = controls.dt_max > 0.0 ? controls.dt_max : 10.0 * h;
    dt_base = std::min(dt_base, dt_max);

    std::vector<double> snaps = controls.snapshot_times;
    std::sort(snaps.begin(), snaps.end());

    Trajectory traj;
    traj.m = m;
    traj.half_width = initial.half_width;
    traj.initial_mass = initial.mass();
    traj.tracked_barrier = controls.barrier;
    traj.states.push_back(initial);

    const std::size_t n = initial.u.size();
    const double frac = controls.station_fraction;
    auto node_index = [&](double x) {
        const double pos = (x + initial.half_width) / h;
        const long j = std::lround(pos);
        return static_cast<std::size_t>(std::clamp<long>(j, 1, static_cast<long>(n) - 2));
    };
    const std::size_t j_right = node_index(frac * initial.half_width);
    const std::size_t j_left = node_index(-frac * initial.half_width);
    traj.station_x_left = initial.x(j_left);
    traj.station_x_right = initial.x(j_right);

    PdeState state = initial;
    std::size_t snap_idx = 0;
    while (snap_idx < snaps.size() && snaps[snap_idx] <= state.t + 1e-12) ++snap_idx;

    const double time_eps = 1e-12 * std::max(1.0, t_end);
    std::size_t steps = 0;
    while (state.t < t_end - time_eps) {
        if (++steps > controls.max_steps) throw Error("time step limit exceeded");
        while (snap_idx < snaps.size() && snaps[snap_idx] <= state.t + 1e-12) ++snap_idx;
        double target = t_end;
        if (snap_idx < snaps.size()) target = std::min(target, snaps[snap_idx]);
        const double dt_want = std::min(dt_base, target - state.t);

        PdeState before = state;
        StepReport rep;
        double dt_used = dt_want;
        while (true) {
            PdeState attempt = before;
            bool ok = false;
            try {
                rep = step_in_place(attempt, dt_used, bc, m, controls, floor);
                ok = !rep.floor_active;
            } catch (const NewtonDiverged&) {
                ok = false;
                if (dt_used * 0.5 < controls.dt_min) throw;
            }
            if (ok) {
                if (dt_used < dt_want) dt_base = dt_used; // persist failure-driven halving
                state = std::move(attempt);
                break;
            }
            dt_used *= 0.5;
            if (dt_used < controls.dt_min)
                throw PositivityLost("positivity floor still active at the minimum step");
        }

        traj.ledger.rows.push_back(
            make_ledger_row(before, state, dt_used, m, j_left, j_right, controls.barrier,
                            rep.newton_iters));

        if (snap_idx < snaps.size() && std::fabs(state.t - snaps[snap_idx]) <= 1e-9) {
            traj.states.push_back(state);
            ++snap_idx;
        }

        if (traj.ledger.rows.back().mass < controls.extinction_fraction * traj.initial_mass) {
            traj.extinction_reached = true;
            break;
        }
        if (rep.newton_iters <= controls.easy_iterations)
            dt_base = std::min(dt_base * controls.grow_factor, dt_max);
    }

    if (traj.states.empty() || std::fabs(traj.states.back().t - state.t) > 1e-12)
        traj.states.push_back(state);
    return traj;
}

double barrier_check(const Trajectory& traj, double mu0, double R0) {
    // the per-step ledger track covers every accepted step, but only against
    // the barrier the run was asked to record
    const bool tracked = traj.tracked_barrier && traj.tracked_barrier->first == mu0 &&
                         traj.tracked_barrier->second == R0;
    double worst = 0.0;
    if (tracked) {
        for (const LedgerRow& row : traj.ledger.rows)
            worst = std::max(worst, row.barrier_violation);
        return worst;
    }
    for (const PdeState& s : traj.states) {
        for (std::size_t j = 0; j < s.u.size(); ++j) {
            const double ax = std::fabs(s.x(j));
            if (ax > R0)
                worst = std::max(worst, s.u[j] - barrier_value(traj.m, mu0, R0, s.x(j)));
        }
    }
    return worst;
}

} // namespace vfd
