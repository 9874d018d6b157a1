#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace vfd {

using TimeFn = std::function<double(double)>;

/// Boundary treatment for the interval problem on (-R, R).
///
/// Dirichlet: left/right are the prescribed positive boundary values
///   u(-R,t) = left(t), u(R,t) = right(t).
/// NeumannFlux: left/right are the prescribed loss rates g, f with the sign
///   convention (u^m/m)_x(-R,t) = g(t) and (u^m/m)_x(R,t) = -f(t), so that
///   positive f, g drain mass from the respective ends.
struct BoundarySpec {
    enum class Kind { Dirichlet, NeumannFlux };
    Kind kind = Kind::Dirichlet;
    TimeFn left;
    TimeFn right;

    /// Dirichlet data u(+-R,t) = (mu |m| R)^{1/m}.
    static BoundarySpec dirichlet_constant(double m, double half_width, double mu);
    /// Dirichlet data u(R,t) = (f(t)|m|R)^{1/m}, u(-R,t) = (g(t)|m|R)^{1/m}.
    static BoundarySpec dirichlet_rates(double m, double half_width, TimeFn f, TimeFn g);
    /// Flux data (u^m/m)_x(R,t) = -f(t), (u^m/m)_x(-R,t) = g(t).
    static BoundarySpec neumann_rates(TimeFn f, TimeFn g);
};

/// Positive solution samples on the uniform grid x_j = -R + j h at one time.
struct PdeState {
    double half_width = 0.0;
    double t = 0.0;
    std::vector<double> u;

    double spacing() const { return 2.0 * half_width / static_cast<double>(u.size() - 1); }
    double x(std::size_t j) const { return -half_width + spacing() * static_cast<double>(j); }
    double mass() const; ///< trapezoid quadrature of u
    /// Linear interpolation of u at position xq (clamped to the grid range).
    double interp(double xq) const;
};

/// Sample u0 on the grid and add the regularization shift.
/// Throws NonPositiveInitial when eps == 0 and min u0 == 0.
PdeState make_initial(const std::function<double(double)>& u0, double eps, double half_width,
                      std::size_t n_nodes);

/// One ledger record per accepted time step.
struct LedgerRow {
    double t = 0.0;  ///< time at the end of the step
    double dt = 0.0;
    double mass = 0.0;         ///< trapezoid mass after the step
    double flux_left = 0.0;    ///< one-sided O(h^2) difference of u^m/m at -R
    double flux_right = 0.0;   ///< one-sided O(h^2) difference of u^m/m at +R
    double ab_residual = 0.0;  ///< max(u_t - u/((1-m)t), 0) over the grid
    int newton_iters = 0;
    // scheme-level fluxes making the discrete mass balance an identity:
    // mass(new) - mass(old) = dt * (scheme_flux_right - scheme_flux_left)
    double scheme_flux_left = 0.0;
    double scheme_flux_right = 0.0;
    double conservation_residual = 0.0; ///< |identity defect|, rounding-level
    double station_flux_left = 0.0;     ///< centered flux at the left probe station
    double station_flux_right = 0.0;    ///< centered flux at the right probe station
    double barrier_violation = 0.0;     ///< max (u - phi)+ beyond R0 (if tracked)
};

struct MassLedger {
    std::vector<LedgerRow> rows;
};

/// Time-ordered snapshots plus the per-step ledger of one solve.
struct Trajectory {
    double m = 0.0;
    double half_width = 0.0;
    std::vector<PdeState> states; ///< initial state, requested snapshots, final state
    MassLedger ledger;
    bool extinction_reached = false;
    double initial_mass = 0.0;
    double station_x_left = 0.0;  ///< actual node positions of the flux stations
    double station_x_right = 0.0;
    /// barrier parameters the ledger rows were tracked against, if any
    std::optional<std::pair<double, double>> tracked_barrier;

    /// Snapshot whose time is nearest to t; snapshots land on requested times
    /// exactly because the driver clips steps to them.
    const PdeState& nearest_state(double t) const;
};

struct SolveControls {
    double dt0 = -1.0;    ///< initial step; defaults to h when <= 0
    double dt_max = -1.0; ///< growth cap; defaults to 10 h when <= 0
    double dt_min = 1e-12;
    double grow_factor = 1.2;
    int easy_iterations = 4;      ///< grow dt when Newton needed at most this many
    double newton_tol = 1e-10;    ///< absolute, on the max residual
    int newton_max_iter = 40;
    int max_damping_halvings = 8;
    double positivity_floor_rel = 1e-12; ///< floor = rel * max(u0)
    double extinction_fraction = 0.02;   ///< stop when mass drops below this fraction
    std::vector<double> snapshot_times;  ///< states recorded at these times exactly
    double station_fraction = 0.75;      ///< flux probe stations at +-fraction*R
    /// When set, per-step barrier violation against
    /// phi(x) = (mu0 |m| (|x|-R0))^{1/m} is tracked in the ledger.
    std::optional<std::pair<double, double>> barrier; ///< (mu0, R0)
    std::size_t max_steps = 2'000'000;
};

struct StepReport {
    int newton_iters = 0;
    bool floor_active = false; ///< positivity floor binding at convergence
    double max_residual = 0.0;
};

/// One backward-Euler step of u_t = (u^m/m)_xx by damped Newton on the
/// tridiagonal system (flux rows are reduced to tridiagonal form before the
/// sweep). Iterates are clamped at the positivity floor.
/// Throws NewtonDiverged when the iteration budget or damping is exhausted.
StepReport step_in_place(PdeState& state, double dt, const BoundarySpec& bc, double m,
                         const SolveControls& controls, double positivity_floor);

std::pair<PdeState, StepReport> step(const PdeState& state, double dt, const BoundarySpec& bc,
                                     double m, const SolveControls& controls);

/// Adaptive march to t_end: halve dt on Newton failure or an active floor,
/// grow by grow_factor on easy steps, clip to snapshot times. Stops early
/// (flagged, not an error) when the mass falls below the extinction fraction.
Trajectory solve(const PdeState& initial, const BoundarySpec& bc, double m, double t_end,
                 const SolveControls& controls);

/// Stationary far-field barrier (mu0 |m| (|x| - R0))^{1/m}; +infinity inside
/// |x| <= R0.
double barrier_value(double m, double mu0, double R0, double x);

/// Max over recorded data of (u - phi)+ on R0 < |x| <= R. Uses the per-step
/// ledger track when available, otherwise the stored snapshots.
double barrier_check(const Trajectory& traj, double mu0, double R0);

} // namespace vfd
