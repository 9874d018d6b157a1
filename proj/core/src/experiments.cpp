#include "vfd/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>

#include "vfd/errors.hpp"
#include "vfd/profile.hpp"
#include "vfd/selfsimilar.hpp"

namespace vfd {

// ---------------------------------------------------------------- TimeSpec

double TimeSpec::operator()(double t) const {
    switch (kind) {
    case Kind::Constant: return value;
    case Kind::Linear: return value + slope * t;
    case Kind::Step: {
        std::size_t i = std::upper_bound(times.begin(), times.end(), t) - times.begin();
        return values[i];
    }
    }
    return value;
}

double TimeSpec::integral(double t) const {
    switch (kind) {
    case Kind::Constant: return value * t;
    case Kind::Linear: return value * t + 0.5 * slope * t * t;
    case Kind::Step: {
        double acc = 0.0;
        double prev = 0.0;
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double hi = std::min(times[i], t);
            if (hi <= prev) break;
            acc += values[i] * (hi - prev);
            prev = hi;
        }
        if (t > prev) {
            std::size_t i = std::upper_bound(times.begin(), times.end(), prev) - times.begin();
            acc += values[i] * (t - prev);
        }
        return acc;
    }
    }
    return value * t;
}

double TimeSpec::min_on(double horizon) const {
    switch (kind) {
    case Kind::Constant: return value;
    case Kind::Linear: return std::min(value, value + slope * horizon);
    case Kind::Step: {
        double worst = std::numeric_limits<double>::infinity();
        double prev = 0.0;
        for (std::size_t i = 0; i <= times.size(); ++i) {
            if (prev > horizon) break;
            worst = std::min(worst, values[i]);
            if (i < times.size()) prev = times[i];
        }
        return worst;
    }
    }
    return value;
}

TimeSpec TimeSpec::step(std::vector<double> times, std::vector<double> values) {
    if (values.size() != times.size() + 1)
        throw ParameterOutOfRange("step spec needs one more value than breakpoints");
    if (!std::is_sorted(times.begin(), times.end()))
        throw ParameterOutOfRange("step breakpoints must be increasing");
    TimeSpec s;
    s.kind = Kind::Step;
    s.times = std::move(times);
    s.values = std::move(values);
    return s;
}

// ------------------------------------------------------------ InitialDatum

std::function<double(double)> make_datum(const InitialDatum& datum, double m) {
    switch (datum.kind) {
    case InitialDatum::Kind::Bump: {
        const double w = datum.width;
        const double h0 = 15.0 * datum.mass / (16.0 * w);
        return [w, h0](double x) {
            const double s = x / w;
            return std::fabs(s) < 1.0 ? h0 * (1.0 - s * s) * (1.0 - s * s) : 0.0;
        };
    }
    case InitialDatum::Kind::SelfSimilar: {
        auto sol = std::make_shared<SelfSimilarSolution>(
            SelfSimilarSolution{calibrated_profile(m, datum.mu_ss), datum.extinction_time});
        return [sol](double x) { return sol->value(x, 0.0); };
    }
    case InitialDatum::Kind::Custom: {
        if (datum.xs.size() != datum.us.size() || datum.xs.size() < 2)
            throw ParameterOutOfRange("custom datum needs matching xs/us with >= 2 samples");
        auto xs = std::make_shared<std::vector<double>>(datum.xs);
        auto us = std::make_shared<std::vector<double>>(datum.us);
        return [xs, us](double x) {
            if (x <= xs->front() || x >= xs->back()) return 0.0;
            const std::size_t i =
                std::upper_bound(xs->begin(), xs->end(), x) - xs->begin() - 1;
            const double w = (x - (*xs)[i]) / ((*xs)[i + 1] - (*xs)[i]);
            return (1.0 - w) * (*us)[i] + w * (*us)[i + 1];
        };
    }
    }
    throw ParameterOutOfRange("unknown datum kind");
}

namespace {

double nominal_mass(const InitialDatum& d) {
    switch (d.kind) {
    case InitialDatum::Kind::Bump: return d.mass;
    case InitialDatum::Kind::SelfSimilar: return 2.0 * d.mu_ss * d.extinction_time;
    case InitialDatum::Kind::Custom: {
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < d.xs.size(); ++i)
            acc += 0.5 * (d.us[i] + d.us[i + 1]) * (d.xs[i + 1] - d.xs[i]);
        return acc;
    }
    }
    return 0.0;
}

} // namespace

// ---------------------------------------------------------------- Window

std::vector<double> Window::positions() const {
    std::vector<double> xs(nx);
    for (std::size_t i = 0; i < nx; ++i)
        xs[i] = -half_width + 2.0 * half_width * static_cast<double>(i) /
                                  static_cast<double>(nx - 1);
    return xs;
}

std::vector<double> Window::times() const {
    std::vector<double> ts(nt);
    for (std::size_t i = 0; i < nt; ++i)
        ts[i] = t_begin + (t_end - t_begin) * static_cast<double>(i) /
                              static_cast<double>(nt - 1);
    return ts;
}

void ExperimentConfig::validate() const {
    if (!(m > -1.0 && m < 0.0)) throw ParameterOutOfRange("m must lie in (-1,0)");
    if (R_list.empty()) throw ParameterOutOfRange("R_list must not be empty");
    if (!std::is_sorted(R_list.begin(), R_list.end()) ||
        std::adjacent_find(R_list.begin(), R_list.end()) != R_list.end())
        throw ParameterOutOfRange("R_list must be strictly increasing");
    if (window.half_width >= R_list.front())
        throw WindowOutsideDomain("window wider than the smallest domain");
    if (!(window.t_begin > 0.0 && window.t_begin < window.t_end))
        throw ParameterOutOfRange("window times must satisfy 0 < a < b");
    if (window.t_end > t_end) throw ParameterOutOfRange("window extends past t_end");
    if (!(grid_h > 0.0 && dt0 > 0.0 && dt_max >= dt0))
        throw ParameterOutOfRange("resolution parameters must be positive, dt_max >= dt0");
    if (eps < 0.0) throw ParameterOutOfRange("eps must be >= 0");
}

// ----------------------------------------------------------- run plumbing

namespace {

Trajectory run_single_impl(const ExperimentConfig& cfg, double R, BoundarySpec::Kind kind,
                           const std::function<double(double)>& datum, const TimeSpec& f,
                           const TimeSpec& g, double t_end) {
    const std::size_t n = static_cast<std::size_t>(std::lround(2.0 * R / cfg.grid_h)) + 1;
    PdeState init = make_initial(datum, cfg.eps, R, n);

    SolveControls ctl;
    ctl.dt0 = cfg.dt0;
    ctl.dt_max = cfg.dt_max;
    ctl.snapshot_times = cfg.window.times();
    ctl.barrier = std::make_pair(cfg.u0.mu0, cfg.u0.R0);

    TimeFn ff = [f](double t) { return f(t); };
    TimeFn gg = [g](double t) { return g(t); };
    BoundarySpec bc = kind == BoundarySpec::Kind::Dirichlet
                          ? BoundarySpec::dirichlet_rates(cfg.m, R, ff, gg)
                          : BoundarySpec::neumann_rates(ff, gg);
    return solve(init, bc, cfg.m, t_end, ctl);
}

// Window sup of |a - b| at the given probe positions and times.
double window_sup(const Trajectory& a, const Trajectory& b, const std::vector<double>& xs,
                  const std::vector<double>& ts) {
    double worst = 0.0;
    for (double t : ts) {
        const PdeState& sa = a.nearest_state(t);
        const PdeState& sb = b.nearest_state(t);
        for (double x : xs) worst = std::max(worst, std::fabs(sa.interp(x) - sb.interp(x)));
    }
    return worst;
}

std::vector<double> dense_positions(const Window& w) {
    Window d = w;
    d.nx = 2 * w.nx - 1;
    return d.positions();
}

// Dispatch the runs in waves of cfg.threads tasks (0 = all at once);
// results land in index order, so the output is dispatch-independent.
template <typename Fn>
std::vector<Trajectory> run_many(const ExperimentConfig& cfg, std::size_t count, Fn&& fn) {
    std::vector<Trajectory> out(count);
    if (cfg.threads == 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
        return out;
    }
    const std::size_t wave = cfg.threads == 0 ? count : cfg.threads;
    for (std::size_t base = 0; base < count; base += wave) {
        const std::size_t hi = std::min(count, base + wave);
        std::vector<std::future<Trajectory>> futs;
        futs.reserve(hi - base);
        for (std::size_t i = base; i < hi; ++i)
            futs.push_back(std::async(std::launch::async, [&fn, i] { return fn(i); }));
        for (std::size_t i = base; i < hi; ++i) out[i] = futs[i - base].get();
    }
    return out;
}

} // namespace

Trajectory run_single(const ExperimentConfig& cfg, double R, BoundarySpec::Kind kind) {
    cfg.validate();
    auto datum = make_datum(cfg.u0, cfg.m);
    return run_single_impl(cfg, R, kind, datum, cfg.f, cfg.g, cfg.t_end);
}

// ----------------------------------------------------------- experiments

ConvergenceReport expanding_domain(const ExperimentConfig& cfg) {
    cfg.validate();
    auto datum = make_datum(cfg.u0, cfg.m);

    std::vector<Trajectory> runs = run_many(cfg, cfg.R_list.size(), [&](std::size_t i) {
        return run_single_impl(cfg, cfg.R_list[i], BoundarySpec::Kind::Dirichlet, datum, cfg.f,
                               cfg.g, cfg.t_end);
    });

    ConvergenceReport rep;
    rep.R_list = cfg.R_list;
    const std::vector<double> xs = cfg.window.positions();
    const std::vector<double> xs2 = dense_positions(cfg.window);
    const std::vector<double> ts = cfg.window.times();
    for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
        rep.d.push_back(window_sup(runs[k], runs[k + 1], xs, ts));
        rep.d_dense.push_back(window_sup(runs[k], runs[k + 1], xs2, ts));
    }

    rep.monotone = true;
    for (std::size_t k = 1; k < rep.d.size(); ++k)
        if (!(rep.d[k] < rep.d[k - 1])) rep.monotone = false;

    if (rep.d.size() >= 2) {
        // least-squares slope of log d against log R (pair anchored at R_k)
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(rep.d.size());
        for (std::size_t k = 0; k < rep.d.size(); ++k) {
            const double lx = std::log(cfg.R_list[k]);
            const double ly = std::log(std::max(rep.d[k], 1e-300));
            sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        }
        rep.fitted_decay = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }

    const Trajectory& largest = runs.back();
    rep.mass = mass_law_check(largest, cfg, /*dirichlet_tail=*/true);
    rep.slope = slope_at_infinity(largest, cfg);

    // extinction estimate from the mass slope over the window
    {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::size_t n = 0;
        for (const LedgerRow& row : largest.ledger.rows) {
            if (row.t < cfg.window.t_begin || row.t > cfg.window.t_end) continue;
            sx += row.t; sy += row.mass; sxx += row.t * row.t; sxy += row.t * row.mass;
            ++n;
        }
        if (n >= 2) {
            const double beta =
                (static_cast<double>(n) * sxy - sx * sy) / (static_cast<double>(n) * sxx - sx * sx);
            const double alpha = (sy - beta * sx) / static_cast<double>(n);
            if (beta < 0.0) rep.extinction_estimate = -alpha / beta;
        }
    }

    const double d_last = rep.d.empty() ? 0.0 : rep.d.back();
    rep.checks.push_back({"d_monotone_decreasing", rep.monotone ? 1.0 : 0.0, 1.0, rep.monotone});
    rep.checks.push_back({"d_last", d_last, cfg.tol.compact, d_last < cfg.tol.compact});
    rep.checks.push_back({"d_last_dense", rep.d_dense.empty() ? 0.0 : rep.d_dense.back(),
                          cfg.tol.compact,
                          rep.d_dense.empty() ? true : rep.d_dense.back() < cfg.tol.compact});
    rep.pass = true;
    for (const CheckResult& c : rep.checks) rep.pass = rep.pass && c.pass;
    return rep;
}

MassLawResult mass_law_check(const Trajectory& traj, const ExperimentConfig& cfg,
                             bool dirichlet_tail) {
    MassLawResult res;
    const double M0 = traj.initial_mass;
    // Barrier bound on the mass beyond the domain; identically zero for the
    // Neumann problem, where the domain mass is the whole story.
    if (dirichlet_tail) {
        const double p = 1.0 / cfg.m;
        const double R = traj.half_width;
        const double span = R - cfg.u0.R0;
        if (span > 0.0)
            res.tail_band = -2.0 * std::pow(cfg.u0.mu0 * std::fabs(cfg.m), p) *
                            std::pow(span, p + 1.0) / (p + 1.0);
    }
    for (const LedgerRow& row : traj.ledger.rows) {
        const double drained = cfg.f.integral(row.t) + cfg.g.integral(row.t);
        const double pred = M0 - drained;
        double dev;
        if (dirichlet_tail) {
            // Both the initial and the current tail beyond the domain lie in
            // [0, tail_band]; the law constrains |mass(t) + drained - M0| to
            // that same width.
            dev = std::max(0.0, std::fabs(row.mass + drained - M0) - res.tail_band);
        } else {
            dev = std::fabs(row.mass - pred);
        }
        const double rel = pred > 0.0 ? dev / pred : std::numeric_limits<double>::infinity();
        res.rows.push_back({row.t, row.mass, pred, rel});
        if (row.t >= cfg.window.t_begin && row.t <= cfg.window.t_end)
            res.max_rel_deviation = std::max(res.max_rel_deviation, rel);
    }
    const double tol = cfg.constant_mu ? cfg.tol.mass_const : cfg.tol.mass_general;
    res.pass = res.max_rel_deviation < tol;
    return res;
}

double extinction_time_estimate(const Trajectory& traj) {
    if (!traj.extinction_reached)
        throw NotNearExtinction("run stopped before the extinction region");
    const auto& rows = traj.ledger.rows;
    const std::size_t tail = std::max<std::size_t>(rows.size() / 10, 5);
    const std::size_t k0 = rows.size() > tail ? rows.size() - tail : 0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(rows.size() - k0);
    for (std::size_t k = k0; k < rows.size(); ++k) {
        sx += rows[k].t; sy += rows[k].mass; sxx += rows[k].t * rows[k].t;
        sxy += rows[k].t * rows[k].mass;
    }
    const double beta = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    if (!(beta < 0.0)) throw NotNearExtinction("mass curve not decreasing near the end");
    const double alpha = (sy - beta * sx) / n;
    return -alpha / beta;
}

ExtinctionResult extinction_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    if (!cfg.constant_mu)
        throw ParameterOutOfRange("extinction experiment expects constant-mu data");
    auto datum = make_datum(cfg.u0, cfg.m);
    const double R = cfg.R_list.back();
    const double mu = cfg.mu();

    auto run_to_extinction = [&](double rate) {
        ExperimentConfig local = cfg;
        local.f = TimeSpec::constant(rate);
        local.g = TimeSpec::constant(rate);
        const double horizon = 1.5 * nominal_mass(cfg.u0) / (2.0 * rate);
        ExperimentConfig probe = local;
        probe.t_end = horizon;
        probe.window.t_end = std::min(cfg.window.t_end, 0.9 * horizon);
        probe.window.t_begin = std::min(cfg.window.t_begin, 0.5 * probe.window.t_end);
        return run_single_impl(probe, R, BoundarySpec::Kind::NeumannFlux, datum, probe.f,
                               probe.g, horizon);
    };

    ExtinctionResult res;
    Trajectory a = run_to_extinction(mu);
    Trajectory b = run_to_extinction(2.0 * mu);
    res.T_formula = a.initial_mass / (2.0 * mu);
    res.T_formula_2mu = b.initial_mass / (4.0 * mu);
    res.T_estimate = extinction_time_estimate(a);
    res.T_estimate_2mu = extinction_time_estimate(b);
    res.rel_error = std::fabs(res.T_estimate - res.T_formula) / res.T_formula;
    res.ratio_error = std::fabs(res.T_estimate / res.T_estimate_2mu - 2.0) / 2.0;

    {
        ExperimentConfig mcfg = cfg;
        mcfg.f = TimeSpec::constant(mu);
        mcfg.g = TimeSpec::constant(mu);
        res.mass = mass_law_check(a, mcfg, /*dirichlet_tail=*/false);
    }

    res.checks.push_back({"extinction_rel_error", res.rel_error, cfg.tol.extinction_rel,
                          res.rel_error < cfg.tol.extinction_rel});
    res.checks.push_back({"extinction_ratio_error", res.ratio_error, cfg.tol.extinction_ratio,
                          res.ratio_error < cfg.tol.extinction_ratio});
    res.pass = true;
    for (const CheckResult& c : res.checks) res.pass = res.pass && c.pass;
    return res;
}

SlopeResult slope_at_infinity(const Trajectory& traj, const ExperimentConfig& cfg) {
    const double R = traj.half_width;
    const std::vector<double> fractions = {0.75, 0.85, 0.95};
    if (fractions.front() * R <= cfg.window.half_width)
        throw ProbeInsideWindow("slope probes must lie outside the comparison window");

    SlopeResult res;
    std::vector<double> frac_dev(fractions.size(), 0.0);
    for (double t : cfg.window.times()) {
        const PdeState& s = traj.nearest_state(t);
        for (std::size_t q = 0; q < fractions.size(); ++q) {
            for (int side : {-1, +1}) {
                const double x = side * fractions[q] * R;
                const double uv = s.interp(x);
                const double sl = std::pow(uv, cfg.m) / (cfg.m * x);
                res.samples.push_back({x, t, sl});
                const double dev =
                    side > 0 ? std::fabs(sl + cfg.f(t)) : std::fabs(sl - cfg.g(t));
                frac_dev[q] = std::max(frac_dev[q], dev);
                if (q == 0) { // the 0.75 R station carries the pass check
                    if (side > 0) res.dev_right = std::max(res.dev_right, dev);
                    else res.dev_left = std::max(res.dev_left, dev);
                }
            }
        }
    }
    res.shrinks_outward = true;
    for (std::size_t q = 1; q < frac_dev.size(); ++q)
        if (!(frac_dev[q] <= frac_dev[q - 1])) res.shrinks_outward = false;
    res.pass = res.dev_right < cfg.tol.slope && res.dev_left < cfg.tol.slope;
    return res;
}

CompareResult compare_dirichlet_neumann(const ExperimentConfig& cfg) {
    cfg.validate();
    const double mu0_hyp = std::min(cfg.f.min_on(cfg.t_end), cfg.g.min_on(cfg.t_end));
    if (!(mu0_hyp > 0.0))
        throw HypothesisViolated("boundary rates must stay >= some mu0 > 0");
    auto datum = make_datum(cfg.u0, cfg.m);

    const std::size_t nr = cfg.R_list.size();
    std::vector<Trajectory> runs = run_many(cfg, 2 * nr, [&](std::size_t i) {
        const double R = cfg.R_list[i % nr];
        const auto kind =
            i < nr ? BoundarySpec::Kind::Dirichlet : BoundarySpec::Kind::NeumannFlux;
        return run_single_impl(cfg, R, kind, datum, cfg.f, cfg.g, cfg.t_end);
    });

    CompareResult res;
    res.R_list = cfg.R_list;
    const std::vector<double> xs = cfg.window.positions();
    const std::vector<double> ts = cfg.window.times();
    for (std::size_t k = 0; k < nr; ++k)
        res.diffs.push_back(window_sup(runs[k], runs[nr + k], xs, ts));
    res.decreasing = true;
    for (std::size_t k = 1; k < nr; ++k)
        if (!(res.diffs[k] < res.diffs[k - 1])) res.decreasing = false;
    res.final_diff = res.diffs.back();

    res.checks.push_back({"dn_decreasing", res.decreasing ? 1.0 : 0.0, 1.0, res.decreasing});
    res.checks.push_back(
        {"dn_final", res.final_diff, cfg.tol.equal, res.final_diff < cfg.tol.equal});
    res.pass = res.decreasing && res.final_diff < cfg.tol.equal;
    return res;
}

double ordered_pair_check(const ExperimentConfig& cfg, const TimeSpec& f1, const TimeSpec& f2,
                          const InitialDatum& u01, const InitialDatum& u02) {
    cfg.validate();
    const double R = cfg.R_list.back();
    auto d1 = make_datum(u01, cfg.m);
    auto d2 = make_datum(u02, cfg.m);

    // hypothesis checks: u01 <= u02 nodewise, f1 > f2 on [0, t_end]
    const std::size_t n = static_cast<std::size_t>(std::lround(2.0 * R / cfg.grid_h)) + 1;
    for (std::size_t j = 0; j < n; ++j) {
        const double x = -R + 2.0 * R * static_cast<double>(j) / static_cast<double>(n - 1);
        if (d1(x) > d2(x) + 1e-14)
            throw HypothesisViolated("initial data not ordered u01 <= u02");
    }
    for (int i = 0; i <= 1000; ++i) {
        const double t = cfg.t_end * i / 1000.0;
        if (!(f1(t) > f2(t))) throw HypothesisViolated("rates not ordered f1 > f2");
    }

    ExperimentConfig c1 = cfg;
    c1.u0 = u01;
    c1.f = f1;
    c1.g = f1;
    c1.constant_mu = false;
    ExperimentConfig c2 = cfg;
    c2.u0 = u02;
    c2.f = f2;
    c2.g = f2;
    c2.constant_mu = false;

    Trajectory t1 = run_single_impl(c1, R, BoundarySpec::Kind::Dirichlet, d1, f1, f1, cfg.t_end);
    Trajectory t2 = run_single_impl(c2, R, BoundarySpec::Kind::Dirichlet, d2, f2, f2, cfg.t_end);

    double worst = 0.0;
    for (double t : cfg.window.times()) {
        const PdeState& s1 = t1.nearest_state(t);
        const PdeState& s2 = t2.nearest_state(t);
        for (double x : cfg.window.positions())
            worst = std::max(worst, s1.interp(x) - s2.interp(x));
    }
    return worst;
}

CompositionResult step_flux_composition(const ExperimentConfig& cfg, const TimeSpec& step_f,
                                        const std::vector<int>& dyadic_levels) {
    cfg.validate();
    if (step_f.kind != TimeSpec::Kind::Step)
        throw ParameterOutOfRange("composition requires a step function");
    auto datum = make_datum(cfg.u0, cfg.m);
    const double R = cfg.R_list.back();
    const std::vector<double> xs = cfg.window.positions();
    const std::vector<double> ts = cfg.window.times();

    CompositionResult res;

    // (i) composed vs direct
    {
        Trajectory direct = run_single_impl(cfg, R, BoundarySpec::Kind::Dirichlet, datum,
                                            step_f, step_f, cfg.t_end);

        // restart a constant-rate solve on each partition cell
        std::vector<double> cuts = {0.0};
        for (double a : step_f.times)
            if (a > 0.0 && a < cfg.t_end) cuts.push_back(a);
        cuts.push_back(cfg.t_end);

        const std::size_t n = static_cast<std::size_t>(std::lround(2.0 * R / cfg.grid_h)) + 1;
        PdeState state = make_initial(datum, cfg.eps, R, n);
        std::vector<PdeState> snapshots;
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            const double rate = step_f(0.5 * (cuts[c] + cuts[c + 1]));
            SolveControls ctl;
            ctl.dt0 = cfg.dt0;
            ctl.dt_max = cfg.dt_max;
            for (double t : ts)
                if (t > cuts[c] + 1e-12 && t <= cuts[c + 1] + 1e-12)
                    ctl.snapshot_times.push_back(t);
            BoundarySpec bc = BoundarySpec::dirichlet_rates(
                cfg.m, R, [rate](double) { return rate; }, [rate](double) { return rate; });
            Trajectory part = solve(state, bc, cfg.m, cuts[c + 1], ctl);
            for (const PdeState& s : part.states)
                if (s.t > cuts[c] + 1e-12) snapshots.push_back(s);
            state = part.states.back();
        }

        Trajectory composed;
        composed.m = cfg.m;
        composed.half_width = R;
        composed.states = std::move(snapshots);
        res.composed_vs_direct = window_sup(direct, composed, xs, ts);
    }

    // (ii) dyadic sup-envelopes of the continuous data cfg.f
    if (!dyadic_levels.empty()) {
        const double M0 = nominal_mass(cfg.u0);
        // horizon with \int_0^T (f+g) = M0, symmetric data g = f
        double lo = 0.0, hi = 1.0;
        while (2.0 * cfg.f.integral(hi) < M0) hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (2.0 * cfg.f.integral(mid) < M0 ? lo : hi) = mid;
        }
        const double T = 0.5 * (lo + hi);

        std::vector<TimeSpec> envelopes;
        for (int k : dyadic_levels) {
            const int cells = 1 << k;
            std::vector<double> times, values;
            for (int i = 1; i < cells; ++i) times.push_back(T * i / cells);
            for (int i = 0; i < cells; ++i) {
                const double a = T * i / cells, b = T * (i + 1) / cells;
                values.push_back(std::max(cfg.f(a), cfg.f(b))); // sup on the cell
            }
            envelopes.push_back(TimeSpec::step(std::move(times), std::move(values)));
        }

        std::vector<Trajectory> vk = run_many(cfg, envelopes.size(), [&](std::size_t q) {
            return run_single_impl(cfg, R, BoundarySpec::Kind::Dirichlet, datum, envelopes[q],
                                   envelopes[q], cfg.t_end);
        });
        for (std::size_t q = 0; q + 1 < vk.size(); ++q) {
            for (double t : ts) {
                const PdeState& sa = vk[q].nearest_state(t);
                const PdeState& sb = vk[q + 1].nearest_state(t);
                for (double x : xs)
                    res.envelope_defect =
                        std::max(res.envelope_defect, sa.interp(x) - sb.interp(x));
            }
        }
    }

    res.checks.push_back({"composed_vs_direct", res.composed_vs_direct, cfg.tol.equal,
                          res.composed_vs_direct < cfg.tol.equal});
    res.checks.push_back({"envelope_monotone_defect", res.envelope_defect, cfg.tol.order,
                          res.envelope_defect <= cfg.tol.order});
    res.pass = true;
    for (const CheckResult& c : res.checks) res.pass = res.pass && c.pass;
    return res;
}

FluxWindowResult flux_at_infinity_check(const Trajectory& traj, const TimeSpec& f,
                                        const TimeSpec& g, double t1, double t2) {
    if (!(0.0 < t1 && t1 < t2)) throw ParameterOutOfRange("need 0 < t1 < t2");
    FluxWindowResult res;
    for (const LedgerRow& row : traj.ledger.rows) {
        if (row.t <= t1 || row.t > t2 + 1e-12) continue;
        res.right_integral += row.station_flux_right * row.dt;
        res.left_integral += row.station_flux_left * row.dt;
    }
    res.right_expected = -(f.integral(t2) - f.integral(t1));
    res.left_expected = g.integral(t2) - g.integral(t1);
    const auto rel = [](double got, double want) {
        const double scale = std::fabs(want);
        return scale > 1e-12 ? std::fabs(got - want) / scale : std::fabs(got - want);
    };
    res.right_rel_dev = rel(res.right_integral, res.right_expected);
    res.left_rel_dev = rel(res.left_integral, res.left_expected);
    return res;
}

} // namespace vfd
