// vfd: batch driver for the very fast diffusion laboratory.
//
// Subcommands: profile, green-check, solve, converge, compare, extinction.
// Each reads a flat key = value config, writes CSV/JSON artifacts plus a
// manifest.json into --out, and exits 0 iff every asserted check passed.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "vfd/config.hpp"
#include "vfd/errors.hpp"
#include "vfd/experiments.hpp"
#include "vfd/green.hpp"
#include "vfd/output.hpp"
#include "vfd/profile.hpp"
#include "vfd/selfsimilar.hpp"
#include "vfd/solver.hpp"

namespace fs = std::filesystem;
using namespace vfd;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitChecksFailed = 1;
constexpr int kExitError = 2;

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void ensure_outdir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + dir.string() + "'");
    // probe writability early so failures map to the I/O exit code
    const fs::path probe = dir / ".write_probe";
    {
        std::ofstream out(probe);
        if (!out) throw Error("output directory '" + dir.string() + "' is not writable");
    }
    fs::remove(probe, ec);
}

// Deterministic LCG for the brute-force kernel triples; the pipeline itself
// has no randomness anywhere.
struct Lcg {
    std::uint64_t state = 0x9e3779b97f4a7c15ull;
    double uniform() {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        return static_cast<double>(state >> 11) / 9007199254740992.0;
    }
};

int run_profile(const RunConfig& cfg, const fs::path& out, const std::string& hash,
                bool verbose) {
    const ProfileParams& p = cfg.profile;
    ProfileCurve curve;
    if (p.use_eta) {
        curve = (p.dr > 0.0 && p.r_max > 0.0) ? integrate_profile(p.m, p.eta, p.r_max, p.dr)
                                              : integrate_profile_auto(p.m, p.eta);
    } else {
        curve = calibrated_profile(p.m, p.mu);
    }
    ProfileMass mass = profile_half_mass(curve);
    if (!p.use_eta) curve.mu = p.mu;

    ProfileDiagnostics diag = profile_diagnostics(curve);
    const double target_mu = p.use_eta ? mass.total : p.mu;
    SandwichFit fit = fit_sandwich(curve, target_mu);

    std::vector<CheckResult> checks;
    checks.push_back({"f_strictly_decreasing", diag.monotonicity, 0.0, diag.monotonicity < 0.0});
    checks.push_back({"pointwise_bound_margin", diag.bound_margin, 0.0, diag.bound_margin < 0.0});
    checks.push_back({"h_positive_margin", diag.h_margin, 0.0, diag.h_margin < 0.0});
    checks.push_back({"center_slope", diag.center_slope, 10.0 * curve.dr,
                      diag.center_slope < 10.0 * curve.dr});
    if (!p.use_eta) {
        const double rel = std::fabs(mass.total - p.mu) / p.mu;
        checks.push_back({"calibrated_mass_rel_error", rel, 5e-3, rel < 5e-3});
    }
    checks.push_back({"sandwich_upper_violation", fit.upper_violation, 1e-12,
                      fit.upper_violation <= 1e-12});
    checks.push_back({"sandwich_lower_violation", fit.lower_violation, 1e-12,
                      fit.lower_violation <= 1e-12});

    write_profile_csv(out / "profile.csv", curve);
    write_text(out / "profile.json", profile_metadata_json(curve, mass));
    const bool pass = write_manifest(out / "manifest.json", hash, {{"calibration", 5e-3}}, checks);
    if (verbose)
        std::cout << "profile: eta=" << curve.eta << " mass=" << mass.total
                  << " sandwich a=" << fit.a << " r0=" << fit.r0 << "\n";
    return pass ? kExitPass : kExitChecksFailed;
}

int run_green_check(const RunConfig& cfg, const fs::path& out, const std::string& hash,
                    bool dump_kernels, bool verbose) {
    const GreenCheckParams& p = cfg.green;
    std::vector<CheckResult> checks;

    // Second-difference inversion over the refinement ladder. The trapezoid
    // kernel application inverts the 3-point Laplacian to rounding, so the
    // O(h^2) claim is asserted as err <= h^2 per level; the O(h^2) rate
    // itself is measured against the closed-form sine image.
    double worst_ratio = 0.0;
    std::vector<double> eig_errs;
    for (std::size_t level = 0; level < p.refine_levels; ++level) {
        const std::size_t n = ((p.nodes - 1) << level) + 1;
        GreenOperator op(p.half_width, n);
        std::vector<double> f(n);
        for (std::size_t j = 0; j < n; ++j)
            f[j] = std::sin(M_PI * op.nodes()[j] / p.half_width);
        std::vector<double> g = op.apply(f);
        const double h = op.spacing();
        double worst = 0.0, eig = 0.0;
        const double factor = std::pow(p.half_width / M_PI, 2.0);
        for (std::size_t j = 1; j + 1 < n; ++j) {
            worst = std::max(worst,
                             std::fabs((g[j - 1] - 2.0 * g[j] + g[j + 1]) / (h * h) - f[j]));
            eig = std::max(eig, std::fabs(g[j] + factor * f[j]));
        }
        worst_ratio = std::max(worst_ratio, worst / (h * h));
        eig_errs.push_back(eig);
    }
    double min_order = 10.0;
    for (std::size_t k = 0; k + 1 < eig_errs.size(); ++k)
        min_order = std::min(min_order, std::log2(eig_errs[k] / eig_errs[k + 1]));
    checks.push_back({"d2_inversion_err_over_h2", worst_ratio, 1.0, worst_ratio <= 1.0});
    checks.push_back({"eigenfunction_order", min_order, 1.8, min_order >= 1.8});

    GreenOperator op(p.half_width, p.nodes);
    const std::size_t n = p.nodes;

    // G*(g'') = g - g(0) for g = x^2
    {
        std::vector<double> two(n, 2.0);
        std::vector<double> gs = op.apply_star(two);
        double worst = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            worst = std::max(worst, std::fabs(gs[j] - op.nodes()[j] * op.nodes()[j]));
        checks.push_back({"recentred_identity_x2", worst, 1e-6, worst < 1e-6});
    }

    // averaged-kernel identity on 100 deterministic triples
    {
        Lcg rng;
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const double R = 1.0 + 9.0 * rng.uniform();
            const double r = R * (0.05 + 0.9 * rng.uniform());
            const double y = R * (2.0 * rng.uniform() - 1.0);
            const double lhs = 0.5 * (GreenOperator::kernel(R, r, y) +
                                      GreenOperator::kernel(R, -r, y)) -
                               GreenOperator::kernel(R, 0.0, y);
            worst = std::max(worst, std::fabs(lhs - averaged_kernel(r, y)));
        }
        checks.push_back({"averaged_kernel_identity", worst, 1e-12, worst < 1e-12});
    }

    // decomposition consistency on a smooth positive sample
    {
        std::vector<double> f(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double x = op.nodes()[j];
            f[j] = 1.0 / (1.0 + x * x);
        }
        auto gs = op.apply_star(f);
        auto dec = op.asymptotic_decomposition(f, -0.5);
        double worst = 0.0, scale = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            worst = std::max(worst, std::fabs(dec.i1[j] + dec.i2[j] + dec.i3[j] - gs[j]));
            scale = std::max(scale, std::fabs(gs[j]));
        }
        const double rel = worst / std::max(scale, 1e-300);
        checks.push_back({"decomposition_consistency", rel, 1e-8, rel < 1e-8});
    }

    if (dump_kernels) write_kernel_csv(out / "kernels.csv", op);
    const bool pass = write_manifest(out / "manifest.json", hash,
                                     {{"identity", 1e-6}, {"averaged", 1e-12}, {"order", 1.8}},
                                     checks);
    if (verbose) std::cout << "green-check: inversion order " << min_order << "\n";
    return pass ? kExitPass : kExitChecksFailed;
}

int run_solve(const RunConfig& cfg, const fs::path& out, const std::string& hash, bool verbose) {
    ExperimentConfig exp = cfg.exp;
    exp.R_list = {cfg.solve.half_width};
    exp.validate();

    auto datum = make_datum(exp.u0, exp.m);
    const double R = cfg.solve.half_width;
    const std::size_t n = static_cast<std::size_t>(std::lround(2.0 * R / exp.grid_h)) + 1;
    PdeState init = make_initial(datum, exp.eps, R, n);

    SolveControls ctl;
    ctl.dt0 = exp.dt0;
    ctl.dt_max = exp.dt_max;
    ctl.snapshot_times = cfg.solve.snapshots.empty() ? exp.window.times() : cfg.solve.snapshots;
    ctl.barrier = std::make_pair(exp.u0.mu0, exp.u0.R0);

    TimeFn f = [spec = exp.f](double t) { return spec(t); };
    TimeFn g = [spec = exp.g](double t) { return spec(t); };
    BoundarySpec bc = cfg.solve.neumann ? BoundarySpec::neumann_rates(f, g)
                                        : BoundarySpec::dirichlet_rates(exp.m, R, f, g);
    Trajectory traj = solve(init, bc, exp.m, exp.t_end, ctl);

    double min_u = std::numeric_limits<double>::infinity();
    for (const PdeState& s : traj.states)
        for (double v : s.u) min_u = std::min(min_u, v);
    double worst_cons = 0.0, worst_ab = 0.0;
    for (const LedgerRow& row : traj.ledger.rows) {
        worst_cons = std::max(worst_cons,
                              row.conservation_residual / std::max(traj.initial_mass, 1e-300));
        if (row.t >= exp.window.t_begin) worst_ab = std::max(worst_ab, row.ab_residual);
    }

    std::vector<CheckResult> checks;
    checks.push_back({"positivity_min_u", min_u, 0.0, min_u > 0.0});
    checks.push_back({"conservation_residual_rel", worst_cons, 1e-8, worst_cons < 1e-8});
    const double ab_tol = 10.0 * (exp.grid_h * exp.grid_h + exp.dt_max);
    checks.push_back({"ab_residual_window", worst_ab, ab_tol, worst_ab <= ab_tol});

    MassLawResult mass = mass_law_check(traj, exp, !cfg.solve.neumann);
    write_trajectory_csv(out / "trajectory.csv", traj);
    write_ledger_csv(out / "ledger.csv", traj);
    write_mass_csv(out / "mass.csv", mass);
    const bool pass =
        write_manifest(out / "manifest.json", hash, tolerance_map(exp.tol), checks);
    if (verbose)
        std::cout << "solve: " << traj.ledger.rows.size() << " steps, final mass "
                  << traj.states.back().mass()
                  << (traj.extinction_reached ? " (extinction reached)" : "") << "\n";
    return pass ? kExitPass : kExitChecksFailed;
}

int run_converge(const RunConfig& cfg, const fs::path& out, const std::string& hash,
                 bool verbose) {
    ConvergenceReport report = expanding_domain(cfg.exp);
    write_text(out / "report.json", convergence_report_json(report, cfg.exp));
    write_dk_csv(out / "dk.csv", report);
    write_mass_csv(out / "mass.csv", report.mass);
    write_slope_csv(out / "slope.csv", report.slope);

    std::vector<CheckResult> checks = report.checks;
    checks.push_back({"mass_law_max_rel_dev", report.mass.max_rel_deviation,
                      cfg.exp.constant_mu ? cfg.exp.tol.mass_const : cfg.exp.tol.mass_general,
                      report.mass.pass});
    const bool pass =
        write_manifest(out / "manifest.json", hash, tolerance_map(cfg.exp.tol), checks);
    if (verbose) {
        std::cout << "converge: d =";
        for (double d : report.d) std::cout << ' ' << d;
        std::cout << "\n";
    }
    return pass ? kExitPass : kExitChecksFailed;
}

int run_compare(const RunConfig& cfg, const fs::path& out, const std::string& hash,
                bool verbose) {
    CompareResult result = compare_dirichlet_neumann(cfg.exp);
    write_text(out / "report.json", compare_report_json(result, cfg.exp));
    {
        std::ostringstream csv;
        csv << "k,R,diff\n";
        for (std::size_t k = 0; k < result.diffs.size(); ++k)
            csv << (k + 1) << ',' << format_number(result.R_list[k]) << ','
                << format_number(result.diffs[k]) << '\n';
        write_text(out / "dn.csv", csv.str());
    }
    const bool pass =
        write_manifest(out / "manifest.json", hash, tolerance_map(cfg.exp.tol), result.checks);
    if (verbose) {
        std::cout << "compare: diffs =";
        for (double d : result.diffs) std::cout << ' ' << d;
        std::cout << "\n";
    }
    return pass ? kExitPass : kExitChecksFailed;
}

int run_extinction(const RunConfig& cfg, const fs::path& out, const std::string& hash,
                   bool verbose) {
    ExtinctionResult result = extinction_experiment(cfg.exp);
    write_text(out / "report.json", extinction_report_json(result, cfg.exp));
    write_mass_csv(out / "mass.csv", result.mass);
    const bool pass =
        write_manifest(out / "manifest.json", hash, tolerance_map(cfg.exp.tol), result.checks);
    if (verbose)
        std::cout << "extinction: T_est=" << result.T_estimate
                  << " T_formula=" << result.T_formula << "\n";
    return pass ? kExitPass : kExitChecksFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"very fast diffusion laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    unsigned threads = 0;
    bool dump_kernels = false;
    bool verbose = false;

    struct SubEntry {
        Subcommand sub;
        CLI::App* cmd;
    };
    std::vector<SubEntry> entries;
    for (Subcommand s : {Subcommand::Profile, Subcommand::GreenCheck, Subcommand::Solve,
                         Subcommand::Converge, Subcommand::Compare, Subcommand::Extinction}) {
        CLI::App* cmd = app.add_subcommand(subcommand_name(s));
        cmd->add_option("--config", config_path, "flat key = value config file")->required();
        cmd->add_option("--out", out_dir, "output directory (default: out)");
        cmd->add_option("--threads", threads, "parallel solves (0 = one per run)");
        cmd->add_flag("--dump-kernels", dump_kernels, "emit kernels.csv (green-check)");
        cmd->add_flag("-v,--verbose", verbose, "print a one-line summary");
        entries.push_back({s, cmd});
    }

    CLI11_PARSE(app, argc, argv);

    Subcommand sub = Subcommand::Converge;
    for (const SubEntry& e : entries)
        if (e.cmd->parsed()) sub = e.sub;

    try {
        const std::string text = read_file(config_path);
        RunConfig cfg = parse_config(text, sub);
        cfg.exp.threads = threads;
        const std::string hash = config_hash(text);
        const fs::path out(out_dir);
        ensure_outdir(out);

        switch (sub) {
        case Subcommand::Profile: return run_profile(cfg, out, hash, verbose);
        case Subcommand::GreenCheck:
            return run_green_check(cfg, out, hash, dump_kernels, verbose);
        case Subcommand::Solve: return run_solve(cfg, out, hash, verbose);
        case Subcommand::Converge: return run_converge(cfg, out, hash, verbose);
        case Subcommand::Compare: return run_compare(cfg, out, hash, verbose);
        case Subcommand::Extinction: return run_extinction(cfg, out, hash, verbose);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
