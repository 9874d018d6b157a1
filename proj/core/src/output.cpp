#include "vfd/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "vfd/errors.hpp"

namespace vfd {

using ordered_json = nlohmann::ordered_json;

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

ordered_json checks_json(const std::vector<CheckResult>& checks) {
    ordered_json arr = ordered_json::array();
    for (const CheckResult& c : checks)
        arr.push_back({{"name", c.name},
                       {"value", c.value},
                       {"threshold", c.threshold},
                       {"pass", c.pass}});
    return arr;
}

ordered_json mass_json(const MassLawResult& mass) {
    return {{"max_rel_deviation", mass.max_rel_deviation},
            {"tail_band", mass.tail_band},
            {"pass", mass.pass}};
}

} // namespace

void write_profile_csv(const std::filesystem::path& path, const ProfileCurve& curve) {
    auto out = open_out(path);
    out << "r,f,w\n";
    for (std::size_t i = 0; i < curve.r.size(); ++i) {
        const double w =
            curve.r[i] > 0.0 ? std::pow(curve.r[i], -1.0 / curve.m) * curve.f[i] : 0.0;
        out << format_number(curve.r[i]) << ',' << format_number(curve.f[i]) << ','
            << format_number(w) << '\n';
    }
    finish(out, path);
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
    auto out = open_out(path);
    out << "t,x,u\n";
    for (const PdeState& s : traj.states)
        for (std::size_t j = 0; j < s.u.size(); ++j)
            out << format_number(s.t) << ',' << format_number(s.x(j)) << ','
                << format_number(s.u[j]) << '\n';
    finish(out, path);
}

void write_ledger_csv(const std::filesystem::path& path, const Trajectory& traj) {
    auto out = open_out(path);
    out << "t,mass,flux_left,flux_right,ab_residual,newton_iters\n";
    for (const LedgerRow& row : traj.ledger.rows)
        out << format_number(row.t) << ',' << format_number(row.mass) << ','
            << format_number(row.flux_left) << ',' << format_number(row.flux_right) << ','
            << format_number(row.ab_residual) << ',' << row.newton_iters << '\n';
    finish(out, path);
}

void write_kernel_csv(const std::filesystem::path& path, const GreenOperator& op) {
    auto out = open_out(path);
    out << "x,y,G\n";
    for (double x : op.nodes())
        for (double y : op.nodes())
            out << format_number(x) << ',' << format_number(y) << ','
                << format_number(GreenOperator::kernel(op.half_width(), x, y)) << '\n';
    finish(out, path);
}

void write_dk_csv(const std::filesystem::path& path, const ConvergenceReport& report) {
    auto out = open_out(path);
    out << "k,R,d_k\n";
    for (std::size_t k = 0; k < report.d.size(); ++k)
        out << (k + 1) << ',' << format_number(report.R_list[k]) << ','
            << format_number(report.d[k]) << '\n';
    finish(out, path);
}

void write_mass_csv(const std::filesystem::path& path, const MassLawResult& mass) {
    auto out = open_out(path);
    out << "t,mass,predicted_mass,deviation\n";
    for (const MassLawResult::Row& row : mass.rows)
        out << format_number(row.t) << ',' << format_number(row.mass) << ','
            << format_number(row.predicted) << ',' << format_number(row.deviation) << '\n';
    finish(out, path);
}

void write_slope_csv(const std::filesystem::path& path, const SlopeResult& slope) {
    auto out = open_out(path);
    out << "x,t,slope\n";
    for (const SlopeResult::Sample& s : slope.samples)
        out << format_number(s.x) << ',' << format_number(s.t) << ',' << format_number(s.s)
            << '\n';
    finish(out, path);
}

std::string profile_metadata_json(const ProfileCurve& curve, const ProfileMass& mass) {
    ordered_json j{{"m", curve.m},
                   {"eta", curve.eta},
                   {"mu", mass.total},
                   {"a1", curve.a1},
                   {"dr", curve.dr},
                   {"r_max", curve.r_max()},
                   {"mass_grid_part", mass.grid},
                   {"mass_tail_part", mass.tail}};
    if (std::isnan(curve.a1)) j["a1"] = nullptr;
    return j.dump(2) + "\n";
}

std::string convergence_report_json(const ConvergenceReport& report,
                                    const ExperimentConfig& cfg) {
    ordered_json j;
    j["m"] = cfg.m;
    j["R_list"] = report.R_list;
    j["d"] = report.d;
    j["d_dense"] = report.d_dense;
    j["fitted_decay"] = report.fitted_decay;
    j["monotone"] = report.monotone;
    j["mass_law"] = mass_json(report.mass);
    j["slope"] = {{"dev_right", report.slope.dev_right},
                  {"dev_left", report.slope.dev_left},
                  {"shrinks_outward", report.slope.shrinks_outward},
                  {"pass", report.slope.pass}};
    j["extinction_estimate"] = report.extinction_estimate;
    j["checks"] = checks_json(report.checks);
    j["pass"] = report.pass;
    return j.dump(2) + "\n";
}

std::string compare_report_json(const CompareResult& result, const ExperimentConfig& cfg) {
    ordered_json j;
    j["m"] = cfg.m;
    j["R_list"] = result.R_list;
    j["dirichlet_neumann_diffs"] = result.diffs;
    j["decreasing"] = result.decreasing;
    j["final_diff"] = result.final_diff;
    j["checks"] = checks_json(result.checks);
    j["pass"] = result.pass;
    return j.dump(2) + "\n";
}

std::string extinction_report_json(const ExtinctionResult& result, const ExperimentConfig& cfg) {
    ordered_json j;
    j["m"] = cfg.m;
    j["mu"] = cfg.mu();
    j["T_formula"] = result.T_formula;
    j["T_estimate"] = result.T_estimate;
    j["rel_error"] = result.rel_error;
    j["T_formula_2mu"] = result.T_formula_2mu;
    j["T_estimate_2mu"] = result.T_estimate_2mu;
    j["ratio_error"] = result.ratio_error;
    j["mass_law"] = mass_json(result.mass);
    j["checks"] = checks_json(result.checks);
    j["pass"] = result.pass;
    return j.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
    finish(out, path);
}

bool write_manifest(const std::filesystem::path& path, const std::string& config_hash_hex,
                    const std::map<std::string, double>& tolerances,
                    const std::vector<CheckResult>& checks) {
    bool all = true;
    ordered_json failures = ordered_json::array();
    for (const CheckResult& c : checks) {
        all = all && c.pass;
        if (!c.pass)
            failures.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}});
    }
    ordered_json j;
    j["config_hash"] = config_hash_hex;
    j["tolerances"] = tolerances;
    j["checks"] = checks_json(checks);
    j["failures"] = failures;
    j["pass"] = all;
    write_text(path, j.dump(2) + "\n");
    return all;
}

std::map<std::string, double> tolerance_map(const Tolerances& tol) {
    return {{"compact", tol.compact},
            {"mass_const", tol.mass_const},
            {"mass_general", tol.mass_general},
            {"extinction_rel", tol.extinction_rel},
            {"extinction_ratio", tol.extinction_ratio},
            {"slope", tol.slope},
            {"equal", tol.equal},
            {"order", tol.order},
            {"barrier", tol.barrier}};
}

} // namespace vfd
