#include "vfd/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vfd/errors.hpp"

namespace vfd {

namespace {

void require_exponent(double m) {
    if (!(m > -1.0 && m < 0.0))
        throw ParameterOutOfRange("m must lie in (-1,0), got " + std::to_string(m));
}

// Right-hand side of the coupled system y = (f, F), F = \int_0^r f:
//   f' = f^{1-m} (m/(1+m) r f - F),   F' = f.
struct OdeRhs {
    double m;
    double mass_coef; // m/(1+m)
    void operator()(double r, double f, double F, double& df, double& dF) const {
        if (f <= 0.0) throw NonPositiveProfile("profile reached f <= 0 at r = " + std::to_string(r));
        df = std::pow(f, 1.0 - m) * (mass_coef * r * f - F);
        dF = f;
    }
};

// One classical RK4 step of the coupled system.
void rk4_step(const OdeRhs& rhs, double r, double dr, double& f, double& F) {
    double k1f, k1F, k2f, k2F, k3f, k3F, k4f, k4F;
    rhs(r, f, F, k1f, k1F);
    rhs(r + 0.5 * dr, f + 0.5 * dr * k1f, F + 0.5 * dr * k1F, k2f, k2F);
    rhs(r + 0.5 * dr, f + 0.5 * dr * k2f, F + 0.5 * dr * k2F, k3f, k3F);
    rhs(r + dr, f + dr * k3f, F + dr * k3F, k4f, k4F);
    f += dr / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
    F += dr / 6.0 * (k1F + 2.0 * k2F + 2.0 * k3F + k4F);
}

// Fritsch-Carlson monotone cubic slopes for a decreasing positive sample set.
// Returns the limited derivative estimates at the nodes.
std::vector<double> monotone_slopes(const std::vector<double>& r, const std::vector<double>& f) {
    const std::size_t n = r.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    std::vector<double> delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (f[i + 1] - f[i]) / (r[i + 1] - r[i]);
    d[0] = delta[0];
    d[n - 1] = delta[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0.0) {
            d[i] = 0.0;
        } else {
            // harmonic mean keeps the interpolant monotone on each cell
            d[i] = 2.0 * delta[i - 1] * delta[i] / (delta[i - 1] + delta[i]);
        }
    }
    return d;
}

} // namespace

double ProfileCurve::tail_mu_hat() const {
    const double rb = r.back();
    const double fb = f.back();
    // f(rb) = (mu_hat |m| rb)^{1/m}  =>  mu_hat = f(rb)^m / (|m| rb)
    return std::pow(fb, m) / (std::fabs(m) * rb);
}

ProfileCurve::Eval ProfileCurve::value_ex(double radius) const {
    if (radius < 0.0) throw ParameterOutOfRange("profile radius must be >= 0");
    if (radius >= r.back()) {
        if (radius == r.back()) return {f.back(), false};
        const double mu_hat = tail_mu_hat();
        return {std::pow(mu_hat * std::fabs(m) * radius, 1.0 / m), true};
    }
    // uniform grid lookup
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(radius / dr), r.size() - 2);
    const std::vector<double>* slopes = &df;
    std::vector<double> local;
    if (df.size() != r.size()) { // hand-built curve without factory slopes
        local = monotone_slopes(r, f);
        slopes = &local;
    }
    const double h = r[i + 1] - r[i];
    const double t = (radius - r[i]) / h;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    const double h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t);
    const double h11 = t * t * (t - 1);
    return {h00 * f[i] + h10 * h * (*slopes)[i] + h01 * f[i + 1] + h11 * h * (*slopes)[i + 1],
            false};
}

double ProfileCurve::value(double radius) const { return value_ex(radius).f; }

double profile_bound_constant(double m) {
    require_exponent(m);
    return std::pow(2.0 * (1.0 + m) / (1.0 - m), 1.0 / (1.0 - m));
}

ProfileCurve integrate_profile(double m, double eta, double r_max, double dr) {
    require_exponent(m);
    if (!(eta > 0.0)) throw ParameterOutOfRange("eta must be > 0");
    if (!(dr > 0.0)) throw ParameterOutOfRange("dr must be > 0");
    if (!(r_max >= 10.0 * dr)) throw ParameterOutOfRange("r_max must be >= 10*dr");

    const std::size_t n_steps = static_cast<std::size_t>(std::llround(r_max / dr));
    OdeRhs rhs{m, m / (1.0 + m)};

    ProfileCurve curve;
    curve.m = m;
    curve.eta = eta;
    curve.dr = dr;
    curve.r.reserve(n_steps + 1);
    curve.f.reserve(n_steps + 1);
    curve.a1 = std::numeric_limits<double>::quiet_NaN();
    curve.mu = std::numeric_limits<double>::quiet_NaN();

    double f = eta;
    double F = 0.0;
    curve.r.push_back(0.0);
    curve.f.push_back(f);
    for (std::size_t i = 0; i < n_steps; ++i) {
        rk4_step(rhs, static_cast<double>(i) * dr, dr, f, F);
        if (!(f > 0.0))
            throw NonPositiveProfile("profile non-positive at r = " +
                                     std::to_string(static_cast<double>(i + 1) * dr));
        curve.r.push_back(static_cast<double>(i + 1) * dr);
        curve.f.push_back(f);
    }
    curve.df = monotone_slopes(curve.r, curve.f);
    return curve;
}

double default_profile_dr(double m, double eta) {
    require_exponent(m);
    return 1e-3 * std::max(1.0, std::pow(eta, 0.5 * (m - 1.0)));
}

ProfileCurve integrate_profile_auto(double m, double eta) {
    require_exponent(m);
    if (!(eta > 0.0)) throw ParameterOutOfRange("eta must be > 0");
    const double dr = default_profile_dr(m, eta);
    const double f_stop = 1e-3 * eta;

    OdeRhs rhs{m, m / (1.0 + m)};
    ProfileCurve curve;
    curve.m = m;
    curve.eta = eta;
    curve.dr = dr;
    curve.a1 = std::numeric_limits<double>::quiet_NaN();
    curve.mu = std::numeric_limits<double>::quiet_NaN();

    double f = eta;
    double F = 0.0;
    curve.r.push_back(0.0);
    curve.f.push_back(f);
    const std::size_t hard_cap = 200'000'000; // runaway guard
    std::size_t i = 0;
    while (true) {
        rk4_step(rhs, static_cast<double>(i) * dr, dr, f, F);
        ++i;
        if (!(f > 0.0))
            throw NonPositiveProfile("profile non-positive at r = " +
                                     std::to_string(static_cast<double>(i) * dr));
        curve.r.push_back(static_cast<double>(i) * dr);
        curve.f.push_back(f);
        if (f < f_stop && i >= 10) break;
        if (i >= hard_cap) throw Error("adaptive profile integration exceeded step cap");
    }
    curve.df = monotone_slopes(curve.r, curve.f);
    return curve;
}

ProfileMass profile_half_mass(const ProfileCurve& curve) {
    const std::size_t n = curve.r.size();
    if (n < 2) throw ParameterOutOfRange("profile too short for quadrature");
    if (!(curve.f.back() < 1e-3 * curve.f.front()))
        throw TailNotResolved("profile has not decayed below 1e-3 * f(0) at r_max");

    double grid = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        grid += 0.5 * (curve.f[i] + curve.f[i + 1]) * (curve.r[i + 1] - curve.r[i]);

    // Tail of the fitted asymptote (mu_hat |m| r)^{1/m}; integrable since 1/m < -1.
    const double m = curve.m;
    const double mu_hat = curve.tail_mu_hat();
    const double p = 1.0 / m; // p < -1
    const double tail =
        -std::pow(mu_hat * std::fabs(m), p) * std::pow(curve.r_max(), p + 1.0) / (p + 1.0);

    if (tail > 0.05 * grid)
        throw TailNotResolved("tail correction exceeds 5% of the grid quadrature");
    return {grid + tail, grid, tail};
}

ProfileMass unit_profile_mass(const ProfileCurve& unit_curve) {
    if (std::fabs(unit_curve.eta - 1.0) > 1e-12)
        throw ParameterOutOfRange("unit_profile_mass requires a curve with eta = 1");
    return profile_half_mass(unit_curve);
}

double calibrate_eta(double m, double mu, double a1) {
    require_exponent(m);
    if (!(mu > 0.0)) throw ParameterOutOfRange("mu must be > 0");
    if (!(a1 > 0.0)) throw ParameterOutOfRange("a1 must be > 0");
    return std::pow(mu / a1, 2.0 / (1.0 + m));
}

ProfileCurve calibrated_profile(double m, double mu) {
    ProfileCurve unit = integrate_profile_auto(m, 1.0);
    const double a1 = unit_profile_mass(unit).total;
    const double eta = calibrate_eta(m, mu, a1);
    ProfileCurve curve = integrate_profile_auto(m, eta);
    curve.a1 = a1;
    curve.mu = mu;
    return curve;
}

double asymptotic_slope(const ProfileCurve& curve, double radius) {
    if (radius < 0.0 || radius > curve.r_max())
        throw ParameterOutOfRange("radius outside profile grid");
    if (radius == 0.0) return 0.0; // -1/m > 0, so r^{-1/m} f -> 0
    return std::pow(radius, -1.0 / curve.m) * curve.value(radius);
}

SandwichFit fit_sandwich(const ProfileCurve& curve, double mu) {
    const double m = curve.m;
    const double am = std::fabs(m);
    const double r_hi = curve.r_max();
    const double fit_lo = 0.25 * r_hi;
    const double fit_hi = 0.5 * r_hi;

    SandwichFit fit;
    for (std::size_t i = 0; i < curve.r.size(); ++i) {
        const double r = curve.r[i];
        if (r < fit_lo || r > fit_hi) continue;
        const double fm = std::pow(curve.f[i], m); // = r * w^m
        fit.a = std::max(fit.a, std::fabs(fm - mu * am * r));
    }
    fit.r0 = std::max(fit_lo, 1.05 * fit.a / (mu * am));

    for (std::size_t i = 0; i < curve.r.size(); ++i) {
        const double r = curve.r[i];
        if (r < fit.r0) continue;
        const double upper = std::pow(mu * am * r, 1.0 / m);
        const double lower = std::pow(mu * am * r + fit.a, 1.0 / m);
        fit.upper_violation = std::max(fit.upper_violation, curve.f[i] - upper);
        fit.lower_violation = std::max(fit.lower_violation, lower - curve.f[i]);
    }
    return fit;
}

ProfileDiagnostics profile_diagnostics(const ProfileCurve& curve) {
    ProfileDiagnostics d;
    d.monotonicity = -std::numeric_limits<double>::infinity();
    d.bound_margin = -std::numeric_limits<double>::infinity();
    d.h_margin = -std::numeric_limits<double>::infinity();
    const double bound = profile_bound_constant(curve.m);
    const std::size_t n = curve.r.size();
    for (std::size_t i = 1; i < n; ++i) {
        d.monotonicity = std::max(d.monotonicity, curve.f[i] - curve.f[i - 1]);
        const double scaled = std::pow(curve.r[i], 2.0 / (1.0 - curve.m)) * curve.f[i];
        d.bound_margin = std::max(d.bound_margin, scaled - bound);
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double fp = (curve.f[i + 1] - curve.f[i - 1]) / (curve.r[i + 1] - curve.r[i - 1]);
        const double h = curve.f[i] - curve.m * curve.r[i] * fp;
        d.h_margin = std::max(d.h_margin, -h);
    }
    // h(0) = f(0) = eta > 0 trivially; the one-sided center slope is the
    // discrete check of f'(0) = 0.
    d.center_slope = std::fabs((curve.f[1] - curve.f[0]) / curve.dr);
    return d;
}

} // namespace vfd
