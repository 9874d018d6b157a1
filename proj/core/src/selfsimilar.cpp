#include "vfd/selfsimilar.hpp"

#include <cmath>

#include "vfd/errors.hpp"

namespace vfd {

SelfSimilarSolution::Eval SelfSimilarSolution::value_ex(double x, double t) const {
    const double T = extinction_time;
    if (t >= T) throw TimeBeyondExtinction("t >= extinction time");
    if (t < 0.0) throw ParameterOutOfRange("t must be >= 0");
    const double m = profile.m;
    const double s = T - t;
    const double amp = std::pow(s, 1.0 / (1.0 + m));
    const double arg = std::fabs(x) * std::pow(s, -m / (1.0 + m));
    const ProfileCurve::Eval e = profile.value_ex(arg);
    return {amp * e.f, e.asymptote};
}

double SelfSimilarSolution::value(double x, double t) const { return value_ex(x, t).u; }

SelfSimilarSolution make_selfsimilar(double m, double mu, double extinction_time) {
    if (!(extinction_time > 0.0)) throw ParameterOutOfRange("extinction time must be > 0");
    return {calibrated_profile(m, mu), extinction_time};
}

double selfsimilar_total_mass(const SelfSimilarSolution& sol, double t, double half_width,
                              double dx) {
    if (!(half_width > 0.0 && dx > 0.0)) throw ParameterOutOfRange("bad quadrature parameters");
    const long n = std::lround(half_width / dx);
    double grid = 0.0;
    double prev = sol.value(-static_cast<double>(n) * dx, t);
    for (long j = -n + 1; j <= n; ++j) {
        const double cur = sol.value(static_cast<double>(j) * dx, t);
        grid += 0.5 * (prev + cur) * dx;
        prev = cur;
    }
    // analytic tail of v beyond |x| = half_width via the profile asymptote:
    // v(x,t) = s^{1/(1+m)} f(|x| s^{-m/(1+m)}) with f ~ (mu_hat |m| r)^{1/m}
    const double m = sol.profile.m;
    const double s = sol.extinction_time - t;
    const double scale = std::pow(s, -m / (1.0 + m));
    const double r_lo = half_width * scale;
    const double mu_hat = sol.profile.tail_mu_hat();
    const double p = 1.0 / m;
    // \int_{r_lo}^infty (mu_hat |m| r)^{1/m} dr, substituted back to x units
    const double tail_r = -std::pow(mu_hat * std::fabs(m), p) * std::pow(r_lo, p + 1.0) / (p + 1.0);
    const double tail = 2.0 * std::pow(s, 1.0 / (1.0 + m)) * tail_r / scale;
    return grid + tail;
}

} // namespace vfd
