#pragma once

#include <cstddef>
#include <vector>

namespace vfd {

/// Sampled radial profile f(r) of the self-similar ansatz, on a uniform grid
/// starting at r = 0, together with its calibration metadata.
///
/// The profile solves, in integral form,
///     f'(r) = f(r)^{1-m} * [ m/(1+m) * r * f(r) - \int_0^r f ]
/// with f(0) = eta, f'(0) = 0, for a diffusion exponent -1 < m < 0.
struct ProfileCurve {
    double m = 0.0;        ///< diffusion exponent, in (-1, 0)
    double eta = 0.0;      ///< center value f(0)
    double dr = 0.0;       ///< grid spacing
    std::vector<double> r; ///< radial nodes, r[0] == 0, uniform spacing dr
    std::vector<double> f; ///< profile samples, strictly positive
    /// Monotone cubic slopes at the nodes, filled by the factory functions.
    std::vector<double> df;

    /// Tail-completed integral of the unit (eta = 1) profile. NaN until known.
    double a1 = 0.0;
    /// Calibrated half-mass \int_0^infty f dr. NaN until calibrated.
    double mu = 0.0;

    double r_max() const { return r.empty() ? 0.0 : r.back(); }

    /// Profile value at arbitrary radius. Inside the grid this is a monotone
    /// cubic Hermite interpolant; beyond r_max the power-law asymptote fitted
    /// at the last node is substituted (see value_ex for the flag).
    double value(double radius) const;

    struct Eval {
        double f;
        bool asymptote; ///< true when the tail asymptote was substituted
    };
    Eval value_ex(double radius) const;

    /// Coefficient mu_hat of the tail asymptote f ~ (mu_hat |m| r)^{1/m}
    /// fitted at the last grid node.
    double tail_mu_hat() const;
};

/// Upper bound constant of the pointwise estimate
/// r^{2/(1-m)} f(r) < (2(1+m)/(1-m))^{1/(1-m)}.
double profile_bound_constant(double m);

/// Integrate the profile ODE (coupled with its running integral) by classical
/// RK4 up to r_max with step dr.
///
/// Throws ParameterOutOfRange for m outside (-1,0), eta <= 0, dr <= 0 or
/// r_max < 10*dr; NonPositiveProfile if any computed f <= 0.
ProfileCurve integrate_profile(double m, double eta, double r_max, double dr);

/// Default grid spacing: 1e-3 * max(1, eta^{(m-1)/2}). Large eta compresses
/// the profile, so the step shrinks accordingly.
double default_profile_dr(double m, double eta);

/// Integrate with the default spacing, extending r_max adaptively until
/// f(r_max) < 1e-3 * eta.
ProfileCurve integrate_profile_auto(double m, double eta);

struct ProfileMass {
    double total = 0.0; ///< grid quadrature plus tail correction
    double grid = 0.0;  ///< trapezoid part over [0, r_max]
    double tail = 0.0;  ///< analytic tail using the fitted asymptote
};

/// Half-mass \int_0^infty f dr of any profile: trapezoid over the grid plus
/// the analytic tail of the fitted power-law asymptote.
/// Throws TailNotResolved when the tail exceeds 5% of the grid part or the
/// profile has not decayed below 1e-3 * f(0) at r_max.
ProfileMass profile_half_mass(const ProfileCurve& curve);

/// A1 = \int_0^infty phi dr of the unit profile (eta = 1 required).
ProfileMass unit_profile_mass(const ProfileCurve& unit_curve);

/// Center value eta with half-mass mu, from A1 eta^{(1+m)/2} = mu:
/// eta = (mu / a1)^{2/(1+m)}.
double calibrate_eta(double m, double mu, double a1);

/// Build the calibrated profile with half-mass mu: unit run, A1, eta, rerun.
/// The result carries a1 and mu metadata.
ProfileCurve calibrated_profile(double m, double mu);

/// w(r) = r^{-1/m} f(r); nondecreasing in r and bounded by (mu |m|)^{1/m}.
double asymptotic_slope(const ProfileCurve& curve, double radius);

/// Far-field sandwich (mu |m| r + a)^{1/m} <= f(r) <= (mu |m| r)^{1/m} for
/// r >= r0, with a fitted as max over large r of r * |w(r)^m - mu |m||.
struct SandwichFit {
    double a = 0.0;
    double r0 = 0.0;
    /// max over grid r >= r0 of (f - (mu|m|r)^{1/m}), expected <= 0 + rounding
    double upper_violation = 0.0;
    /// max over grid r >= r0 of ((mu|m|r + a)^{1/m} - f), expected <= 0 + rounding
    double lower_violation = 0.0;
};

SandwichFit fit_sandwich(const ProfileCurve& curve, double mu);

/// Checkable predicates for the proved profile properties. Each returns the
/// worst signed margin (<= 0 means the property holds strictly).
struct ProfileDiagnostics {
    double monotonicity = 0.0;    ///< max of f[i+1] - f[i] over r > 0
    double bound_margin = 0.0;    ///< max of r^{2/(1-m)} f - bound constant
    double h_margin = 0.0;        ///< max of -(f - m r f'), f' central
    double center_slope = 0.0;    ///< |one-sided f'(0)|, should be O(dr)
};
ProfileDiagnostics profile_diagnostics(const ProfileCurve& curve);

} // namespace vfd
