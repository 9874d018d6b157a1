#pragma once

#include "vfd/profile.hpp"

namespace vfd {

/// Even, positive space-time solution built from a calibrated profile:
///     v(x,t) = (T-t)^{1/(1+m)} f(|x| (T-t)^{-m/(1+m)}),   0 <= t < T,
/// which loses mass linearly: \int_R v(.,t) dx = 2 mu (T-t).
struct SelfSimilarSolution {
    ProfileCurve profile; ///< calibrated (mu metadata set)
    double extinction_time = 0.0;

    /// Throws TimeBeyondExtinction for t >= T. Beyond the profile grid the
    /// fitted tail asymptote is substituted (see value_ex).
    double value(double x, double t) const;

    struct Eval {
        double u;
        bool asymptote;
    };
    Eval value_ex(double x, double t) const;
};

SelfSimilarSolution make_selfsimilar(double m, double mu, double extinction_time);

/// Quadrature of v(.,t) over the real line: trapezoid on [-X, X] plus the
/// analytic tail of the profile asymptote. Used to check the 2 mu (T-t) law.
double selfsimilar_total_mass(const SelfSimilarSolution& sol, double t, double half_width,
                              double dx);

} // namespace vfd
