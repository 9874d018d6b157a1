#pragma once

#include <cstddef>
#include <vector>

namespace vfd {

/// Dirichlet Green kernel of the second derivative on [-R, R] and the
/// re-centered operator derived from it, applied by trapezoid quadrature on a
/// uniform node set. The node count is odd so that x = 0 and every evaluation
/// point coincide with quadrature nodes (the kernel has a derivative kink at
/// y = x, and splitting there keeps the rule second order).
class GreenOperator {
public:
    /// n_nodes must be odd and >= 3.
    GreenOperator(double half_width, std::size_t n_nodes);

    double half_width() const { return R_; }
    double spacing() const { return h_; }
    const std::vector<double>& nodes() const { return nodes_; }

    /// Kernel value; zero at x = +-R, symmetric, nonpositive.
    static double kernel(double R, double x, double y);

    /// G_R(f)(x) = \int_{-R}^{R} G_R(x,y) f(y) dy on the nodes.
    /// The second centered difference of the output reproduces f in the
    /// interior at O(h^2), and the output vanishes at the endpoints.
    std::vector<double> apply(const std::vector<double>& f_samples) const;

    /// G_R*(f)(x) = \int [G_R(x,y) - G_R(0,y)] f(y) dy = G_R(f)(x) - G_R(f)(0).
    /// For any twice differentiable g with g(R) = g(-R):
    /// G_R*(g'') = g - g(0).
    std::vector<double> apply_star(const std::vector<double>& f_samples) const;

    /// Three-part split of G_R*(f) used in its far-field analysis:
    ///   i1 = -\int_0^x y f dy
    ///   i2 = -(x/2) (\int_x^R f - \int_{-R}^x f)
    ///   i3 = (x/(2R)) \int_{-R}^R y f dy
    /// i1 + i2 + i3 equals apply_star(f) under the same quadrature rule.
    struct Decomposition {
        std::vector<double> i1, i2, i3;
        bool nonnegative = true; ///< input samples were all >= 0
        bool decay_ok = true;    ///< heuristic |f| <~ C |x|^{1/m} tail check
        /// measured constant of the far-field estimate:
        /// max over nodes of |i2 - (|x|/2) \int f| / (1 + |x|^{2 + 1/m})
        double i2_far_field_constant = 0.0;
    };
    /// Decay diagnosed against the power 1/m for the given exponent m.
    Decomposition asymptotic_decomposition(const std::vector<double>& f_samples, double m) const;

private:
    double R_;
    double h_;
    std::vector<double> nodes_;
    void check_samples(const std::vector<double>& f) const;
};

/// Symmetrized, centered kernel average
///   H(r)(y) = (1/2)[G_R(r,y) + G_R(-r,y)] - G_R(0,y)
///           = (r - |y|)/2 if |y| < r, 0 otherwise,
/// an identity independent of R.
double averaged_kernel(double r, double y);

} // namespace vfd
