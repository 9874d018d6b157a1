#include "vfd/green.hpp"

#include <cmath>

#include "vfd/errors.hpp"

namespace vfd {

GreenOperator::GreenOperator(double half_width, std::size_t n_nodes) : R_(half_width) {
    if (!(half_width > 0.0)) throw ParameterOutOfRange("half width must be > 0");
    if (n_nodes < 3 || n_nodes % 2 == 0)
        throw ParameterOutOfRange("node count must be odd and >= 3");
    h_ = 2.0 * R_ / static_cast<double>(n_nodes - 1);
    nodes_.resize(n_nodes);
    for (std::size_t j = 0; j < n_nodes; ++j)
        nodes_[j] = -R_ + h_ * static_cast<double>(j);
    nodes_[n_nodes / 2] = 0.0; // exact center node
    nodes_.back() = R_;
}

double GreenOperator::kernel(double R, double x, double y) {
    const double tol = 1e-12 * R;
    if (std::fabs(x) > R + tol || std::fabs(y) > R + tol)
        throw OutOfInterval("kernel arguments outside [-R, R]");
    if (y <= x) return -(R + y) * (R - x) / (2.0 * R);
    return -(R - y) * (R + x) / (2.0 * R);
}

void GreenOperator::check_samples(const std::vector<double>& f) const {
    if (f.size() != nodes_.size())
        throw GridMismatch("sample count does not match operator nodes");
}

std::vector<double> GreenOperator::apply(const std::vector<double>& f) const {
    check_samples(f);
    const std::size_t n = nodes_.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double w = (j == 0 || j == n - 1) ? 0.5 * h_ : h_;
            acc += kernel(R_, nodes_[i], nodes_[j]) * f[j] * w;
        }
        out[i] = acc;
    }
    out.front() = 0.0; // kernel rows vanish at the endpoints exactly
    out.back() = 0.0;
    return out;
}

std::vector<double> GreenOperator::apply_star(const std::vector<double>& f) const {
    std::vector<double> out = apply(f);
    const double center = out[out.size() / 2];
    for (double& v : out) v -= center;
    return out;
}

GreenOperator::Decomposition
GreenOperator::asymptotic_decomposition(const std::vector<double>& f, double m) const {
    check_samples(f);
    const std::size_t n = nodes_.size();
    const std::size_t c = n / 2; // index of x = 0

    // cumulative trapezoid integrals from -R
    std::vector<double> F(n, 0.0);  // \int_{-R}^{x} f
    std::vector<double> M1(n, 0.0); // \int_{-R}^{x} y f
    for (std::size_t j = 1; j < n; ++j) {
        F[j] = F[j - 1] + 0.5 * (f[j - 1] + f[j]) * h_;
        M1[j] = M1[j - 1] + 0.5 * (nodes_[j - 1] * f[j - 1] + nodes_[j] * f[j]) * h_;
    }
    const double total = F.back();
    const double total_m1 = M1.back();

    Decomposition d;
    d.i1.resize(n);
    d.i2.resize(n);
    d.i3.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = nodes_[j];
        d.i1[j] = -(M1[j] - M1[c]);
        d.i2[j] = -0.5 * x * (total - 2.0 * F[j]);
        d.i3[j] = 0.5 * x / R_ * total_m1;
        if (f[j] < 0.0) d.nonnegative = false;
        const double weight = 1.0 + std::pow(std::fabs(x), 2.0 + 1.0 / m);
        d.i2_far_field_constant =
            std::max(d.i2_far_field_constant,
                     std::fabs(d.i2[j] - 0.5 * std::fabs(x) * total) / weight);
    }

    // Heuristic decay check: against the reference level fitted at |x| = R/2,
    // samples in the outer half should stay within twice C |x|^{1/m}.
    const double p = 1.0 / m;
    double ref = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double ax = std::fabs(nodes_[j]);
        if (ax >= 0.45 * R_ && ax <= 0.55 * R_)
            ref = std::max(ref, std::fabs(f[j]) * std::pow(ax, -p));
    }
    if (ref > 0.0) {
        for (std::size_t j = 0; j < n; ++j) {
            const double ax = std::fabs(nodes_[j]);
            if (ax > 0.55 * R_ && std::fabs(f[j]) > 2.0 * ref * std::pow(ax, p)) {
                d.decay_ok = false;
                break;
            }
        }
    }
    return d;
}

double averaged_kernel(double r, double y) {
    if (!(r > 0.0)) throw ParameterOutOfRange("averaged kernel radius must be > 0");
    const double ay = std::fabs(y);
    return ay < r ? 0.5 * (r - ay) : 0.0;
}

} // namespace vfd
