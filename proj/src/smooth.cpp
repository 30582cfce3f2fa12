#include "cuspscale/smooth.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

namespace cuspscale {

namespace {

// g(x) = exp(-1/x) for x > 0 and its derivatives.
Jet g_jet(double x) {
    if (x <= 0) return {};
    const double g = std::exp(-1.0 / x);
    const double x2 = x * x;
    return {g, g / x2, g * (1.0 - 2.0 * x) / (x2 * x2)};
}

double bump_raw(double x) {
    if (x <= -1.0 || x >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - x * x));
}

double bump_raw_deriv(double x) {
    if (x <= -1.0 || x >= 1.0) return 0.0;
    const double u = 1.0 - x * x;
    return -2.0 * x / (u * u) * std::exp(-1.0 / u);
}

double bump_mass() {
    static const double mass = [] {
        boost::math::quadrature::tanh_sinh<double> ts;
        return ts.integrate(bump_raw, -1.0, 1.0);
    }();
    return mass;
}

}  // namespace

Jet smooth_step(double x) {
    if (x <= 0) return {0, 0, 0};
    if (x >= 1) return {1, 0, 0};
    const Jet a = g_jet(x);
    const Jet b0 = g_jet(1.0 - x);
    // b(x) = g(1-x): b' = -g'(1-x), b'' = g''(1-x)
    const double A = a.v, A1 = a.d1, A2 = a.d2;
    const double B = b0.v, B1 = -b0.d1, B2 = b0.d2;
    const double s = A + B;
    const double num = A1 * B - A * B1;
    const double num1 = A2 * B - A * B2;
    const double den = s * s;
    const double den1 = 2.0 * s * (A1 + B1);
    return {A / s, num / den, (num1 * den - num * den1) / (den * den)};
}

Jet smooth_step(double x, double a, double b) {
    const double L = b - a;
    Jet j = smooth_step((x - a) / L);
    return {j.v, j.d1 / L, j.d2 / (L * L)};
}

double mollifier(double s, double w) { return bump_raw(s / w) / (w * bump_mass()); }

double mollifier_deriv(double s, double w) {
    return bump_raw_deriv(s / w) / (w * w * bump_mass());
}

double integrate_pieces(const std::function<double(double)>& g, double a, double b,
                        const std::vector<double>& breaks) {
    std::vector<double> cuts{a};
    for (double x : breaks)
        if (x > a && x < b) cuts.push_back(x);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    double total = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] - cuts[i] <= 0) continue;
        total += boost::math::quadrature::gauss<double, 30>::integrate(g, cuts[i], cuts[i + 1]);
    }
    return total;
}

}  // namespace cuspscale
