#pragma once

#include <array>
#include <functional>
#include <vector>

namespace cuspscale {

// Value and first two derivatives of a scalar function at one point.
struct Jet {
    double v = 0, d1 = 0, d2 = 0;
};

// C-infinity step: 0 for x <= 0, 1 for x >= 1.
Jet smooth_step(double x);

// Step rising from 0 at a to 1 at b (a < b), derivatives w.r.t. x.
Jet smooth_step(double x, double a, double b);

// Normalized mollifier kernel of half-width w: integral over (-w, w) is 1.
double mollifier(double s, double w);
double mollifier_deriv(double s, double w);

// Integral of g over [a, b] with 30-point Gauss-Legendre, splitting the
// interval at the given breakpoints.
double integrate_pieces(const std::function<double(double)>& g, double a, double b,
                        const std::vector<double>& breaks);

}  // namespace cuspscale
