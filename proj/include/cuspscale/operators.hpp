#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "cuspscale/contour.hpp"
#include "cuspscale/geometry.hpp"

namespace cuspscale {

enum class Scheme { FD4, Chebyshev };
enum class Variant { Scaled, ScaledCap, UnscaledCap };
const char* variant_name(Variant v);

// Dirichlet at both ends. FD4 uses N interior nodes of a uniform grid;
// Chebyshev uses the N interior Gauss-Lobatto points.
struct Grid1D {
    double lo = 0, hi = 1;
    int N = 256;
    Scheme scheme = Scheme::FD4;
    std::vector<double> nodes() const;
    double spacing() const { return (hi - lo) / (N + 1); }
};

// Coefficients of h^2 (A D^2 + B D) with D = -i d/dr, after the change r -> r + i f.
struct KineticCoeffs {
    cplx second, first;
};
// Expands the square of (1 + i f')^{-1} h D by the product rule.
KineticCoeffs kinetic_coefficients(double f1, double f2);
// Closed-form first-order coefficient of the correction term: -f''/(1 + i f')^3.
cplx correction_coefficient(double f1, double f2);

// Q = h^2 (a D^2 + b D) + c on the grid nodes, c already containing -1.
struct ModeOperator {
    Grid1D grid;
    double h = 0.1, alpha = 0;
    int mode = -1;
    Variant variant = Variant::Scaled;
    std::vector<double> x;
    std::vector<cplx> a, b, c;
    std::vector<double> contour_f;  // imaginary displacement F(x) at nodes

    Eigen::MatrixXcd dense() const;
    // LAPACK band storage (kl = ku = 2, ldab = 7), FD4 only.
    std::vector<cplx> band(cplx shift = 0) const;
    std::string triplets() const;
};

struct ExteriorCap {
    double strength = 0;   // 0 disables
    double length = 4;     // ramp length
    double lo_start = 0, hi_start = 0;  // absorber acts for x < lo_start and x > hi_start
    bool lo = true, hi = true;
    double operator()(double x) const;
};

// Glued global chart (cusp r = t - 1, funnel r = -t - 1). Either contour may be null (no scaling on that side).
ModeOperator build_mode_operator(const ModelSurface& m, const ContourSpec* cusp, const ContourSpec* funnel,
                                 double alpha, double h, const Grid1D& grid, int mode = -1,
                                 const ExteriorCap& cap = {});

// Half-line end operator Q_{R,j}(alpha) on (0, grid.hi], Dirichlet at 0.
ModeOperator build_end_operator(End end, const WarpProfile& profile, int n, const ContourSpec& contour,
                                double alpha, double h, const Grid1D& grid);

struct CapProfile {
    double height = 1.0;    // W on (-inf, 0]
    double ramp_end = 1.0;  // W vanishes from here on
    double operator()(double x) const;
};
// Q^W = Q - i W(r - R - R_j); end operators only.
ModeOperator build_cap_operator(const ModeOperator& base, const CapProfile& W, double R, double R_j);

// Eigenvalues by dense zgeev, sorted by (re, im).
std::vector<cplx> mode_eigenvalues(const ModeOperator& op);
std::vector<cplx> dense_eigenvalues(Eigen::MatrixXcd A);

struct FloorSample {
    cplx zeta;
    double sigma_min;
    bool converged = true;
};
// Dense SVD.
std::vector<FloorSample> resolvent_floor(const ModeOperator& op, const std::vector<cplx>& zetas);
// Banded inverse iteration (FD4 only); upper estimates that converge to sigma_min.
std::vector<FloorSample> resolvent_floor_banded(const ModeOperator& op, const std::vector<cplx>& zetas,
                                                double rel_tol = 1e-4, int max_iter = 60);

struct DiscCount {
    int count = 0;
    double winding = 0;   // unrounded
    int evaluations = 0;
    bool reliable = true;
};
// Number of eigenvalues in |zeta - center| < radius via the argument principle on det(Q - zeta).
DiscCount count_in_disc(const ModeOperator& op, cplx center, double radius);

}  // namespace cuspscale
