#pragma once

#include <string>
#include <vector>

#include "cuspscale/contour.hpp"
#include "cuspscale/dynamics.hpp"

namespace cuspscale {

enum class EscapeComponent { Funnel, Cusp, Core };
const char* component_name(EscapeComponent c);

// G = k rho chi(r) psi(p) in the component's own chart:
//   funnel (r_F, rho_F), k = C_F;  cusp (r_C, rho_C), k = -1;  core (t, rho_t), k = -1.
// The core profile continues the cusp profile across t = 1, so core + cusp is smooth.
struct EscapeField {
    EscapeComponent component = EscapeComponent::Funnel;
    double k = 1;
    double R_F = 0, R_C = 0;  // funnel and cusp ellipticity offsets
    double delta_p = 0.05;
    double slope = 0;         // cusp decay rate 1/(2(R_C + 5))

    Chart chart() const;
    Jet chi(double r) const;  // profile and derivatives in the own chart
    bool in_domain(double r) const;
    double psi(double p) const;
    double psi1(double p) const;
};

struct EscapeParams {
    double R = 5;
    double delta_p = 0.05;
    double C_F = -1;          // < 0: calibrate
    double calibration = 8;   // C_F = calibration * largest negative excursion of the rest
};

struct EscapeSet {
    EscapeField funnel, cusp, core;
    double theta = 0, R = 5;
    double C_F = 0, negative_excursion = 0;
    std::vector<const EscapeField*> all() const { return {&funnel, &cusp, &core}; }
};

EscapeSet build_escape(const ModelSurface& m, const EscapeParams& p = {});

// Converts between the global chart and the end charts (beta == 1 glue).
PhasePoint to_chart(const PhasePoint& x, Chart target);

double escape_value(const EscapeField& f, const PhasePoint& x, const ModelSurface& m);
// Unscaled H_p G when c is null; H_{re q} G with the contour's f otherwise (end fields only).
double poisson_derivative(const EscapeField& f, const PhasePoint& x, const ModelSurface& m,
                          const ContourSpec* c = nullptr);
double poisson_sum(const EscapeSet& s, const PhasePoint& x, const ModelSurface& m);
// d/dtau G(exp(tau H_p) x) at 0 from RK4 flow steps and a 4-point stencil.
double flow_derivative_fd(const EscapeField& f, const PhasePoint& x, const ModelSurface& m, double eps = 1e-3);

struct EscapeGrid {
    int t_points = 601;
    int rho_points = 201;
    double p_step = 0.0025;   // p samples are 1 + k p_step inside the band
    int alpha_points = 40;    // per contour branch for the scaled check
    int r_points = 300;
};

struct RegionMargin {
    std::string id;
    bool pass = true;
    double margin = 0;
    double witness_r = 0, witness_rho = 0, witness_p = 0, witness_alpha = 0;
    long samples = 0;
};

struct EscapeReport {
    double C_F = 0, delta0 = 0, delta_p = 0, delta_f = 0;
    double empirical_delta0 = 0;  // min over all regions
    std::vector<RegionMargin> regions;
    bool all_pass() const;
    const RegionMargin* find(const std::string& id) const;
    std::string to_json() const;
};

// H_p G >= delta0 on the unscaled region t in [-1 - R, 1 + R], and the scaled-collar checks on
// the end collars [3, R + R_j] where sum |f^(k)| <= delta_f.
EscapeReport verify_escape(const EscapeSet& s, const ModelSurface& m, double delta0, double delta_p, double delta_f,
                           const EscapeGrid& g = {}, const ContourOptions& copt = {});

// r, rho, G, H_pG along the global chart at fixed p.
std::string escape_csv(const EscapeSet& s, const ModelSurface& m, double p = 1.0, int t_points = 241,
                       int rho_points = 41);

}  // namespace cuspscale
