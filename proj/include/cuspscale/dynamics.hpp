#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cuspscale/geometry.hpp"

namespace cuspscale {

// Cusp and Funnel are end charts; Global is the glued coordinate t
// (cusp r = t - 1, funnel r = -t - 1, collar |t| <= 1).
enum class Chart { Cusp, Funnel, Global };

struct PhasePoint {
    double r = 0, rho = 0, alpha = 0;
    Chart chart = Chart::Global;
};

enum class Exit { EscapedFunnel, EscapedCusp, LeftEnd, StillBounded };
const char* exit_name(Exit e);

struct FlowOptions {
    double escape_cusp = 30, escape_funnel = 30;
    double drift_tol = 1e-7;      // per unit time
    double hysteresis = 0.1;
    int record_every = 1;         // 0: keep only endpoints
};

struct Trajectory {
    std::vector<double> time;
    std::vector<PhasePoint> points;
    std::vector<double> energy;
    double energy_drift = 0;
    Exit exit = Exit::StillBounded;
    bool flagged = false;         // drift guard tripped; trajectory is partial
    bool separatrix = false;
    int cusp_visits = 0;
    double cusp_rho_increase = 0; // largest per-step rise of rho while inside the cusp
    std::string to_csv() const;
};

double hamiltonian(const PhasePoint& x, const ModelSurface& m);

// (dr/dt, drho/dt)
std::pair<double, double> flow_field(const PhasePoint& x, const ModelSurface& m);

Trajectory integrate(const PhasePoint& x0, const ModelSurface& m, double T, double dt,
                     const FlowOptions& opt = {});

struct ClosedForm {
    double rho;
    bool separatrix;
};
// tanh closed form for rho(t) in an end chart; the beta'/beta integral is
// accumulated along a simultaneously integrated r(s) starting at r0.
ClosedForm closed_form_rho(End end, double t, double p, double rho0, const WarpProfile& prof,
                           double r0 = 1.0, double dt = 1e-3);

struct DynamicsReport {
    int count = 0, escaped = 0, escaped_funnel = 0, escaped_cusp = 0;
    int max_cusp_visits = 0;
    double max_drift = 0;
    double T = 0;
    std::uint64_t seed = 0;
    std::vector<PhasePoint> bounded;  // nontrapping witnesses (if any)
    std::vector<PhasePoint> initial;
    std::string to_json() const;
};

DynamicsReport classify_batch(const ModelSurface& m, int N, double T, std::uint64_t seed,
                              double dt = 1e-3, int jobs = 1, const FlowOptions& opt = {});

}  // namespace cuspscale
