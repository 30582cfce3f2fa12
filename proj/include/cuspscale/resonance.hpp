#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "cuspscale/operators.hpp"

namespace cuspscale {

// lambda = (zeta + 1)/h^2 + (n-1)^2/4, roots of s(n-1-s) = lambda (re s1 >= re s2).
std::pair<cplx, cplx> zeta_to_s(cplx zeta, double h, int n);
cplx s_to_zeta(cplx s, double h, int n);

inline double window_radius(double C, double h) { return C * h * std::log(1.0 / h); }

struct ScanPlan {
    int N = 2048;
    Scheme scheme = Scheme::FD4;
    double R = 5;
    ContourOptions contour;
    int boundary_samples = 64;
    bool boundary_floor = true;
    int dense_modes = 1;        // modes 0..dense_modes-1 get a dense eigensolve
    int dense_N = 512;
    double wide_re = 1.5, wide_im_lo = -1.0, wide_im_hi = 0.25;  // wide scan region for reported eigenvalues
    double stable_tol = 1e-3;   // refinement tolerance (relative to max(1, |zeta|))
    double cutoff_floor = 0.02; // positive floor demanded of min |q - zeta|
    int max_modes = 200000;
    double margin = 5;          // truncation beyond the last breakpoint
    double wall = 1e8;          // truncate once the potential exceeds this (zero-branch cusp)
    int jobs = 1;
    ExteriorCap cap;            // strength > 0 adds an exterior absorber
    bool unscaled = false;      // unscaled+CAP variant
};

// Contours and operator for one mode in the glued global chart.
struct ModeSetup {
    double alpha = 0;
    ContourSpec cusp, funnel;
    Grid1D grid;
};
ModeSetup mode_setup(const ModelSurface& m, double alpha, double h, const ScanPlan& plan, int N);
ModeOperator assemble(const ModelSurface& m, const ModeSetup& s, double h, const ScanPlan& plan, int mode);

// Grid-certified min |q - zeta| over the window: min |q| - radius on a (t, rho) grid.
struct SymbolFloor {
    double value;
    double t, rho;  // witness
};
SymbolFloor window_symbol_floor(const ModelSurface& m, const ModeSetup& s, double lo, double hi, double radius, int t_points = 1500,
                                int rho_points = 241);

struct TruncationCertificate {
    bool pass = true;
    double floor_lo = 0, floor_hi = 0;
    std::string detail;
};
// |q - zeta| >= floor on [lo, lo + 2] and [hi - 2, hi] for every zeta in the window.
TruncationCertificate certify_truncation(const ModelSurface& m, const ModeSetup& s, double radius, double floor);

struct CutoffRow {
    int mode;
    double lambda, alpha, floor;
};
struct CutoffReport {
    int M = 0;
    bool finite_list = false;  // cross-section list exhausted before the threshold
    std::vector<CutoffRow> table;
    std::string to_json() const;
};
CutoffReport estimate_mode_cutoff(const ModelSurface& m, double h, double C, const ScanPlan& plan = {});

struct EigenRow {
    cplx zeta, s1, s2;
    int mode, N;
    double h;
    bool stable, in_window;
    double delta = 0;  // distance to the nearest eigenvalue at 2N
};

struct ModeSummary {
    int mode;
    double alpha;
    int count_N = 0, count_2N = -1;
    bool reliable = true;
    double floor = 0;           // min sigma over boundary samples
    bool floor_converged = true;
    double t_lo = 0, t_hi = 0;
};

struct ResonanceReport {
    double h = 0, C = 0, radius = 0;
    int N = 0, M = 0;
    bool empty = true;
    std::vector<cplx> witnesses;      // stable eigenvalues inside the window
    std::vector<EigenRow> rows;       // dense eigenvalues in the wide region
    std::vector<ModeSummary> modes;
    std::vector<FloorSample> boundary;  // min over modes per boundary sample
    double floor = 0;                 // min sigma over boundary samples
    double kappa = 0;                 // floor / (h log(1/h))
    bool floor_converged = true;
    double threshold_distance = 0;    // min |zeta + 1| over mode-0 eigenvalues
    double max_refine_delta = 0;      // largest move of stable eigenvalues under N -> 2N
    int unreliable_counts = 0;
    double seconds = 0;
    std::string verdict() const { return empty ? "empty" : "occupied"; }
    std::string to_json() const;
    std::string to_csv() const;
};

ResonanceReport resonance_scan(const ModelSurface& m, double h, double C, const ScanPlan& plan = {});

// Dense eigenvalues of one mode inside the wide region, each tagged stable if it reappears at 2N.
std::vector<EigenRow> wide_eigenvalues(const ModelSurface& m, int mode, double h, const ScanPlan& plan, int N);

struct KappaFit {
    double kappa = 0;
    double spread = 0;  // max/min of the per-h ratios
    std::vector<double> per_h;
};
KappaFit fit_kappa(const std::vector<ResonanceReport>& reports);

}  // namespace cuspscale
