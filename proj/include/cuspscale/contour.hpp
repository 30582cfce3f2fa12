#pragma once

#include <limits>
#include <string>
#include <vector>

#include "cuspscale/geometry.hpp"
#include "cuspscale/smooth.hpp"

namespace cuspscale {

enum class Branch { IdenticallyZero, SmallAlpha, Standard, LargeAlpha };
const char* branch_name(Branch b);

// One analytic piece of the unmollified contour on [a, b).
struct ContourPiece {
    enum class Kind { Zero, Exp, Linear, Const };
    Kind kind = Kind::Zero;
    double a = 0, b = 0;
    // Exp: f = F exp(C2/L - C2/(r - a)); Linear: f = F + slope (r - a); Const: f = F.
    double F = 0, C2 = 0, L = 1, slope = 0;
    std::string region;
    Jet eval(double r) const;
};

struct ContourOptions {
    double mollifier_width = 0.05;
    int samples = 4000;
    double r_max = -1;               // < 0: default extent
    double delta_target = -1;        // < 0: 0.9 min(1/6, tan/12)
    int c2_max_doublings = 12;
    int region_check_r = 200, region_check_rho = 121;
    bool force_branch = false;
    Branch branch = Branch::Standard;
};

struct ContourSpec {
    End end = End::Cusp;
    double R = 1, theta = 0, alpha = 0;
    Branch branch = Branch::IdenticallyZero;
    std::vector<ContourPiece> pieces;
    std::vector<double> breakpoints;  // kinks and region boundaries
    double R_alpha = std::numeric_limits<double>::infinity();  // R_C^alpha or R_F^alpha
    double R_F0 = 0;                  // funnel standard-branch start
    int k = -1;                       // cusp level index
    double C2 = 0;
    double slow_slope = 0;            // cusp final climb slope (0 if unused)
    double upper_bound_excess = 0;    // e^{2R_C^alpha} alpha - 3 tan/8 if positive
    double width = 0.05;
    // dense mollified samples
    std::vector<double> r, f, f1, f2;
    std::vector<std::string> tag;

    Jet raw(double x) const;          // piecewise, unmollified
    const ContourPiece& piece_at(double x) const;
    double support_start() const;     // first r where the raw contour is nonzero
    double R_j() const;               // ellipticity offset: scaled bounds hold for r >= R + R_j
    ContourSpec unmollified() const;
    std::string to_csv() const;
    std::string to_polyline() const;  // "x,y x,y ..." for an SVG polyline
};

double default_delta_target(double theta);
double cusp_alpha_threshold(double R, double theta);
double funnel_alpha_threshold(double R);

// Builds f_C (End::Cusp) or f_F (End::Funnel) for the given R, theta, alpha.
// Throws DomainError when r + i f leaves the profile's cone.
ContourSpec build_contour(End end, double R, double theta, double alpha, const WarpProfile& profile,
                          const ContourOptions& opt = {});

// Mollified value and derivatives; exact 0 for r <= start - width.
Jet eval_contour(const ContourSpec& c, double r);

// Symbols -------------------------------------------------------------------

struct SymbolSample {
    double r, rho, alpha;
    cplx q;
    double re_split, im_split;
};

cplx scaled_symbol(End end, const ContourSpec& c, const WarpProfile& profile, double r, double rho, double alpha);
SymbolSample symbol_sample(End end, const Jet& f, const WarpProfile& profile, double r, double rho, double alpha);

struct SymbolGrid {
    int r_points = 4000;
    double r_max = -1;  // < 0: contour default
    int rho_points = 600;
    double rho_max = 3;
    double delta_target = -1;
};

struct BoundEntry {
    std::string id;
    bool applicable = true;
    bool pass = true;
    double empirical = 0;  // empirical delta (or margin)
    double target = 0;
    double active_r_min = 0, active_r_max = 0;
    double witness_r = 0, witness_rho = 0;
    std::string note;
};

struct ModulusRow {
    double eps, delta;
};

struct BoundReport {
    End end;
    Branch branch;
    double R, theta, alpha;
    std::vector<BoundEntry> entries;
    std::vector<ModulusRow> modulus;
    double split_error = 0;  // max |q - split| / max(1, |q|)
    bool all_pass() const;
    const BoundEntry* find(const std::string& id) const;
    std::string to_json() const;
};

BoundReport verify_symbol_bounds(End end, const ContourSpec& c, const WarpProfile& profile, const SymbolGrid& grid = {});

}  // namespace cuspscale

namespace cuspscale {

// n log-spaced alpha values inside one branch's alpha range ({0} for the cusp alpha = 0 case
// is requested with Branch::SmallAlpha and n = 0).
std::vector<double> branch_alpha_sweep(End end, Branch b, double R, double theta, int n);

}  // namespace cuspscale
