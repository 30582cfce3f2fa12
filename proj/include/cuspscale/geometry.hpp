#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cuspscale {

using cplx = std::complex<double>;

enum class End { Cusp, Funnel };
const char* end_name(End e);

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// beta(z) for one end. UserAnalytic: 1 + sum_k a_k (z + shift)^{-k}, k = 1..K.
struct WarpProfile {
    enum class Kind { ConstantOne, HyperbolicFunnel, UserAnalytic };
    Kind kind = Kind::ConstantOne;
    double theta_max = 1.5707963267948966;
    double R_shift = 0;
    std::vector<double> coeffs;
    double shift = 1;

    static WarpProfile constant_one(double theta_max = 1.5707963267948966);
    static WarpProfile hyperbolic_funnel(double R_shift, double theta_max = 0.7853981633974483);
    static WarpProfile user_analytic(std::vector<double> coeffs, double shift, double theta_max);

    // Limit of beta along the real axis; hypotheses and symbols use beta / scale.
    double scale() const { return kind == Kind::HyperbolicFunnel ? 2.0 : 1.0; }
    std::string describe() const;
};

// Throws DomainError outside the cone |arg z| < theta_max or at z = 0.
cplx eval_warp(const WarpProfile& p, cplx z);

// Normalized beta, beta', beta'' at z.
struct WarpJet {
    cplx b, b1, b2;
};
WarpJet warp_jet(const WarpProfile& p, cplx z);

struct Perturbation {
    double amplitude = 0, center = 0, half_width = 1;
    bool active() const { return amplitude != 0; }
    double operator()(double t) const;
};

struct CrossSection {
    std::vector<double> eigenvalues;  // distinct values, nondecreasing
    std::vector<int> multiplicity;
    double circle_length = 0;         // > 0 when generated from a circle
    // Distinct circle eigenvalues (2 pi m / l)^2, m = 0..count-1.
    static CrossSection circle(double length, int count);
    double lambda(std::size_t m) const;
};

struct ModelSurface {
    int n = 2;
    WarpProfile cusp_profile, funnel_profile;
    CrossSection cross_section;
    double theta = 0.4636476090008061;  // arctan(1/2)
    bool glue = true;
    Perturbation perturbation;
    // Pieces entering the 0-volume (n = 2).
    double cusp_length = 1;            // length of the cusp cross-section
    double core_area = 0;              // vol(X_0)
    double funnel_hyperbolic_length = 1;
    double funnel_offset = 0;          // X_F sits at r >= offset in the hyperbolic funnel

    static ModelSurface parabolic_cylinder(double length = 1.0, int modes = 1);
    std::string hypothesis_errors() const;  // empty if structurally valid
};

cplx potential_V(End end, const WarpProfile& p, int n, cplx z);
double conjugation_weight(End end, const WarpProfile& p, int n, double r);

struct CurvatureQuery {
    double f, f1, f2;
    double K_tilde = 0;
};
struct Curvatures {
    double radial, tangential;
};
Curvatures sectional_curvature(const CurvatureQuery& q);

// Warp function of the end metric, e^{-r}/beta (cusp) or e^{r}/beta (funnel), with derivatives.
CurvatureQuery end_warp_function(End end, const WarpProfile& p, double r, double K_tilde = 0);

struct SamplingPlan {
    int radial_points = 2048;
    double r_min = 1e-3, r_max = 1e3;
    int rays = 32;
    double real_r_max = 30;      // derivative bound and curvature checks on [0, real_r_max]
    int real_points = 3001;
    double derivative_cap = 1e3; // empirical C_k must stay below this
};

struct HypothesisEntry {
    std::string id;
    bool pass = true;
    double margin = 0;
    std::string witness;
    std::string detail;
};

struct ValidationReport {
    std::vector<HypothesisEntry> entries;
    bool all_pass() const;
    const HypothesisEntry* find(const std::string& id) const;
    std::string to_jsonl() const;
};

ValidationReport validate_profile(End end, const WarpProfile& p, const SamplingPlan& plan);
ValidationReport validate_surface(const ModelSurface& m, const SamplingPlan& plan);

struct QuadraturePlan {
    double tolerance = 1e-12;
};
struct ZeroVolume {
    double core, cusp, funnel_missing, total;
};
ZeroVolume zero_volume(const ModelSurface& m, const QuadraturePlan& plan = {});

}  // namespace cuspscale
