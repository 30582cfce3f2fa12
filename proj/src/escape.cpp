#include "cuspscale/escape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace cuspscale {

const char* component_name(EscapeComponent c) {
    switch (c) {
        case EscapeComponent::Funnel: return "funnel";
        case EscapeComponent::Cusp: return "cusp";
        case EscapeComponent::Core: return "core";
    }
    return "?";
}

Chart EscapeField::chart() const {
    switch (component) {
        case EscapeComponent::Funnel: return Chart::Funnel;
        case EscapeComponent::Cusp: return Chart::Cusp;
        default: return Chart::Global;
    }
}

bool EscapeField::in_domain(double r) const {
    if (component == EscapeComponent::Cusp) return r >= 0;
    if (component == EscapeComponent::Core) return r < 1;
    return true;
}

namespace {

// integral of the smooth step over [0, x]
double step_integral(double x) {
    if (x <= 0) return 0;
    if (x >= 1) return x - 0.5;
    return integrate_pieces([](double u) { return smooth_step(u).v; }, 0.0, x, {});
}

}  // namespace

Jet EscapeField::chi(double r) const {
    const double s = slope;
    switch (component) {
        case EscapeComponent::Funnel: {
            if (r <= 1 || r >= R_F + 6) return {};
            if (r < 2) {
                const Jet S = smooth_step(r - 1);
                return {step_integral(r - 1) + 0.5 * S.v, S.v + 0.5 * S.d1, S.d1 + 0.5 * S.d2};
            }
            if (r <= R_F + 5) return {r - 1, 1, 0};
            const Jet S = smooth_step(r - R_F - 5);
            const double V = r - 1, U = 1 - S.v;
            return {V * U, U - V * S.d1, -2 * S.d1 - V * S.d2};
        }
        case EscapeComponent::Cusp: {
            if (r < 0 || r >= R_C + 7) return {};
            const double L = 1 - s * r;
            if (r <= R_C + 5) return {L, -s, 0};
            const Jet S = smooth_step(r, R_C + 5, R_C + 7);
            return {L * (1 - S.v), -s * (1 - S.v) - L * S.d1, 2 * s * S.d1 - L * S.d2};
        }
        case EscapeComponent::Core: {
            if (r <= -4 || r >= 1) return {};
            const double L = 1 + s * (1 - r);
            if (r >= -3) return {L, -s, 0};
            const Jet S = smooth_step(r + 4);
            return {L * S.v, -s * S.v + L * S.d1, -2 * s * S.d1 + L * S.d2};
        }
    }
    return {};
}

double EscapeField::psi(double p) const {
    const double d = delta_p;
    if (p <= 1 - 2 * d || p >= 1 + 2 * d) return 0;
    if (p < 1 - d) return smooth_step(p, 1 - 2 * d, 1 - d).v;
    if (p > 1 + d) return 1 - smooth_step(p, 1 + d, 1 + 2 * d).v;
    return 1;
}

double EscapeField::psi1(double p) const {
    const double d = delta_p;
    if (p <= 1 - 2 * d || p >= 1 + 2 * d) return 0;
    if (p < 1 - d) return smooth_step(p, 1 - 2 * d, 1 - d).d1;
    if (p > 1 + d) return -smooth_step(p, 1 + d, 1 + 2 * d).d1;
    return 0;
}

PhasePoint to_chart(const PhasePoint& x, Chart target) {
    PhasePoint g = x;
    if (x.chart == Chart::Cusp) g = {x.r + 1, x.rho, x.alpha * std::exp(-2.0), Chart::Global};
    if (x.chart == Chart::Funnel) g = {-x.r - 1, -x.rho, x.alpha * std::exp(2.0), Chart::Global};
    switch (target) {
        case Chart::Global: return g;
        case Chart::Cusp: return {g.r - 1, g.rho, g.alpha * std::exp(2.0), Chart::Cusp};
        case Chart::Funnel: return {-g.r - 1, -g.rho, g.alpha * std::exp(-2.0), Chart::Funnel};
    }
    return g;
}

namespace {

double sum_G(const EscapeSet& s, const PhasePoint& x, const ModelSurface& m) {
    double v = 0;
    for (const EscapeField* f : s.all()) v += escape_value(*f, x, m);
    return v;
}

double min_h_core_cusp(const EscapeSet& s, const ModelSurface& m, const EscapeGrid& g, double delta_p) {
    double lo = std::numeric_limits<double>::infinity();
    const int K = static_cast<int>(std::floor(delta_p / g.p_step + 1e-9));
    for (int kp = -K; kp <= K; ++kp) {
        const double p = 1 + kp * g.p_step;
        for (int i = 0; i < g.t_points; ++i) {
            const double t = -1 - s.R + (2 + 2 * s.R) * i / (g.t_points - 1);
            for (int j = 0; j < g.rho_points; ++j) {
                const double rho = -std::sqrt(p) + 2 * std::sqrt(p) * j / (g.rho_points - 1);
                const PhasePoint x{t, rho, std::max(0.0, p - rho * rho) * std::exp(-2 * t), Chart::Global};
                lo = std::min(lo, poisson_derivative(s.core, x, m) + poisson_derivative(s.cusp, x, m));
            }
        }
    }
    return lo;
}

}  // namespace

EscapeSet build_escape(const ModelSurface& m, const EscapeParams& prm) {
    if (!m.glue || m.cusp_profile.kind != WarpProfile::Kind::ConstantOne ||
        m.funnel_profile.kind != WarpProfile::Kind::ConstantOne)
        throw ConfigError("escape construction supports only the globally warped glued model");
    if (!(prm.delta_p > 0 && prm.delta_p < 0.25)) throw ConfigError("delta_p must lie in (0, 0.25)");
    EscapeSet s;
    s.theta = m.theta;
    s.R = prm.R;
    const double t = std::tan(m.theta);
    EscapeField base;
    base.R_F = 0.5 * std::log(12.0 / t) + 1.0;
    base.R_C = 0.5 * std::log(12.0 / t) + M_PI / t;
    base.delta_p = prm.delta_p;
    base.slope = 1.0 / (2.0 * (base.R_C + 5.0));
    s.funnel = s.cusp = s.core = base;
    s.funnel.component = EscapeComponent::Funnel;
    s.cusp.component = EscapeComponent::Cusp;
    s.core.component = EscapeComponent::Core;
    s.cusp.k = s.core.k = -1;
    EscapeGrid g;
    g.t_points = 401;
    g.rho_points = 101;
    s.negative_excursion = std::max(0.0, -min_h_core_cusp(s, m, g, prm.delta_p));
    if (prm.C_F >= 0) s.C_F = prm.C_F;
    else s.C_F = s.negative_excursion > 0 ? prm.calibration * s.negative_excursion : 1.0;
    s.funnel.k = s.C_F;
    return s;
}

double escape_value(const EscapeField& f, const PhasePoint& x, const ModelSurface& m) {
    const PhasePoint y = to_chart(x, f.chart());
    if (!f.in_domain(y.r)) return 0;
    return f.k * y.rho * f.chi(y.r).v * f.psi(hamiltonian(y, m));
}

double poisson_derivative(const EscapeField& f, const PhasePoint& x, const ModelSurface& m, const ContourSpec* c) {
    const End end = f.component == EscapeComponent::Cusp ? End::Cusp : End::Funnel;
    if (c) {
        if (f.component == EscapeComponent::Core) throw ConfigError("scaled bracket needs an end field");
        if (c->end != end) throw ConfigError("contour end does not match the escape field");
    }
    const PhasePoint y = to_chart(x, f.chart());
    if (!f.in_domain(y.r)) return 0;
    const Jet X = f.chi(y.r);
    const double p = hamiltonian(y, m);
    const double ps = f.psi(p), ps1 = f.psi1(p);
    if (X.v == 0 && X.d1 == 0) return 0;
    if (ps == 0 && ps1 == 0) return 0;
    const auto [rdot, rhodot] = flow_field(y, m);
    const double p_rho = rdot, p_r = -rhodot;
    const double rho = y.rho;
    const double Gr = f.k * rho * (X.d1 * ps + X.v * ps1 * p_r);
    const double Grho = f.k * (X.v * ps + rho * X.v * ps1 * p_rho);
    if (!c) return rdot * Gr + rhodot * Grho;

    const Jet F = eval_contour(*c, y.r);
    const cplx d(1.0, F.d1), z(y.r, F.v);
    const WarpProfile& prof = end == End::Cusp ? m.cusp_profile : m.funnel_profile;
    const WarpJet w = warp_jet(prof, z);
    const double sg = end == End::Cusp ? 2.0 : -2.0;
    const cplx e = std::exp(sg * z) * y.alpha;
    const double a_rho = std::real(2.0 * rho / (d * d));
    const double a_r = std::real(cplx(0, -2) * rho * rho * F.d2 / (d * d * d) + (sg * e * w.b + e * w.b1) * d);
    return a_rho * Gr - a_r * Grho;
}

double poisson_sum(const EscapeSet& s, const PhasePoint& x, const ModelSurface& m) {
    double v = 0;
    for (const EscapeField* f : s.all()) v += poisson_derivative(*f, x, m);
    return v;
}

double flow_derivative_fd(const EscapeField& f, const PhasePoint& x, const ModelSurface& m, double eps) {
    // flow in the field's chart so that no chart switch happens mid-step
    const PhasePoint y0 = to_chart(x, f.chart());
    auto step = [&](const PhasePoint& y, double h) {
        auto shifted = [&](const std::pair<double, double>& k, double c) {
            PhasePoint q = y;
            q.r += c * k.first;
            q.rho += c * k.second;
            return q;
        };
        const auto k1 = flow_field(y, m);
        const auto k2 = flow_field(shifted(k1, h / 2), m);
        const auto k3 = flow_field(shifted(k2, h / 2), m);
        const auto k4 = flow_field(shifted(k3, h), m);
        PhasePoint q = y;
        q.r += h / 6 * (k1.first + 2 * k2.first + 2 * k3.first + k4.first);
        q.rho += h / 6 * (k1.second + 2 * k2.second + 2 * k3.second + k4.second);
        return q;
    };
    auto G = [&](double tau) {
        const int n = static_cast<int>(std::lround(std::abs(tau) / eps));
        PhasePoint y = y0;
        for (int i = 0; i < n; ++i) y = step(y, tau > 0 ? eps : -eps);
        return escape_value(f, y, m);
    };
    return (-G(2 * eps) + 8 * G(eps) - 8 * G(-eps) + G(-2 * eps)) / (12 * eps);
}

bool EscapeReport::all_pass() const {
    return std::all_of(regions.begin(), regions.end(), [](const RegionMargin& r) { return r.pass; });
}

const RegionMargin* EscapeReport::find(const std::string& id) const {
    for (const auto& r : regions)
        if (r.id == id) return &r;
    return nullptr;
}

std::string EscapeReport::to_json() const {
    nlohmann::ordered_json j;
    j["C_F"] = C_F;
    j["delta0"] = delta0;
    j["delta_p"] = delta_p;
    j["delta_f"] = delta_f;
    j["empirical_delta0"] = empirical_delta0;
    j["all_pass"] = all_pass();
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : regions)
        arr.push_back({{"id", r.id}, {"pass", r.pass}, {"margin", r.margin}, {"samples", r.samples},
                       {"witness", {{"r", r.witness_r}, {"rho", r.witness_rho}, {"p", r.witness_p},
                                    {"alpha", r.witness_alpha}}}});
    j["regions"] = arr;
    return j.dump(2);
}

namespace {

void note(RegionMargin& rm, double v, double r, double rho, double p, double a) {
    ++rm.samples;
    if (v < rm.margin) {
        rm.margin = v;
        rm.witness_r = r;
        rm.witness_rho = rho;
        rm.witness_p = p;
        rm.witness_alpha = a;
    }
}

std::vector<double> alpha_list(double lo, double hi, int n) {
    std::vector<double> a{0.0};
    for (int i = 0; i < n; ++i) a.push_back(lo * std::pow(hi / lo, i / (n - 1.0)));
    return a;
}

}  // namespace

EscapeReport verify_escape(const EscapeSet& s, const ModelSurface& m, double delta0, double delta_p, double delta_f,
                           const EscapeGrid& g, const ContourOptions& copt) {
    EscapeReport rep;
    rep.C_F = s.C_F;
    rep.delta0 = delta0;
    rep.delta_p = delta_p;
    rep.delta_f = delta_f;
    const int K = static_cast<int>(std::floor(delta_p / g.p_step + 1e-9));
    const double inf = std::numeric_limits<double>::infinity();

    RegionMargin unscaled{"unscaled", true, inf};
    for (int kp = -K; kp <= K; ++kp) {
        const double p = 1 + kp * g.p_step;
        for (int i = 0; i < g.t_points; ++i) {
            const double t = -1 - s.R + (2 + 2 * s.R) * i / (g.t_points - 1);
            for (int j = 0; j < g.rho_points; ++j) {
                const double rho = -std::sqrt(p) + 2 * std::sqrt(p) * j / (g.rho_points - 1);
                const double a = std::max(0.0, p - rho * rho) * std::exp(-2 * t);
                note(unscaled, poisson_sum(s, {t, rho, a, Chart::Global}, m), t, rho, p, a);
            }
        }
    }
    rep.regions.push_back(unscaled);

    for (const EscapeField* f : {&s.funnel, &s.cusp}) {
        const bool cusp = f == &s.cusp;
        const End end = cusp ? End::Cusp : End::Funnel;
        const double Rj = cusp ? f->R_C : f->R_F;
        const double r_lo = 3, r_hi = s.R + Rj;
        const double pmax = 1 + K * g.p_step;
        // alpha range reaching p <= pmax somewhere on [r_lo, r_hi]
        const double amax = cusp ? pmax * std::exp(-2 * r_lo) : pmax * std::exp(2 * r_hi);
        const double amin = cusp ? 1e-16 : 1e-6;
        RegionMargin rm{std::string("collar.") + end_name(end), true, inf};
        const WarpProfile& prof = cusp ? m.cusp_profile : m.funnel_profile;
        for (double a : alpha_list(amin, amax, g.alpha_points)) {
            const ContourSpec c = build_contour(end, s.R, m.theta, a, prof, copt);
            for (int i = 0; i < g.r_points; ++i) {
                const double r = r_lo + (r_hi - r_lo) * i / (g.r_points - 1);
                const Jet F = eval_contour(c, r);
                if (std::abs(F.v) + std::abs(F.d1) + std::abs(F.d2) > delta_f) continue;
                const double e = a * std::exp(cusp ? 2 * r : -2 * r);
                for (int kp = -K; kp <= K; ++kp) {
                    const double p = 1 + kp * g.p_step;
                    if (p < e) continue;
                    const double rr = std::sqrt(p - e);
                    for (double rho : {rr, -rr}) {
                        const PhasePoint x{r, rho, a, cusp ? Chart::Cusp : Chart::Funnel};
                        note(rm, poisson_derivative(*f, x, m, &c), r, rho, p, a);
                    }
                }
            }
        }
        rep.regions.push_back(rm);
    }
    rep.empirical_delta0 = inf;
    for (auto& r : rep.regions) {
        r.pass = r.samples > 0 && r.margin >= delta0;
        rep.empirical_delta0 = std::min(rep.empirical_delta0, r.margin);
    }
    return rep;
}

std::string escape_csv(const EscapeSet& s, const ModelSurface& m, double p, int t_points, int rho_points) {
    std::ostringstream os;
    os.precision(10);
    os << "r,rho,G,HpG\n";
    const double lo = -1 - s.funnel.R_F - 7, hi = 1 + s.cusp.R_C + 8;
    for (int i = 0; i < t_points; ++i) {
        const double t = lo + (hi - lo) * i / (t_points - 1);
        for (int j = 0; j < rho_points; ++j) {
            const double rho = -std::sqrt(p) + 2 * std::sqrt(p) * j / (rho_points - 1);
            const PhasePoint x{t, rho, std::max(0.0, p - rho * rho) * std::exp(-2 * t), Chart::Global};
            os << t << ',' << rho << ',' << sum_G(s, x, m) << ',' << poisson_sum(s, x, m) << '\n';
        }
    }
    return os.str();
}

}  // namespace cuspscale
