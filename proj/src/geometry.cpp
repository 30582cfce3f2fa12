#include "cuspscale/geometry.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include "json.hpp"
#include <sstream>

namespace cuspscale {

namespace {

constexpr double kPi = 3.14159265358979323846;

cplx raw_warp(const WarpProfile& p, cplx z) {
    switch (p.kind) {
        case WarpProfile::Kind::ConstantOne:
            return 1.0;
        case WarpProfile::Kind::HyperbolicFunnel:
            // e^{w} sech(w) = 2 / (1 + e^{-2w})
            return 2.0 / (1.0 + std::exp(-2.0 * (z + p.R_shift)));
        case WarpProfile::Kind::UserAnalytic: {
            cplx s = 1.0, inv = 1.0 / (z + p.shift), pw = inv;
            for (double a : p.coeffs) {
                s += a * pw;
                pw *= inv;
            }
            return s;
        }
    }
    return 1.0;
}

void check_cone(const WarpProfile& p, cplx z) {
    if (std::abs(z) == 0.0 || !(std::abs(std::arg(z)) < p.theta_max)) {
        std::ostringstream os;
        os << "warp argument " << z << " outside cone |arg z| < " << p.theta_max;
        throw DomainError(os.str());
    }
}

// Trapezoid rule on a circle: beta^{(k)}(z) = k!/(r^k M) sum beta(z + r w_j) w_j^{-k}.
WarpJet cauchy_jet(const WarpProfile& p, cplx z) {
    const double r = 0.5 * std::min(std::abs(z) * std::sin(p.theta_max), 1.0);
    constexpr int M = 64;
    cplx d1 = 0, d2 = 0;
    for (int j = 0; j < M; ++j) {
        const cplx w = std::polar(1.0, 2.0 * kPi * j / M);
        const cplx b = raw_warp(p, z + r * w);
        d1 += b / w;
        d2 += b / (w * w);
    }
    const double sc = p.scale();
    return {raw_warp(p, z) / sc, d1 / (M * r * sc), 2.0 * d2 / (M * r * r * sc)};
}

}  // namespace

const char* end_name(End e) { return e == End::Cusp ? "cusp" : "funnel"; }

WarpProfile WarpProfile::constant_one(double theta_max) {
    WarpProfile p;
    p.theta_max = theta_max;
    return p;
}

WarpProfile WarpProfile::hyperbolic_funnel(double R_shift, double theta_max) {
    WarpProfile p;
    p.kind = Kind::HyperbolicFunnel;
    p.R_shift = R_shift;
    p.theta_max = theta_max;
    return p;
}

WarpProfile WarpProfile::user_analytic(std::vector<double> coeffs, double shift, double theta_max) {
    if (!(shift > 0)) throw ConfigError("user-analytic profile needs shift > 0");
    WarpProfile p;
    p.kind = Kind::UserAnalytic;
    p.coeffs = std::move(coeffs);
    p.shift = shift;
    p.theta_max = theta_max;
    return p;
}

std::string WarpProfile::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::ConstantOne: os << "constant-one"; break;
        case Kind::HyperbolicFunnel: os << "hyperbolic-funnel(R_shift=" << R_shift << ")"; break;
        case Kind::UserAnalytic:
            os << "user-analytic(shift=" << shift << ", coeffs=" << coeffs.size() << ")";
            break;
    }
    os << ", theta_max=" << theta_max;
    return os.str();
}

cplx eval_warp(const WarpProfile& p, cplx z) {
    check_cone(p, z);
    return raw_warp(p, z);
}

WarpJet warp_jet(const WarpProfile& p, cplx z) {
    check_cone(p, z);
    switch (p.kind) {
        case WarpProfile::Kind::ConstantOne:
            return {1.0, 0.0, 0.0};
        case WarpProfile::Kind::HyperbolicFunnel: {
            // b = 1/(1+u), u = e^{-2(z+R)}
            const cplx u = std::exp(-2.0 * (z + p.R_shift));
            const cplx d = 1.0 + u;
            return {1.0 / d, 2.0 * u / (d * d), -4.0 * u * (1.0 - u) / (d * d * d)};
        }
        case WarpProfile::Kind::UserAnalytic:
            return cauchy_jet(p, z);
    }
    return {1.0, 0.0, 0.0};
}

double Perturbation::operator()(double t) const {
    if (!active()) return 0;
    const double x = (t - center) / half_width;
    if (std::abs(x) >= 1) return 0;
    return amplitude * std::exp(1.0 - 1.0 / (1.0 - x * x));
}

CrossSection CrossSection::circle(double length, int count) {
    if (!(length > 0) || count < 1) throw ConfigError("circle cross-section needs length > 0, count >= 1");
    CrossSection c;
    c.circle_length = length;
    for (int m = 0; m < count; ++m) {
        const double k = 2.0 * kPi * m / length;
        c.eigenvalues.push_back(k * k);
        c.multiplicity.push_back(m == 0 ? 1 : 2);
    }
    return c;
}

double CrossSection::lambda(std::size_t m) const {
    if (circle_length > 0) {
        const double k = 2.0 * kPi * static_cast<double>(m) / circle_length;
        return k * k;
    }
    if (m >= eigenvalues.size()) throw ConfigError("mode index beyond the supplied eigenvalue list");
    return eigenvalues[m];
}

ModelSurface ModelSurface::parabolic_cylinder(double length, int modes) {
    ModelSurface m;
    m.n = 2;
    m.cusp_profile = WarpProfile::constant_one();
    m.funnel_profile = WarpProfile::constant_one();
    m.cross_section = CrossSection::circle(length, modes);
    m.glue = true;
    m.cusp_length = length * std::exp(-1.0);
    m.core_area = 2.0 * std::sinh(1.0) * length;
    m.funnel_hyperbolic_length = length;
    m.funnel_offset = 0;
    return m;
}

std::string ModelSurface::hypothesis_errors() const {
    std::ostringstream os;
    if (n < 2) os << "dimension n must be >= 2; ";
    if (!(theta > 0) || std::tan(theta) > 0.5 + 1e-15) os << "scaling angle needs 0 < tan(theta) <= 1/2; ";
    const auto& ev = cross_section.eigenvalues;
    if (ev.empty()) os << "cross-section eigenvalue list is empty; ";
    for (std::size_t i = 1; i < ev.size(); ++i)
        if (ev[i] < ev[i - 1]) {
            os << "cross-section eigenvalues not sorted; ";
            break;
        }
    if (!ev.empty() && (ev[0] != 0.0 || (ev.size() > 1 && ev[1] == 0.0) ||
                        (!cross_section.multiplicity.empty() && cross_section.multiplicity[0] != 1)))
        os << "lambda_0 = 0 must appear exactly once; ";
    for (double l : ev)
        if (l < 0) {
            os << "negative cross-section eigenvalue; ";
            break;
        }
    if (perturbation.active() && !(perturbation.half_width > 0 && std::isfinite(perturbation.half_width)))
        os << "perturbation support must be a compact interval; ";
    return os.str();
}

cplx potential_V(End end, const WarpProfile& p, int n, cplx z) {
    const WarpJet j = warp_jet(p, z);
    const cplx l1 = j.b1 / j.b, l2 = j.b2 / j.b;
    const double a = (n - 1.0) * (n - 1.0) / 2.0;
    const double sign = end == End::Funnel ? -1.0 : 1.0;
    return sign * a * l1 - 0.5 * (n - 1.0) * l2 + 0.25 * (n * n - 1.0) * l1 * l1;
}

double conjugation_weight(End end, const WarpProfile& p, int n, double r) {
    if (r < 0) throw DomainError("conjugation weight needs r >= 0");
    const double lb = r == 0 ? std::log(std::real(raw_warp(p, 0.0)))
                             : std::log(std::real(eval_warp(p, r)));
    const double s = end == End::Funnel ? -1.0 : 1.0;
    return 0.5 * (n - 1.0) * (s * r + lb);
}

Curvatures sectional_curvature(const CurvatureQuery& q) {
    return {-q.f2 / q.f, (q.K_tilde - q.f1 * q.f1) / (q.f * q.f)};
}

CurvatureQuery end_warp_function(End end, const WarpProfile& p, double r, double K_tilde) {
    // f = e^{s r}/b, s = -1 cusp, +1 funnel; L = log f, L' = s - b'/b, L'' = -(b''/b - (b'/b)^2)
    const cplx zr = r > 0 ? cplx(r, 0) : cplx(1e-12, 0);
    const WarpJet j = warp_jet(p, zr);
    const double b = j.b.real(), b1 = j.b1.real(), b2 = j.b2.real();
    const double s = end == End::Cusp ? -1.0 : 1.0;
    const double f = std::exp(s * r) / b;
    const double L1 = s - b1 / b;
    const double L2 = -(b2 / b - (b1 / b) * (b1 / b));
    return {f, f * L1, f * (L1 * L1 + L2), K_tilde};
}

bool ValidationReport::all_pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass; });
}

const HypothesisEntry* ValidationReport::find(const std::string& id) const {
    for (const auto& e : entries)
        if (e.id == id) return &e;
    return nullptr;
}

std::string ValidationReport::to_jsonl() const {
    std::ostringstream os;
    for (const auto& e : entries) {
        nlohmann::ordered_json j;
        j["id"] = e.id;
        j["pass"] = e.pass;
        j["margin"] = e.margin;
        j["witness"] = e.witness;
        if (!e.detail.empty()) j["detail"] = e.detail;
        os << j.dump() << '\n';
    }
    return os.str();
}

namespace {

std::string zstr(cplx z) {
    std::ostringstream os;
    os.precision(10);
    os << "z=" << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i";
    return os.str();
}

std::vector<double> log_grid(double a, double b, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = a * std::pow(b / a, n == 1 ? 0.0 : double(i) / (n - 1));
    return g;
}

}  // namespace

ValidationReport validate_profile(End end, const WarpProfile& p, const SamplingPlan& plan) {
    ValidationReport rep;
    const std::string pre = std::string(end_name(end)) + ".";
    const auto radii = log_grid(plan.r_min, plan.r_max, plan.radial_points);

    // rays strictly inside the cone
    std::vector<double> rays(plan.rays);
    for (int k = 0; k < plan.rays; ++k)
        rays[k] = p.theta_max * (-1.0 + (2.0 * k + 1.0) / plan.rays) * 0.999;

    HypothesisEntry near{pre + "warp_near_one", true, 0, "", ""};
    double worst = -1;
    cplx wz;
    for (double phi : rays)
        for (double r : radii) {
            const cplx z = std::polar(r, phi);
            const double d = std::abs(warp_jet(p, z).b - 1.0);
            if (!std::isfinite(d) || d > worst) {
                worst = std::isfinite(d) ? d : INFINITY;
                wz = z;
            }
        }
    near.margin = 1.0 / 3.0 - worst;
    near.pass = near.margin >= 0;
    near.witness = zstr(wz);
    rep.entries.push_back(near);

    // empirical Cauchy constants on the half-angle sub-cone
    double C[3] = {0, 0, 0};
    cplx Cz[3];
    for (double phi : rays) {
        if (std::abs(phi) > 0.5 * p.theta_max) continue;
        for (double r : radii) {
            const cplx z = std::polar(r, phi);
            const WarpJet j = warp_jet(p, z);
            const double c1 = std::abs(j.b1) * r, c2 = std::abs(j.b2) * r * r;
            if (!(c1 <= C[1])) { C[1] = std::isfinite(c1) ? c1 : INFINITY; Cz[1] = z; }
            if (!(c2 <= C[2])) { C[2] = std::isfinite(c2) ? c2 : INFINITY; Cz[2] = z; }
        }
    }
    HypothesisEntry cb{pre + "cauchy_bounds", true, 0, "", ""};
    const double cmax = std::max(C[1], C[2]);
    cb.margin = plan.derivative_cap - cmax;
    cb.pass = std::isfinite(cmax) && cb.margin >= 0;
    cb.witness = zstr(C[1] >= C[2] ? Cz[1] : Cz[2]);
    {
        std::ostringstream os;
        os.precision(8);
        os << "C1=" << C[1] << " C2=" << C[2];
        cb.detail = os.str();
    }
    rep.entries.push_back(cb);

    // |b''| + |b'| <= b/2 on the real axis
    HypothesisEntry db{pre + "derivative_bound", true, INFINITY, "", ""};
    for (int i = 0; i < plan.real_points; ++i) {
        const double r = plan.real_r_max * i / (plan.real_points - 1);
        const WarpJet j = warp_jet(p, cplx(r > 0 ? r : 1e-12, 0));
        const double m = 0.5 * j.b.real() - std::abs(j.b1.real()) - std::abs(j.b2.real());
        if (!(m >= db.margin)) {
            db.margin = std::isfinite(m) ? m : -INFINITY;
            db.witness = "r=" + std::to_string(r);
        }
    }
    db.pass = db.margin >= 0;
    rep.entries.push_back(db);

    // curvature of the end metric; positivity is flagged
    double kr_min = INFINITY, kr_max = -INFINITY, kt_min = INFINITY, kt_max = -INFINITY;
    double kr_at = 0, kt_at = 0;
    for (int i = 0; i < plan.real_points; ++i) {
        const double r = plan.real_r_max * i / (plan.real_points - 1);
        const Curvatures k = sectional_curvature(end_warp_function(end, p, r));
        if (k.radial > kr_max) { kr_max = k.radial; kr_at = r; }
        if (k.tangential > kt_max) { kt_max = k.tangential; kt_at = r; }
        kr_min = std::min(kr_min, k.radial);
        kt_min = std::min(kt_min, k.tangential);
    }
    auto curv = [&](const char* id, double lo, double hi, double at) {
        HypothesisEntry e{pre + id, hi < 0, -hi, "r=" + std::to_string(at), ""};
        std::ostringstream os;
        os.precision(12);
        os << "min=" << lo << " max=" << hi;
        e.detail = os.str();
        rep.entries.push_back(e);
    };
    curv("curvature_radial", kr_min, kr_max, kr_at);
    curv("curvature_tangential", kt_min, kt_max, kt_at);
    return rep;
}

ValidationReport validate_surface(const ModelSurface& m, const SamplingPlan& plan) {
    ValidationReport rep;
    {
        const std::string err = m.hypothesis_errors();
        HypothesisEntry s{"structure", err.empty(), err.empty() ? 0.0 : -1.0, err, ""};
        rep.entries.push_back(s);
    }
    {
        HypothesisEntry th{"theta_small", true, 0.5 - std::tan(m.theta), "", ""};
        th.pass = th.margin >= -1e-15;
        th.witness = "theta=" + std::to_string(m.theta);
        rep.entries.push_back(th);
    }
    for (End e : {End::Cusp, End::Funnel}) {
        const auto sub = validate_profile(e, e == End::Cusp ? m.cusp_profile : m.funnel_profile, plan);
        rep.entries.insert(rep.entries.end(), sub.entries.begin(), sub.entries.end());
    }
    return rep;
}

ZeroVolume zero_volume(const ModelSurface& m, const QuadraturePlan& plan) {
    if (m.n != 2) throw ConfigError("0-volume is implemented for n = 2");
    const WarpProfile& pc = m.cusp_profile;
    auto area_density = [&](double r) {
        const double b = std::real(raw_warp(pc, r)) / pc.scale();
        return std::exp(-r) / b;
    };
    // Probe for sign changes or blow-up of 1/beta before integrating.
    for (int i = 0; i <= 4000; ++i) {
        const double r = 40.0 * i / 4000.0;
        const double b = std::real(raw_warp(pc, r));
        if (!std::isfinite(b) || b <= 0 || !std::isfinite(area_density(r))) {
            std::ostringstream os;
            os << "cusp area density not integrable: beta_C(" << r << ") = " << b;
            throw NumericError(os.str());
        }
    }
    double cusp = 0, err = 0;
    try {
        boost::math::quadrature::exp_sinh<double> es;
        cusp = m.cusp_length * es.integrate(area_density, 0.0, INFINITY, plan.tolerance, &err);
    } catch (const std::exception& ex) {
        throw NumericError(std::string("cusp area quadrature failed: ") + ex.what());
    }
    if (!std::isfinite(cusp) || err > 1e-6 * std::max(1.0, std::abs(cusp)))
        throw NumericError("cusp area quadrature did not converge");

    double missing = 0;
    if (m.funnel_offset > 0) {
        boost::math::quadrature::tanh_sinh<double> ts;
        missing = m.funnel_hyperbolic_length *
                  ts.integrate([](double r) { return std::cosh(r); }, 0.0, m.funnel_offset, plan.tolerance);
    }
    return {m.core_area, cusp, missing, m.core_area + cusp - missing};
}

}  // namespace cuspscale
