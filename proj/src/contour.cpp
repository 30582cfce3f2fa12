#include "cuspscale/contour.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cuspscale {

namespace {

constexpr double kPi = 3.14159265358979323846;

cplx beta_at(const WarpProfile& p, cplx z) {
    if (std::abs(z) < 1e-12) z = cplx(1e-12, 0);
    return warp_jet(p, z).b;
}

// Region-I acceptance: wherever |re q| <= delta the imaginary part must be <= 0.
bool region_one_ok(End end, const ContourPiece& piece, const WarpProfile& prof,
                   const std::vector<double>& alphas, double delta, const ContourOptions& opt) {
    const double sgn = end == End::Cusp ? 2.0 : -2.0;
    for (int i = 1; i <= opt.region_check_r; ++i) {
        const double r = piece.a + (piece.b - piece.a) * i / opt.region_check_r;
        const Jet f = piece.eval(r);
        const cplx d = cplx(1.0, f.d1);
        const cplx A = 1.0 / (d * d);
        const cplx z(r, f.v);
        const cplx ez = std::exp(sgn * z) * beta_at(prof, z);
        for (double al : alphas) {
            const cplx E = ez * al - 1.0;
            for (int j = 0; j < opt.region_check_rho; ++j) {
                const double rho = 3.0 * j / (opt.region_check_rho - 1);
                const cplx q = rho * rho * A + E;
                if (std::abs(q.real()) <= delta && q.imag() > 1e-12) return false;
            }
        }
    }
    return true;
}

double default_extent(const ContourSpec& c) {
    if (c.end == End::Cusp) {
        if (c.branch == Branch::IdenticallyZero) return c.R + c.R_j() + 10;
        if (c.alpha == 0) return c.R + 20;
        return c.R_alpha + 10;
    }
    if (c.branch == Branch::Standard) return c.R_F0 + 11;
    return c.R_alpha + 10;
}

}  // namespace

const char* branch_name(Branch b) {
    switch (b) {
        case Branch::IdenticallyZero: return "identically-zero";
        case Branch::SmallAlpha: return "small-alpha";
        case Branch::Standard: return "standard";
        case Branch::LargeAlpha: return "large-alpha";
    }
    return "?";
}

Jet ContourPiece::eval(double r) const {
    switch (kind) {
        case Kind::Zero: return {0, 0, 0};
        case Kind::Const: return {F, 0, 0};
        case Kind::Linear: return {F + slope * (r - a), slope, 0};
        case Kind::Exp: {
            const double s = r - a;
            if (s <= 0) return {0, 0, 0};
            const double v = F * std::exp(C2 / L - C2 / s);
            const double s2 = s * s;
            return {v, v * C2 / s2, v * (C2 * C2 / (s2 * s2) - 2.0 * C2 / (s2 * s))};
        }
    }
    return {};
}

double default_delta_target(double theta) { return 0.9 * std::min(1.0 / 6.0, std::tan(theta) / 12.0); }

double cusp_alpha_threshold(double R, double theta) {
    const double t = std::tan(theta);
    return t / 4.0 * std::exp(-2.0 * (R + kPi / t));
}

double funnel_alpha_threshold(double R) { return 6.0 * std::exp(2.0 * R); }

const ContourPiece& ContourSpec::piece_at(double x) const {
    for (const auto& p : pieces)
        if (x < p.b) return p;
    return pieces.back();
}

Jet ContourSpec::raw(double x) const { return piece_at(x).eval(x); }

double ContourSpec::support_start() const {
    for (const auto& p : pieces)
        if (p.kind != ContourPiece::Kind::Zero) return p.a;
    return std::numeric_limits<double>::infinity();
}

double ContourSpec::R_j() const {
    const double t = std::tan(theta);
    if (end == End::Cusp)
        return branch == Branch::IdenticallyZero ? 0.5 * std::log(12.0 / t) + kPi / t : 1.0;
    return 0.5 * std::log(12.0 / t) + 1.0;
}

ContourSpec ContourSpec::unmollified() const {
    ContourSpec c = *this;
    c.width = 0;
    for (std::size_t i = 0; i < c.r.size(); ++i) {
        const Jet j = raw(c.r[i]);
        c.f[i] = j.v;
        c.f1[i] = j.d1;
        c.f2[i] = j.d2;
    }
    return c;
}

std::string ContourSpec::to_csv() const {
    std::ostringstream os;
    os.precision(12);
    os << "r,f,f1,f2,region\n";
    for (std::size_t i = 0; i < r.size(); ++i)
        os << r[i] << ',' << f[i] << ',' << f1[i] << ',' << f2[i] << ',' << tag[i] << '\n';
    return os.str();
}

std::string ContourSpec::to_polyline() const {
    std::ostringstream os;
    os.precision(8);
    const std::size_t stride = std::max<std::size_t>(1, r.size() / 1000);
    for (std::size_t i = 0; i < r.size(); i += stride) os << (i ? " " : "") << r[i] << ',' << f[i];
    return os.str();
}

Jet eval_contour(const ContourSpec& c, double x) {
    const double w = c.width;
    if (w <= 0) return c.raw(x);
    if (x <= c.support_start() - w) return {0, 0, 0};
    // Pieces that are affine across the whole kernel window are reproduced exactly.
    const ContourPiece& p = c.piece_at(x);
    if (p.kind != ContourPiece::Kind::Exp && x - w >= p.a && x + w <= p.b) return p.eval(x);

    std::vector<double> cuts = c.breakpoints;
    for (int k = 1; k < 8; ++k) cuts.push_back(x - w + 2.0 * w * k / 8.0);
    const double v = integrate_pieces([&](double u) { return c.raw(u).v * mollifier(x - u, w); }, x - w, x + w, cuts);
    const double d1 = integrate_pieces([&](double u) { return c.raw(u).d1 * mollifier(x - u, w); }, x - w, x + w, cuts);
    const double d2 =
        integrate_pieces([&](double u) { return c.raw(u).d1 * mollifier_deriv(x - u, w); }, x - w, x + w, cuts);
    return {v, d1, d2};
}

ContourSpec build_contour(End end, double R, double theta, double alpha, const WarpProfile& profile,
                          const ContourOptions& opt) {
    if (!(R >= 1)) throw ConfigError("contour needs R >= 1");
    const double t = std::tan(theta);
    if (!(t > 0 && t <= 0.5 + 1e-15)) throw ConfigError("contour needs 0 < tan(theta) <= 1/2");
    if (!(alpha >= 0)) throw ConfigError("contour needs alpha >= 0");

    ContourSpec c;
    c.end = end;
    c.R = R;
    c.theta = theta;
    c.alpha = alpha;
    c.width = opt.mollifier_width;
    const double delta = opt.delta_target > 0 ? opt.delta_target : default_delta_target(theta);
    const double inf = std::numeric_limits<double>::infinity();

    using K = ContourPiece::Kind;
    auto search_C2 = [&](ContourPiece piece, const std::vector<double>& alphas) {
        double C2 = 2.0;
        for (int i = 0; i <= opt.c2_max_doublings; ++i, C2 *= 2.0) {
            piece.C2 = C2;
            if (end == End::Cusp || c.branch == Branch::Standard) piece.F = t / C2;
            if (region_one_ok(end, piece, profile, alphas, delta, opt)) return piece;
        }
        throw NumericError("region I: no admissible C2 found in the doubling search");
    };

    if (end == End::Cusp) {
        const double a_t = cusp_alpha_threshold(R, theta);
        c.branch = opt.force_branch ? opt.branch : (alpha > a_t ? Branch::IdenticallyZero : Branch::SmallAlpha);
        if (c.branch == Branch::IdenticallyZero) {
            c.pieces.push_back({K::Zero, 0, inf, 0, 0, 1, 0, "zero"});
            c.breakpoints = {};
        } else {
            ContourPiece one{K::Exp, R, R + 1, 0, 0, 1, 0, "I"};
            one = search_C2(one, {alpha});
            c.C2 = one.C2;
            const double F = one.F;
            c.pieces.push_back({K::Zero, 0, R, 0, 0, 1, 0, "zero"});
            c.pieces.push_back(one);
            if (alpha == 0) {
                c.pieces.push_back({K::Linear, R + 1, inf, F, 0, 1, t, "II"});
                c.breakpoints = {R, R + 1};
            } else {
                const double r_lo = 0.5 * std::log(t / (8.0 * alpha));
                const double r_hi = 0.5 * std::log(3.0 * t / (8.0 * alpha));
                auto r_of = [&](int k) { return R + 1 + (kPi / 2 + kPi * k - F) / t; };
                int k = 0;
                while (r_of(k) + kPi / t < r_lo) ++k;
                const double rk = r_of(k);
                c.k = k;
                c.R_alpha = std::max(r_lo, rk + kPi / (4.0 * t));
                c.slow_slope = (kPi / 4.0) / (c.R_alpha - rk);
                c.upper_bound_excess = std::max(0.0, std::exp(2.0 * c.R_alpha) * alpha - 3.0 * t / 8.0);
                (void)r_hi;
                c.pieces.push_back({K::Linear, R + 1, rk, F, 0, 1, t, "II"});
                c.pieces.push_back({K::Linear, rk, c.R_alpha, kPi / 2 + kPi * k, 0, 1, c.slow_slope, "II"});
                c.pieces.push_back({K::Const, c.R_alpha, inf, 3.0 * kPi / 4 + kPi * k, 0, 1, 0, "III"});
                c.breakpoints = {R, R + 1, rk, c.R_alpha};
            }
        }
    } else {
        const double a_t = funnel_alpha_threshold(R);
        c.branch = opt.force_branch ? opt.branch : (alpha > a_t ? Branch::LargeAlpha : Branch::Standard);
        if (c.branch == Branch::Standard) {
            c.R_F0 = R + 0.5 * std::log(12.0 / t);
            std::vector<double> alphas{0.0};
            for (int i = 0; i <= 6; ++i) alphas.push_back(a_t * std::pow(10.0, -i));
            ContourPiece one{K::Exp, c.R_F0, c.R_F0 + 1, 0, 0, 1, 0, "I"};
            one = search_C2(one, alphas);
            c.C2 = one.C2;
            c.pieces.push_back({K::Zero, 0, c.R_F0, 0, 0, 1, 0, "zero"});
            c.pieces.push_back(one);
            c.pieces.push_back({K::Linear, c.R_F0 + 1, inf, one.F, 0, 1, t, "II"});
            c.breakpoints = {c.R_F0, c.R_F0 + 1};
        } else {
            if (!(alpha > 5.0 * std::exp(2.0 * R)))
                throw ConfigError("large-alpha funnel branch needs alpha > 5 e^{2R}");
            const double r1 = 0.5 * std::log(alpha / 5.0);
            c.R_alpha = 0.5 * std::log(2.0 * alpha / t);
            ContourPiece one{K::Exp, R, r1, kPi / 8, 0, r1 - R, 0, "I"};
            one = search_C2(one, {alpha});
            c.C2 = one.C2;
            c.pieces.push_back({K::Zero, 0, R, 0, 0, 1, 0, "zero"});
            c.pieces.push_back(one);
            c.pieces.push_back({K::Const, r1, c.R_alpha, kPi / 8, 0, 1, 0, "II"});
            c.pieces.push_back({K::Linear, c.R_alpha, inf, kPi / 8, 0, 1, t, "III"});
            c.breakpoints = {R, r1, c.R_alpha};
        }
    }

    const double r_max = opt.r_max > 0 ? opt.r_max : default_extent(c);
    const int n = std::max(2, opt.samples);
    c.r.resize(n);
    c.f.resize(n);
    c.f1.resize(n);
    c.f2.resize(n);
    c.tag.resize(n);
    for (int i = 0; i < n; ++i) {
        const double x = r_max * i / (n - 1);
        const Jet j = eval_contour(c, x);
        c.r[i] = x;
        c.f[i] = j.v;
        c.f1[i] = j.d1;
        c.f2[i] = j.d2;
        c.tag[i] = c.piece_at(x).region;
        if (x > 0 && !(std::abs(std::atan2(j.v, x)) < profile.theta_max)) {
            std::ostringstream os;
            os << "contour leaves the profile cone at r=" << x << " (f=" << j.v << ", theta_max=" << profile.theta_max
               << "); enlarge the compact core (larger R)";
            throw DomainError(os.str());
        }
    }
    return c;
}

}  // namespace cuspscale
