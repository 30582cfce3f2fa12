#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cuspscale/contour.hpp"
#include "json.hpp"

namespace cuspscale {

namespace {

cplx beta_at(const WarpProfile& p, cplx z) {
    if (std::abs(z) < 1e-12) z = cplx(1e-12, 0);
    return warp_jet(p, z).b;
}

}  // namespace

namespace {

// Everything in q that does not depend on rho.
struct SymbolRow {
    cplx A, E;          // q = rho^2 A + E - 1
    double c4, f1;      // split kinetic factors
    double Ere, Eim;    // split exponential part
};

SymbolRow symbol_row(End end, const Jet& f, const WarpProfile& profile, double r, double alpha) {
    const cplx z(r, f.v);
    const cplx d(1.0, f.d1);
    const cplx b = beta_at(profile, z);
    const double s = end == End::Cusp ? 2.0 : -2.0;
    SymbolRow row;
    row.A = 1.0 / (d * d);
    row.E = std::exp(s * z) * alpha * b;
    row.f1 = f.d1;
    row.c4 = 1.0 / ((1.0 + f.d1 * f.d1) * (1.0 + f.d1 * f.d1));
    const double er = std::exp(s * r) * alpha;
    const double c2 = std::cos(2.0 * f.v), s2 = std::sin(2.0 * f.v);
    if (end == End::Cusp) {
        row.Ere = er * (c2 * b.real() - s2 * b.imag());
        row.Eim = er * (c2 * b.imag() + s2 * b.real());
    } else {
        row.Ere = er * (c2 * b.real() + s2 * b.imag());
        row.Eim = er * (c2 * b.imag() - s2 * b.real());
    }
    return row;
}

SymbolSample sample_row(const SymbolRow& row, double r, double rho, double alpha) {
    const double r2 = rho * rho;
    return {r, rho, alpha, r2 * row.A + row.E - 1.0,
            (1.0 - row.f1 * row.f1) * r2 * row.c4 + row.Ere - 1.0, -2.0 * row.f1 * r2 * row.c4 + row.Eim};
}

}  // namespace

SymbolSample symbol_sample(End end, const Jet& f, const WarpProfile& profile, double r, double rho, double alpha) {
    return sample_row(symbol_row(end, f, profile, r, alpha), r, rho, alpha);
}

cplx scaled_symbol(End end, const ContourSpec& c, const WarpProfile& profile, double r, double rho, double alpha) {
    if (r < 0) throw DomainError("symbol needs r >= 0");
    return symbol_sample(end, eval_contour(c, r), profile, r, rho, alpha).q;
}

bool BoundReport::all_pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const BoundEntry& e) { return !e.applicable || e.pass; });
}

const BoundEntry* BoundReport::find(const std::string& id) const {
    for (const auto& e : entries)
        if (e.id == id) return &e;
    return nullptr;
}

std::string BoundReport::to_json() const {
    nlohmann::ordered_json j;
    j["end"] = end_name(end);
    j["branch"] = branch_name(branch);
    j["R"] = R;
    j["theta"] = theta;
    j["alpha"] = alpha;
    j["split_error"] = split_error;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& e : entries) {
        nlohmann::ordered_json x;
        x["id"] = e.id;
        x["applicable"] = e.applicable;
        x["pass"] = e.pass;
        x["empirical"] = std::isfinite(e.empirical) ? nlohmann::ordered_json(e.empirical) : nlohmann::ordered_json("inf");
        x["target"] = e.target;
        x["active_r"] = {e.active_r_min, e.active_r_max};
        x["witness"] = {{"r", e.witness_r}, {"rho", e.witness_rho}};
        if (!e.note.empty()) x["note"] = e.note;
        arr.push_back(x);
    }
    j["inequalities"] = arr;
    auto mod = nlohmann::ordered_json::array();
    for (const auto& m : modulus)
        mod.push_back({{"eps", m.eps}, {"delta", std::isfinite(m.delta) ? nlohmann::ordered_json(m.delta)
                                                                          : nlohmann::ordered_json("inf")}});
    j["modulus"] = mod;
    return j.dump(2);
}

BoundReport verify_symbol_bounds(End end, const ContourSpec& c, const WarpProfile& profile, const SymbolGrid& grid) {
    const double inf = std::numeric_limits<double>::infinity();
    const double delta = grid.delta_target > 0 ? grid.delta_target : default_delta_target(c.theta);
    BoundReport rep{end, c.branch, c.R, c.theta, c.alpha, {}, {}, 0};

    const bool reuse = grid.r_max < 0 && static_cast<int>(c.r.size()) == grid.r_points;
    const double r_max = grid.r_max > 0 ? grid.r_max : (c.r.empty() ? c.R + 20 : c.r.back());
    const double r_ellip = c.R + c.R_j();
    const bool has_region3 = end == End::Cusp && c.branch == Branch::SmallAlpha && c.alpha > 0;

    BoundEntry ellip{"scaling_ellip", true, true, inf, delta, inf, -inf, 0, 0, ""};
    BoundEntry notbad{"not_bad", true, true, inf, delta, inf, -inf, 0, 0, ""};
    BoundEntry expo{"exp_ellip", has_region3, true, inf, 1.0, inf, -inf, 0, 0, ""};
    if (!has_region3) expo.note = "no region III on this branch";
    const std::vector<double> eps_list{0.5, 0.2, 0.1, 0.05, 0.02, 0.01};
    std::vector<double> mod(eps_list.size(), inf);

    for (int i = 0; i < grid.r_points; ++i) {
        const double r = reuse ? c.r[i] : r_max * i / (grid.r_points - 1);
        const Jet f = reuse ? Jet{c.f[i], c.f1[i], c.f2[i]} : eval_contour(c, r);
        const double fsum = std::abs(f.v) + std::abs(f.d1) + std::abs(f.d2);
        const SymbolRow row = symbol_row(end, f, profile, r, c.alpha);
        for (int j = 0; j < grid.rho_points; ++j) {
            const double rho = -grid.rho_max + 2.0 * grid.rho_max * j / (grid.rho_points - 1);
            const SymbolSample s = sample_row(row, r, rho, c.alpha);
            const double re = s.q.real(), im = s.q.imag();
            rep.split_error = std::max(rep.split_error, std::abs(s.q - cplx(s.re_split, s.im_split)) /
                                                            std::max(1.0, std::abs(s.q)));

            if (r >= r_ellip) {
                const double m = std::max(std::abs(re), -im);
                if (m < ellip.empirical) {
                    ellip.empirical = m;
                    ellip.witness_r = r;
                    ellip.witness_rho = rho;
                }
                if (std::abs(re) <= delta) {
                    ellip.active_r_min = std::min(ellip.active_r_min, r);
                    ellip.active_r_max = std::max(ellip.active_r_max, r);
                }
            }
            if (std::abs(re) <= delta) {
                notbad.active_r_min = std::min(notbad.active_r_min, r);
                notbad.active_r_max = std::max(notbad.active_r_max, r);
            }
            if (im > 1e-12 && std::abs(re) < notbad.empirical) {
                notbad.empirical = std::abs(re);
                notbad.witness_r = r;
                notbad.witness_rho = rho;
            }
            if (has_region3 && r >= c.R_alpha) {
                const double ratio = -im / (2.0 / 3.0 * c.alpha * std::exp(2.0 * r));
                if (ratio < expo.empirical) {
                    expo.empirical = ratio;
                    expo.witness_r = r;
                    expo.witness_rho = rho;
                }
            }
            const double aq = std::abs(s.q);
            for (std::size_t k = 0; k < eps_list.size(); ++k)
                if (fsum > eps_list[k]) mod[k] = std::min(mod[k], aq);
        }
    }
    ellip.pass = ellip.empirical >= delta;
    notbad.pass = notbad.empirical >= delta;
    if (has_region3) expo.pass = expo.empirical >= 1.0 - 1e-9;

    BoundEntry modulus{"modulus", true, true, inf, 0, 0, 0, 0, 0, ""};
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        rep.modulus.push_back({eps_list[k], mod[k]});
        modulus.empirical = std::min(modulus.empirical, mod[k]);
    }
    modulus.pass = modulus.empirical > 1e-10;

    BoundEntry split{"split_consistency", true, rep.split_error <= 1e-10, rep.split_error, 1e-10, 0, 0, 0, 0, ""};
    if (c.upper_bound_excess > 0) {
        std::ostringstream os;
        os << "level anchor sits beyond the upper window by " << c.upper_bound_excess;
        expo.note = os.str();
    }
    rep.entries = {ellip, notbad, expo, modulus, split};
    return rep;
}

}  // namespace cuspscale

namespace cuspscale {

std::vector<double> branch_alpha_sweep(End end, Branch b, double R, double theta, int n) {
    if (n <= 0) return {0.0};
    double lo, hi;
    if (end == End::Cusp) {
        const double at = cusp_alpha_threshold(R, theta);
        if (b == Branch::SmallAlpha) {
            lo = at * 1e-6;
            hi = at;
        } else if (b == Branch::IdenticallyZero) {
            lo = at * (1 + 1e-9);
            hi = 1e6;
        } else {
            throw ConfigError("cusp contours have no such branch");
        }
    } else {
        const double af = funnel_alpha_threshold(R);
        if (b == Branch::Standard) {
            lo = 1e-6;
            hi = af;
        } else if (b == Branch::LargeAlpha) {
            lo = af * (1 + 1e-9);
            hi = af * 1e6;
        } else {
            throw ConfigError("funnel contours have no such branch");
        }
    }
    std::vector<double> a(n);
    for (int i = 0; i < n; ++i) a[i] = n == 1 ? hi : lo * std::pow(hi / lo, i / (n - 1.0));
    return a;
}

}  // namespace cuspscale
