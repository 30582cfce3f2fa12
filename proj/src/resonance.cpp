#include "cuspscale/resonance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "cuspscale/parallel.hpp"
#include "json.hpp"

namespace cuspscale {

std::pair<cplx, cplx> zeta_to_s(cplx zeta, double h, int n) {
    if (!(h > 0)) throw ConfigError("h must be positive");
    const double a = n - 1.0;
    const cplx lambda = (zeta + 1.0) / (h * h) + a * a / 4.0;
    const cplx d = std::sqrt(cplx(a * a) - 4.0 * lambda);
    cplx s1 = (a + d) / 2.0, s2 = (a - d) / 2.0;
    if (s1.real() < s2.real() || (s1.real() == s2.real() && s1.imag() < s2.imag())) std::swap(s1, s2);
    return {s1, s2};
}

cplx s_to_zeta(cplx s, double h, int n) {
    const double a = n - 1.0;
    return h * h * (s * (a - s) - a * a / 4.0) - 1.0;
}

namespace {

double last_break(const ContourSpec& c, double fallback) {
    double b = fallback;
    for (double x : c.breakpoints)
        if (std::isfinite(x)) b = std::max(b, x);
    return b;
}

// Symbol of the glued operator at t, given the contour jet there.
struct GlobalRow {
    cplx A, E;
};

GlobalRow global_row(const ModelSurface& m, const ModeSetup& s, double t) {
    Jet F{0, 0, 0};
    if (t > 1) {
        F = eval_contour(s.cusp, t - 1);
    } else if (t < -1) {
        const Jet g = eval_contour(s.funnel, -t - 1);
        F = {-g.v, g.d1, -g.d2};
    }
    const cplx d(1.0, F.d1);
    return {1.0 / (d * d), std::exp(2.0 * cplx(t, F.v)) * s.alpha + m.perturbation(t) - 1.0};
}

double row_min(const GlobalRow& g, int rho_points, double& rho_at) {
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < rho_points; ++k) {
        const double rho = -3.0 + 6.0 * k / (rho_points - 1);
        const double v = std::abs(rho * rho * g.A + g.E);
        if (v < best) {
            best = v;
            rho_at = rho;
        }
    }
    return best;
}

}  // namespace

ModeSetup mode_setup(const ModelSurface& m, double alpha, double h, const ScanPlan& plan, int N) {
    (void)h;
    if (!m.glue) throw ConfigError("resonance scan needs the glued model");
    ModeSetup s;
    s.alpha = alpha;
    s.cusp = build_contour(End::Cusp, plan.R, m.theta, std::exp(2.0) * alpha, m.cusp_profile, plan.contour);
    s.funnel = build_contour(End::Funnel, plan.R, m.theta, std::exp(-2.0) * alpha, m.funnel_profile, plan.contour);
    double rc = last_break(s.cusp, plan.R) + plan.margin;
    if (s.cusp.branch == Branch::IdenticallyZero) {
        const double r_wall = 0.5 * std::log(plan.wall / (std::exp(2.0) * alpha));
        rc = std::max(1.0, std::min(rc, r_wall));
    }
    const double rf = last_break(s.funnel, plan.R) + plan.margin;
    s.grid = {-1.0 - rf, 1.0 + rc, N, plan.scheme};
    return s;
}

ModeOperator assemble(const ModelSurface& m, const ModeSetup& s, double h, const ScanPlan& plan, int mode) {
    if (plan.unscaled) return build_mode_operator(m, nullptr, nullptr, s.alpha, h, s.grid, mode, plan.cap);
    return build_mode_operator(m, &s.cusp, &s.funnel, s.alpha, h, s.grid, mode, plan.cap);
}

namespace {

SymbolFloor floor_on(const ModelSurface& m, const ModeSetup& s, double lo, double hi, double radius, int t_points,
                     int rho_points) {
    SymbolFloor out{std::numeric_limits<double>::infinity(), lo, 0};
    for (int i = 0; i < t_points; ++i) {
        const double t = lo + (hi - lo) * i / (t_points - 1);
        double rho = 0;
        const double v = row_min(global_row(m, s, t), rho_points, rho);
        if (v < out.value) out = {v, t, rho};
    }
    out.value -= radius;
    return out;
}

}  // namespace

SymbolFloor window_symbol_floor(const ModelSurface& m, const ModeSetup& s, double lo, double hi, double radius,
                                int t_points, int rho_points) {
    return floor_on(m, s, lo, hi, radius, t_points, rho_points);
}

TruncationCertificate certify_truncation(const ModelSurface& m, const ModeSetup& s, double radius, double floor) {
    TruncationCertificate c;
    c.floor_lo = window_symbol_floor(m, s, s.grid.lo, s.grid.lo + 2, radius, 200, 241).value;
    c.floor_hi = window_symbol_floor(m, s, s.grid.hi - 2, s.grid.hi, radius, 200, 241).value;
    c.pass = c.floor_lo >= floor && c.floor_hi >= floor;
    std::ostringstream os;
    os << "truncation floor " << c.floor_lo << " at t=" << s.grid.lo << ", " << c.floor_hi << " at t=" << s.grid.hi
       << " (need " << floor << ")";
    c.detail = os.str();
    return c;
}

std::string CutoffReport::to_json() const {
    nlohmann::ordered_json j;
    j["M"] = M;
    j["finite_list"] = finite_list;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : table) arr.push_back({{"mode", r.mode}, {"lambda", r.lambda}, {"alpha", r.alpha}, {"floor", r.floor}});
    j["table"] = arr;
    return j.dump(2);
}

CutoffReport estimate_mode_cutoff(const ModelSurface& m, double h, double C, const ScanPlan& plan) {
    if (!(h > 0 && h < 1)) throw ConfigError("h must lie in (0, 1)");
    if (C < 0) throw ConfigError("window constant must be nonnegative");
    const double radius = window_radius(C, h);
    const std::size_t count = m.cross_section.circle_length > 0 ? std::numeric_limits<std::size_t>::max()
                                                                 : m.cross_section.eigenvalues.size();
    CutoffReport rep;
    std::map<int, CutoffRow> seen;
    auto pass = [&](int mode) {
        auto it = seen.find(mode);
        if (it == seen.end()) {
            const double lambda = m.cross_section.lambda(mode);
            const double alpha = h * h * lambda;
            ModeSetup s = mode_setup(m, alpha, h, plan, 64);
            const SymbolFloor f = floor_on(m, s, s.grid.lo, s.grid.hi, radius, 1500, 241);
            it = seen.emplace(mode, CutoffRow{mode, lambda, alpha, f.value}).first;
        }
        return it->second.floor > plan.cutoff_floor;
    };
    auto exists = [&](long mode) { return static_cast<std::size_t>(mode) < count; };

    long lo = 0, hi = 1;
    for (;;) {
        // lo fails (or is the zero mode), search upward for a passing hi
        while (exists(hi) && !pass(static_cast<int>(hi))) {
            lo = hi;
            hi *= 2;
            if (hi > plan.max_modes) throw NumericError("no mode cutoff below max_modes; enlarge the window grid");
        }
        if (!exists(hi)) {
            hi = static_cast<long>(count);
            // the largest existing mode may still fail; bisect only among existing ones
            if (hi - 1 > lo && pass(static_cast<int>(hi - 1))) hi = hi - 1;
            else {
                rep.M = static_cast<int>(count);
                rep.finite_list = true;
                break;
            }
        }
        while (hi - lo > 1) {
            const long mid = (lo + hi) / 2;
            if (pass(static_cast<int>(mid))) hi = mid;
            else lo = mid;
        }
        // probes above the candidate
        long bad = -1;
        std::vector<long> probes;
        for (long k = 0; k < 8; ++k) probes.push_back(hi + k);
        for (long f : {2, 4, 8}) probes.push_back(hi * f);
        for (long p : probes)
            if (exists(p) && !pass(static_cast<int>(p))) bad = std::max(bad, p);
        if (bad < 0) {
            rep.M = static_cast<int>(hi);
            break;
        }
        lo = bad;
        hi = bad + 1;
    }
    for (const auto& [k, row] : seen) rep.table.push_back(row);
    return rep;
}

std::vector<EigenRow> wide_eigenvalues(const ModelSurface& m, int mode, double h, const ScanPlan& plan, int N) {
    const double alpha = h * h * m.cross_section.lambda(mode);
    const ModeSetup s1 = mode_setup(m, alpha, h, plan, N);
    const ModeSetup s2 = mode_setup(m, alpha, h, plan, 2 * N);
    const auto e1 = mode_eigenvalues(assemble(m, s1, h, plan, mode));
    const auto e2 = mode_eigenvalues(assemble(m, s2, h, plan, mode));
    std::vector<EigenRow> rows;
    for (cplx z : e1) {
        if (std::abs(z.real()) > plan.wide_re || z.imag() < plan.wide_im_lo || z.imag() > plan.wide_im_hi) continue;
        double d = std::numeric_limits<double>::infinity();
        for (cplx w : e2) d = std::min(d, std::abs(w - z));
        const auto [a, b] = zeta_to_s(z, h, m.n);
        EigenRow r{z, a, b, mode, N, h, d <= plan.stable_tol * std::max(1.0, std::abs(z)), false, d};
        rows.push_back(r);
    }
    return rows;
}

ResonanceReport resonance_scan(const ModelSurface& m, double h, double C, const ScanPlan& plan) {
    const auto t0 = std::chrono::steady_clock::now();
    if (C <= 0) throw ConfigError("window constant must be positive");
    ResonanceReport rep;
    rep.h = h;
    rep.C = C;
    rep.radius = window_radius(C, h);
    rep.N = plan.N;
    const CutoffReport cut = estimate_mode_cutoff(m, h, C, plan);
    rep.M = cut.M;

    const int K = plan.boundary_samples;
    std::vector<cplx> zetas(K);
    for (int k = 0; k < K; ++k) zetas[k] = rep.radius * std::exp(cplx(0, 2 * M_PI * k / K));
    std::vector<std::vector<double>> sig(rep.M);
    rep.modes.resize(rep.M);
    std::mutex mu;

    parallel_for(rep.M, plan.jobs, [&](std::size_t i) {
        const int mode = static_cast<int>(i);
        ModeSummary ms;
        ms.mode = mode;
        ms.alpha = h * h * m.cross_section.lambda(mode);
        const ModeSetup s = mode_setup(m, ms.alpha, h, plan, plan.N);
        ms.t_lo = s.grid.lo;
        ms.t_hi = s.grid.hi;
        const TruncationCertificate tc = certify_truncation(m, s, rep.radius, plan.cutoff_floor);
        if (!tc.pass) throw DomainError("mode " + std::to_string(mode) + ": " + tc.detail);
        const ModeOperator op = assemble(m, s, h, plan, mode);
        const DiscCount dc = count_in_disc(op, 0, rep.radius);
        ms.count_N = dc.count;
        ms.reliable = dc.reliable;
        std::vector<cplx> wit;
        if (dc.count != 0 || !dc.reliable) {
            const ModeSetup s2 = mode_setup(m, ms.alpha, h, plan, 2 * plan.N);
            const ModeOperator op2 = assemble(m, s2, h, plan, mode);
            const DiscCount d2 = count_in_disc(op2, 0, rep.radius);
            ms.count_2N = d2.count;
            ms.reliable = ms.reliable && d2.reliable;
            if (d2.count != 0) {
                // locate at N, keep those that reappear at 2N
                for (cplx z : mode_eigenvalues(op)) {
                    if (std::abs(z) >= rep.radius) continue;
                    const double tol = plan.stable_tol * std::max(1.0, std::abs(z));
                    if (count_in_disc(op2, z, tol).count > 0) wit.push_back(z);
                }
                if (wit.empty()) wit.push_back(0.0);  // counted but not located: treat as occupied
            }
        }
        std::vector<double> sv(K, 0.0);
        if (plan.boundary_floor && plan.scheme == Scheme::FD4) {
            const auto fl = resolvent_floor_banded(op, zetas);
            ms.floor = std::numeric_limits<double>::infinity();
            for (int k = 0; k < K; ++k) {
                sv[k] = fl[k].sigma_min;
                ms.floor = std::min(ms.floor, sv[k]);
                ms.floor_converged = ms.floor_converged && fl[k].converged;
            }
        } else if (plan.boundary_floor) {
            const auto fl = resolvent_floor(op, zetas);
            ms.floor = std::numeric_limits<double>::infinity();
            for (int k = 0; k < K; ++k) {
                sv[k] = fl[k].sigma_min;
                ms.floor = std::min(ms.floor, sv[k]);
            }
        }
        std::lock_guard<std::mutex> lk(mu);
        rep.modes[i] = ms;
        sig[i] = std::move(sv);
        for (cplx z : wit) rep.witnesses.push_back(z);
    });

    for (const auto& ms : rep.modes) {
        if (!ms.reliable) ++rep.unreliable_counts;
        rep.floor_converged = rep.floor_converged && ms.floor_converged;
    }
    if (plan.boundary_floor) {
        rep.boundary.resize(K);
        rep.floor = std::numeric_limits<double>::infinity();
        for (int k = 0; k < K; ++k) {
            double v = std::numeric_limits<double>::infinity();
            for (const auto& s : sig) v = std::min(v, s[k]);
            rep.boundary[k] = {zetas[k], v, true};
            rep.floor = std::min(rep.floor, v);
        }
        rep.kappa = rep.floor / (h * std::log(1.0 / h));
    }
    rep.empty = rep.witnesses.empty() && rep.unreliable_counts == 0;

    rep.threshold_distance = std::numeric_limits<double>::infinity();
    for (int mode = 0; mode < std::min(plan.dense_modes, rep.M); ++mode) {
        for (auto r : wide_eigenvalues(m, mode, h, plan, plan.dense_N)) {
            r.in_window = std::abs(r.zeta) < rep.radius;
            if (mode == 0) rep.threshold_distance = std::min(rep.threshold_distance, std::abs(r.zeta + 1.0));
            if (r.stable) rep.max_refine_delta = std::max(rep.max_refine_delta, r.delta);
            rep.rows.push_back(r);
        }
    }
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

namespace {

nlohmann::ordered_json cj(cplx z) { return nlohmann::ordered_json::array({z.real(), z.imag()}); }

}  // namespace

std::string ResonanceReport::to_json() const {
    nlohmann::ordered_json j;
    j["h"] = h;
    j["C"] = C;
    j["window_radius"] = radius;
    j["N"] = N;
    j["M"] = M;
    j["verdict"] = verdict();
    auto w = nlohmann::ordered_json::array();
    for (cplx z : witnesses) w.push_back(cj(z));
    j["witnesses"] = w;
    j["unreliable_counts"] = unreliable_counts;
    j["floor"] = floor;
    j["kappa"] = kappa;
    j["floor_converged"] = floor_converged;
    j["threshold_distance"] = threshold_distance;
    j["max_refine_delta"] = max_refine_delta;
    auto b = nlohmann::ordered_json::array();
    for (const auto& s : boundary) b.push_back({{"zeta", cj(s.zeta)}, {"sigma_min", s.sigma_min}});
    j["boundary"] = b;
    auto ms = nlohmann::ordered_json::array();
    for (const auto& x : modes)
        ms.push_back({{"mode", x.mode}, {"alpha", x.alpha}, {"count_N", x.count_N}, {"count_2N", x.count_2N},
                      {"reliable", x.reliable}, {"floor", x.floor}, {"t_lo", x.t_lo}, {"t_hi", x.t_hi}});
    j["modes"] = ms;
    return j.dump(2);
}

std::string ResonanceReport::to_csv() const {
    std::ostringstream os;
    os.precision(12);
    os << "re_zeta,im_zeta,re_s,im_s,mode,N,h,stable\n";
    for (const auto& r : rows)
        os << r.zeta.real() << ',' << r.zeta.imag() << ',' << r.s1.real() << ',' << r.s1.imag() << ',' << r.mode << ','
           << r.N << ',' << r.h << ',' << (r.stable ? 1 : 0) << '\n';
    return os.str();
}

KappaFit fit_kappa(const std::vector<ResonanceReport>& reports) {
    KappaFit f;
    if (reports.empty()) return f;
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (const auto& r : reports) {
        f.per_h.push_back(r.kappa);
        lo = std::min(lo, r.kappa);
        hi = std::max(hi, r.kappa);
    }
    f.kappa = lo;
    f.spread = lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
    return f;
}

}  // namespace cuspscale
