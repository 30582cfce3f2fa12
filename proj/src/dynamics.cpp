#include "cuspscale/dynamics.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "cuspscale/parallel.hpp"
#include "json.hpp"

namespace cuspscale {

namespace {

struct RealWarp {
    double b, b1;
};

RealWarp real_warp(const WarpProfile& p, double r) {
    const WarpJet j = warp_jet(p, cplx(std::max(r, 1e-9), 0.0));
    return {j.b.real(), j.b1.real()};
}

// Signed end coordinate used for classification; global charts map to whichever end is closer.
double cusp_coord(const PhasePoint& x) {
    switch (x.chart) {
        case Chart::Global: return x.r - 1.0;
        case Chart::Cusp: return x.r;
        case Chart::Funnel: return -INFINITY;
    }
    return -INFINITY;
}

double funnel_coord(const PhasePoint& x) {
    switch (x.chart) {
        case Chart::Global: return -x.r - 1.0;
        case Chart::Funnel: return x.r;
        case Chart::Cusp: return -INFINITY;
    }
    return -INFINITY;
}

std::uint64_t splitmix(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

const char* exit_name(Exit e) {
    switch (e) {
        case Exit::EscapedFunnel: return "escaped-funnel";
        case Exit::EscapedCusp: return "escaped-cusp";
        case Exit::LeftEnd: return "left-end";
        case Exit::StillBounded: return "still-bounded";
    }
    return "?";
}

double hamiltonian(const PhasePoint& x, const ModelSurface& m) {
    switch (x.chart) {
        case Chart::Global:
            return x.rho * x.rho + std::exp(2.0 * x.r) * x.alpha;
        case Chart::Cusp: {
            const double b = real_warp(m.cusp_profile, x.r).b;
            return x.rho * x.rho + b * b * std::exp(2.0 * x.r) * x.alpha;
        }
        case Chart::Funnel: {
            const double b = real_warp(m.funnel_profile, x.r).b;
            return x.rho * x.rho + b * b * std::exp(-2.0 * x.r) * x.alpha;
        }
    }
    return 0;
}

std::pair<double, double> flow_field(const PhasePoint& x, const ModelSurface& m) {
    double dpdr = 0;
    switch (x.chart) {
        case Chart::Global:
            dpdr = 2.0 * x.alpha * std::exp(2.0 * x.r);
            break;
        case Chart::Cusp: {
            const RealWarp w = real_warp(m.cusp_profile, x.r);
            dpdr = 2.0 * x.alpha * std::exp(2.0 * x.r) * w.b * w.b * (1.0 + w.b1 / w.b);
            break;
        }
        case Chart::Funnel: {
            const RealWarp w = real_warp(m.funnel_profile, x.r);
            dpdr = -2.0 * x.alpha * std::exp(-2.0 * x.r) * w.b * w.b * (1.0 - w.b1 / w.b);
            break;
        }
    }
    return {2.0 * x.rho, -dpdr};
}

std::string Trajectory::to_csv() const {
    std::ostringstream os;
    os.precision(12);
    os << "t,r,rho,p,end\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& x = points[i];
        const char* tag = "core";
        if (x.chart == Chart::Cusp || (x.chart == Chart::Global && x.r > 1)) tag = "cusp";
        if (x.chart == Chart::Funnel || (x.chart == Chart::Global && x.r < -1)) tag = "funnel";
        os << time[i] << ',' << x.r << ',' << x.rho << ',' << energy[i] << ',' << tag << '\n';
    }
    return os.str();
}

Trajectory integrate(const PhasePoint& x0, const ModelSurface& m, double T, double dt,
                     const FlowOptions& opt) {
    if (!(dt > 0) || !(T > 0)) throw ConfigError("integrate needs dt > 0 and T > 0");
    Trajectory tr;
    const double p0 = hamiltonian(x0, m);
    tr.separatrix = x0.alpha == 0.0;
    PhasePoint x = x0;
    double t = 0;
    auto record = [&](double tt, const PhasePoint& y) {
        tr.time.push_back(tt);
        tr.points.push_back(y);
        tr.energy.push_back(hamiltonian(y, m));
    };
    record(0, x);

    bool in_cusp = cusp_coord(x) > 0;
    if (in_cusp) tr.cusp_visits = 1;
    const long steps = static_cast<long>(std::ceil(T / dt - 1e-9));
    for (long k = 1; k <= steps; ++k) {
        const double h = std::min(dt, T - t);
        auto shifted = [&](double dr, double drho) {
            PhasePoint y = x;
            y.r += dr;
            y.rho += drho;
            return y;
        };
        const auto k1 = flow_field(x, m);
        const auto k2 = flow_field(shifted(0.5 * h * k1.first, 0.5 * h * k1.second), m);
        const auto k3 = flow_field(shifted(0.5 * h * k2.first, 0.5 * h * k2.second), m);
        const auto k4 = flow_field(shifted(h * k3.first, h * k3.second), m);
        PhasePoint y = x;
        y.r += h / 6.0 * (k1.first + 2 * k2.first + 2 * k3.first + k4.first);
        y.rho += h / 6.0 * (k1.second + 2 * k2.second + 2 * k3.second + k4.second);
        t += h;

        if (cusp_coord(x) >= 0 && cusp_coord(y) >= 0)
            tr.cusp_rho_increase = std::max(tr.cusp_rho_increase, y.rho - x.rho);
        x = y;

        const double drift = std::abs(hamiltonian(x, m) - p0);
        tr.energy_drift = std::max(tr.energy_drift, drift);
        if (drift > opt.drift_tol * std::max(1.0, t)) {
            tr.flagged = true;
            record(t, x);
            return tr;
        }

        const double rc = cusp_coord(x), rf = funnel_coord(x);
        if (!in_cusp && rc >= 0) {
            in_cusp = true;
            ++tr.cusp_visits;
        } else if (in_cusp && rc < -opt.hysteresis) {
            in_cusp = false;
        }
        if (opt.record_every > 0 && k % opt.record_every == 0) record(t, x);

        if (rc >= opt.escape_cusp) tr.exit = Exit::EscapedCusp;
        else if (rf >= opt.escape_funnel) tr.exit = Exit::EscapedFunnel;
        else if (x.chart != Chart::Global && x.r < 0) tr.exit = Exit::LeftEnd;
        if (tr.exit != Exit::StillBounded) break;
    }
    if (tr.time.back() != t) record(t, x);
    return tr;
}

ClosedForm closed_form_rho(End end, double t, double p, double rho0, const WarpProfile& prof,
                           double r0, double dt) {
    if (t == 0) return {rho0, std::abs(rho0) >= std::sqrt(p)};
    const double sp = std::sqrt(p);
    if (std::abs(rho0) >= sp) return {rho0, true};
    double integral = 0;
    if (prof.kind != WarpProfile::Kind::ConstantOne && t != 0) {
        ModelSurface m;
        m.cusp_profile = m.funnel_profile = prof;
        const double b0 = real_warp(prof, r0).b;
        const double alpha = (p - rho0 * rho0) / (b0 * b0 * std::exp(end == End::Cusp ? 2.0 * r0 : -2.0 * r0));
        PhasePoint x{r0, rho0, alpha, end == End::Cusp ? Chart::Cusp : Chart::Funnel};
        FlowOptions opt;
        opt.escape_cusp = opt.escape_funnel = INFINITY;
        opt.drift_tol = INFINITY;
        const Trajectory tr = integrate(x, m, t, dt, opt);
        for (std::size_t i = 0; i + 1 < tr.points.size(); ++i) {
            const RealWarp a = real_warp(prof, tr.points[i].r), b = real_warp(prof, tr.points[i + 1].r);
            integral += 0.5 * (tr.time[i + 1] - tr.time[i]) * (a.b1 / a.b + b.b1 / b.b);
        }
    }
    const double phase = std::atanh(rho0 / sp);
    if (end == End::Funnel) return {sp * std::tanh(2.0 * sp * (t - integral) + phase), false};
    return {sp * std::tanh(-2.0 * sp * (t + integral) + phase), false};
}

std::string DynamicsReport::to_json() const {
    nlohmann::ordered_json j;
    j["count"] = count;
    j["escaped"] = escaped;
    j["escaped_funnel"] = escaped_funnel;
    j["escaped_cusp"] = escaped_cusp;
    j["max_cusp_visits"] = max_cusp_visits;
    j["max_energy_drift"] = max_drift;
    j["horizon"] = T;
    j["seed"] = seed;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& x : bounded) arr.push_back({{"t", x.r}, {"rho", x.rho}, {"alpha", x.alpha}});
    j["still_bounded"] = arr;
    return j.dump(2);
}

DynamicsReport classify_batch(const ModelSurface& m, int N, double T, std::uint64_t seed, double dt,
                              int jobs, const FlowOptions& opt) {
    if (!m.glue) throw ConfigError("classify_batch needs a glued global model");
    DynamicsReport rep;
    rep.count = N;
    rep.T = T;
    rep.seed = seed;
    std::uint64_t state = seed;
    auto uniform = [&] { return (splitmix(state) >> 11) * 0x1.0p-53; };
    for (int i = 0; i < N; ++i) {
        const double t0 = -1.0 + 2.0 * uniform();
        const double alpha = uniform() * std::exp(-2.0 * t0);
        const double rho = std::sqrt(std::max(0.0, 1.0 - std::exp(2.0 * t0) * alpha));
        rep.initial.push_back({t0, uniform() < 0.5 ? rho : -rho, alpha, Chart::Global});
    }
    std::vector<Trajectory> out(N);
    FlowOptions o = opt;
    o.record_every = 0;
    parallel_for(N, jobs, [&](std::size_t i) { out[i] = integrate(rep.initial[i], m, T, dt, o); });
    for (int i = 0; i < N; ++i) {
        const auto& tr = out[i];
        rep.max_drift = std::max(rep.max_drift, tr.energy_drift);
        rep.max_cusp_visits = std::max(rep.max_cusp_visits, tr.cusp_visits);
        if (tr.exit == Exit::EscapedFunnel) ++rep.escaped_funnel;
        if (tr.exit == Exit::EscapedCusp) ++rep.escaped_cusp;
        if (tr.exit == Exit::EscapedFunnel || tr.exit == Exit::EscapedCusp) ++rep.escaped;
        else rep.bounded.push_back(rep.initial[i]);
    }
    return rep;
}

}  // namespace cuspscale
