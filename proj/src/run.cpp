#include "cuspscale/run.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cuspscale/dynamics.hpp"
#include "cuspscale/escape.hpp"
#include "cuspscale/model_io.hpp"
#include "cuspscale/report.hpp"
#include "ini.hpp"
#include "json.hpp"

namespace cuspscale {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"validate-geometry", "trace-geodesics",    "build-contour",
                                                "verify-symbols",    "verify-escape",      "compute-resonances",
                                                "scan-resolvent",    "zero-volume"};
    return names;
}

namespace {

std::vector<double> numbers(const std::string& s, const std::string& key) {
    std::vector<double> out;
    std::string t = s;
    for (char& c : t)
        if (c == ',') c = ' ';
    std::istringstream is(t);
    std::string tok;
    while (is >> tok) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError(key + ": not a number: '" + tok + "'");
        }
    }
    return out;
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& base_dir) {
    pt::ptree tree;
    try {
        std::istringstream is(text);
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    RunConfig c;
    c.source = text;
    try {
        const pt::ptree empty;
        const auto& run = tree.get_child("run", empty);
        const std::string model = ini_get<std::string>(run, "model", "");
        if (!model.empty()) c.model_path = fs::path(model).is_absolute() ? model : (fs::path(base_dir) / model).string();
        c.command = ini_get<std::string>(run, "command", "");
        c.out = ini_get<std::string>(run, "out", c.out);
        c.seed = ini_get<std::uint64_t>(run, "seed", c.seed);
        c.jobs = ini_get<int>(run, "jobs", c.jobs);

        const auto& win = tree.get_child("window", empty);
        c.C = ini_get<double>(win, "C", c.C);
        if (auto h = win.get_optional<std::string>("h")) c.h = numbers(*h, "window.h");

        const auto& g = tree.get_child("grid", empty);
        c.scan.N = ini_get<int>(g, "N", c.scan.N);
        const std::string scheme = ini_get<std::string>(g, "scheme", "fd4");
        if (scheme == "fd4") c.scan.scheme = Scheme::FD4;
        else if (scheme == "chebyshev") c.scan.scheme = Scheme::Chebyshev;
        else throw ConfigError("grid.scheme must be fd4 or chebyshev");
        c.scan.dense_N = ini_get<int>(g, "dense_N", c.scan.dense_N);
        c.scan.dense_modes = ini_get<int>(g, "dense_modes", c.scan.dense_modes);
        c.scan.boundary_samples = ini_get<int>(g, "boundary_samples", c.scan.boundary_samples);
        c.scan.margin = ini_get<double>(g, "margin", c.scan.margin);

        const auto& ct = tree.get_child("contour", empty);
        c.scan.R = ini_get<double>(ct, "R", c.scan.R);
        c.scan.contour.mollifier_width = ini_get<double>(ct, "mollifier_width", c.scan.contour.mollifier_width);
        const std::string end = ini_get<std::string>(ct, "end", "cusp");
        if (end == "cusp") c.end = End::Cusp;
        else if (end == "funnel") c.end = End::Funnel;
        else throw ConfigError("contour.end must be cusp or funnel");
        c.alpha = ini_get<double>(ct, "alpha", c.alpha);

        const auto& sy = tree.get_child("symbols", empty);
        if (auto r = sy.get_optional<std::string>("R")) c.symbol_R = numbers(*r, "symbols.R");
        c.symbol_alpha_points = ini_get<int>(sy, "alpha_points", c.symbol_alpha_points);

        const auto& dy = tree.get_child("dynamics", empty);
        c.count = ini_get<int>(dy, "count", c.count);
        c.T = ini_get<double>(dy, "T", c.T);
        c.dt = ini_get<double>(dy, "dt", c.dt);

        const auto& es = tree.get_child("escape", empty);
        c.delta_p = ini_get<double>(es, "delta_p", c.delta_p);
        c.delta_f = ini_get<double>(es, "delta_f", c.delta_f);
        c.delta0_ratio = ini_get<double>(es, "delta0_ratio", c.delta0_ratio);

        c.resolvent_modes = ini_get<int>(tree.get_child("resolvent", empty), "modes", c.resolvent_modes);
    } catch (const pt::ptree_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    for (double h : c.h)
        if (!(h > 0 && h < 1)) throw ConfigError("every h must lie in (0, 1)");
    if (!(c.C > 0)) throw ConfigError("window constant C must be positive");
    if (c.scan.N < 64) throw ConfigError("grid.N must be at least 64");
    if (c.jobs < 1) throw ConfigError("jobs must be at least 1");
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), fs::path(path).parent_path().string());
}

namespace {

struct Ctx {
    const RunConfig& cfg;
    ModelSurface model;
    Provenance prov;
    fs::path out;
    std::vector<std::string> written;
    void json(const std::string& name, const std::string& j) {
        write_file((out / name).string(), stamp_json(j, prov));
        written.push_back(name);
    }
    void csv(const std::string& name, const std::string& t) {
        write_file((out / name).string(), stamp_csv(t, prov));
        written.push_back(name);
    }
    void svg(const std::string& name, const std::string& t) {
        write_file((out / name).string(), stamp_svg(t, prov));
        written.push_back(name);
    }
    void raw(const std::string& name, const std::string& t) {
        write_file((out / name).string(), t);
        written.push_back(name);
    }
};

std::string hname(double h) {
    std::ostringstream os;
    os << h;
    return os.str();
}

void cmd_validate(Ctx& c) {
    const ValidationReport r = validate_surface(c.model, SamplingPlan{});
    ojson head;
    head["provenance"] = {{"config_hash", c.prov.config_hash}, {"version", c.prov.version}, {"command", c.prov.command}, {"seed", c.prov.seed}};
    c.raw("validation.jsonl", head.dump() + "\n" + r.to_jsonl());
    ojson s;
    s["all_pass"] = r.all_pass();
    auto failing = ojson::array();
    for (const auto& e : r.entries)
        if (!e.pass) failing.push_back({{"id", e.id}, {"witness", e.witness}, {"margin", e.margin}});
    s["failing"] = failing;
    c.json("validation_summary.json", s.dump());
}

void cmd_trace(Ctx& c) {
    const DynamicsReport r = classify_batch(c.model, c.cfg.count, c.cfg.T, c.cfg.seed, c.cfg.dt, c.cfg.jobs);
    c.json("dynamics.json", r.to_json());
    const int keep = std::min<int>(3, static_cast<int>(r.initial.size()));
    for (int i = 0; i < keep; ++i) {
        FlowOptions opt;
        opt.record_every = 20;
        const Trajectory t = integrate(r.initial[i], c.model, c.cfg.T, c.cfg.dt, opt);
        c.csv("trajectory_" + std::to_string(i) + ".csv", t.to_csv());
    }
}

void cmd_contour(Ctx& c) {
    const WarpProfile& prof = c.cfg.end == End::Cusp ? c.model.cusp_profile : c.model.funnel_profile;
    const ContourSpec s = build_contour(c.cfg.end, c.cfg.scan.R, c.model.theta, c.cfg.alpha, prof, c.cfg.scan.contour);
    c.csv("contour.csv", s.to_csv());
    ojson j;
    j["end"] = end_name(s.end);
    j["R"] = s.R;
    j["theta"] = s.theta;
    j["alpha"] = s.alpha;
    j["branch"] = branch_name(s.branch);
    j["breakpoints"] = s.breakpoints;
    std::vector<std::string> regions;
    for (const auto& p : s.pieces)
        if (p.region != "zero" && (regions.empty() || regions.back() != p.region)) regions.push_back(p.region);
    j["regions"] = regions;
    j["C2"] = s.C2;
    j["k"] = s.k;
    j["polyline"] = s.to_polyline();
    c.json("contour.json", j.dump());
    c.svg("contour.svg", contour_svg({&s}));
}

void cmd_symbols(Ctx& c) {
    ojson all = ojson::array();
    bool pass = true;
    for (double R : c.cfg.symbol_R) {
        const std::vector<std::pair<End, Branch>> sweeps{{End::Cusp, Branch::SmallAlpha},
                                                         {End::Cusp, Branch::IdenticallyZero},
                                                         {End::Funnel, Branch::Standard},
                                                         {End::Funnel, Branch::LargeAlpha}};
        std::vector<double> cusp0{0.0};
        for (auto [end, br] : sweeps) {
            auto alphas = branch_alpha_sweep(end, br, R, c.model.theta, c.cfg.symbol_alpha_points);
            if (end == End::Cusp && br == Branch::SmallAlpha) alphas.insert(alphas.begin(), 0.0);
            const WarpProfile& prof = end == End::Cusp ? c.model.cusp_profile : c.model.funnel_profile;
            for (double a : alphas) {
                const ContourSpec s = build_contour(end, R, c.model.theta, a, prof, c.cfg.scan.contour);
                const BoundReport b = verify_symbol_bounds(end, s, prof);
                pass = pass && b.all_pass();
                all.push_back(ojson::parse(b.to_json()));
            }
        }
    }
    ojson j;
    j["all_pass"] = pass;
    j["reports"] = all;
    c.json("symbols.json", j.dump());
}

void cmd_escape(Ctx& c) {
    EscapeParams prm;
    prm.delta_p = c.cfg.delta_p;
    prm.R = c.cfg.scan.R;
    const EscapeSet s = build_escape(c.model, prm);
    const EscapeReport r = verify_escape(s, c.model, c.cfg.delta0_ratio * s.C_F, c.cfg.delta_p, c.cfg.delta_f, {},
                                         c.cfg.scan.contour);
    c.json("escape.json", r.to_json());
    c.csv("escape_field.csv", escape_csv(s, c.model));
}

void cmd_resonances(Ctx& c) {
    std::vector<ResonanceReport> reps;
    ScanPlan plan = c.cfg.scan;
    plan.jobs = c.cfg.jobs;
    ojson summary;
    auto per = ojson::array();
    for (double h : c.cfg.h) {
        reps.push_back(resonance_scan(c.model, h, c.cfg.C, plan));
        const auto& r = reps.back();
        c.json("resonances_h" + hname(h) + ".json", r.to_json());
        c.csv("resonances_h" + hname(h) + ".csv", r.to_csv());
        per.push_back({{"h", h}, {"M", r.M}, {"verdict", r.verdict()}, {"floor", r.floor}, {"kappa", r.kappa}});
    }
    const KappaFit k = fit_kappa(reps);
    summary["C"] = c.cfg.C;
    summary["N"] = plan.N;
    summary["per_h"] = per;
    summary["kappa"] = k.kappa;
    summary["kappa_spread"] = k.spread;
    bool empty = true;
    for (const auto& r : reps) empty = empty && r.empty;
    summary["verdict"] = empty ? "empty" : "occupied";
    c.json("resonances_summary.json", summary.dump());
    c.svg("resonance_map.svg", resonance_map_svg(reps));
}

void cmd_resolvent(Ctx& c) {
    std::ostringstream os;
    os.precision(12);
    os << "h,mode,re_zeta,im_zeta,sigma_min,converged\n";
    for (double h : c.cfg.h) {
        const double rad = window_radius(c.cfg.C, h);
        std::vector<cplx> z(c.cfg.scan.boundary_samples);
        for (std::size_t k = 0; k < z.size(); ++k) z[k] = rad * std::exp(cplx(0, 2 * M_PI * k / z.size()));
        for (int mode = 0; mode < c.cfg.resolvent_modes; ++mode) {
            const double alpha = h * h * c.model.cross_section.lambda(mode);
            const ModeSetup s = mode_setup(c.model, alpha, h, c.cfg.scan, c.cfg.scan.N);
            const ModeOperator op = assemble(c.model, s, h, c.cfg.scan, mode);
            const auto fl = c.cfg.scan.scheme == Scheme::FD4 ? resolvent_floor_banded(op, z) : resolvent_floor(op, z);
            for (const auto& f : fl)
                os << h << ',' << mode << ',' << f.zeta.real() << ',' << f.zeta.imag() << ',' << f.sigma_min << ','
                   << (f.converged ? 1 : 0) << '\n';
        }
    }
    c.csv("resolvent_floor.csv", os.str());
}

void cmd_volume(Ctx& c) {
    const ZeroVolume v = zero_volume(c.model);
    ojson j;
    j["core"] = v.core;
    j["cusp"] = v.cusp;
    j["funnel_missing"] = v.funnel_missing;
    j["total"] = v.total;
    c.json("zero_volume.json", j.dump());
}

}  // namespace

int run(const RunConfig& cfg, std::string* message) {
    auto say = [&](const std::string& s) {
        if (message) *message = s;
    };
    try {
        const auto& names = command_names();
        if (std::find(names.begin(), names.end(), cfg.command) == names.end())
            throw ConfigError("unknown command '" + cfg.command + "'");
        if (cfg.model_path.empty()) throw ConfigError("no model file given");
        if (!fs::exists(cfg.model_path)) throw ConfigError("model file '" + cfg.model_path + "' does not exist");
        Ctx c{cfg, load_model(cfg.model_path), {}, fs::path(cfg.out), {}};
        const std::string err = c.model.hypothesis_errors();
        if (!err.empty() && cfg.command != "validate-geometry") throw ConfigError("model: " + err);
        std::ifstream mf(cfg.model_path);
        std::stringstream ms;
        ms << mf.rdbuf();
        c.prov = {config_hash(cfg.source + "\n" + ms.str()), tool_version(), cfg.command, cfg.seed};
        fs::create_directories(c.out);
        if (cfg.command == "validate-geometry") cmd_validate(c);
        else if (cfg.command == "trace-geodesics") cmd_trace(c);
        else if (cfg.command == "build-contour") cmd_contour(c);
        else if (cfg.command == "verify-symbols") cmd_symbols(c);
        else if (cfg.command == "verify-escape") cmd_escape(c);
        else if (cfg.command == "compute-resonances") cmd_resonances(c);
        else if (cfg.command == "scan-resolvent") cmd_resolvent(c);
        else cmd_volume(c);
        std::string list;
        for (const auto& w : c.written) list += " " + w;
        say(cfg.command + ": wrote" + list);
        return 0;
    } catch (const ConfigError& e) {
        say(std::string("config error: ") + e.what());
        return 2;
    } catch (const fs::filesystem_error& e) {
        say(std::string("config error: ") + e.what());
        return 2;
    } catch (const std::exception& e) {
        say(std::string("computation error: ") + e.what());
        return 3;
    }
}

}  // namespace cuspscale
