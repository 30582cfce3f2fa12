#include "cuspscale/model_io.hpp"
#include "ini.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <sstream>

namespace cuspscale {

namespace pt = boost::property_tree;

namespace {

std::vector<double> number_list(const std::string& s) {
    std::vector<double> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError("not a number: '" + tok + "'");
        }
    }
    return out;
}

WarpProfile read_profile(const pt::ptree& sec, const std::string& name) {
    const std::string kind = ini_get<std::string>(sec, "profile", "constant-one");
    const double theta_max = ini_get<double>(sec, "theta_max", kind == "hyperbolic-funnel" ? 0.7853981633974483
                                                                                      : 1.5707963267948966);
    if (!(theta_max > 0 && theta_max <= 1.5707963267948966))
        throw ConfigError(name + ": theta_max must lie in (0, pi/2]");
    if (kind == "constant-one") return WarpProfile::constant_one(theta_max);
    if (kind == "hyperbolic-funnel")
        return WarpProfile::hyperbolic_funnel(ini_get<double>(sec, "R_shift", 2.0), theta_max);
    if (kind == "user-analytic")
        return WarpProfile::user_analytic(number_list(ini_get<std::string>(sec, "coeffs", "")),
                                          ini_get<double>(sec, "shift", 1.0), theta_max);
    throw ConfigError(name + ": unknown profile kind '" + kind + "'");
}

}  // namespace

ModelSurface parse_model(const std::string& text) {
    pt::ptree tree;
    try {
        std::istringstream is(text);
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("model file: ") + e.what());
    }
    try {
        ModelSurface m;
        const auto empty = pt::ptree();
        const auto& mod = tree.get_child("model", empty);
        m.n = ini_get<int>(mod, "n", 2);
        m.theta = ini_get<double>(mod, "theta", m.theta);
        m.glue = ini_get<bool>(mod, "glue", true);

        const auto& cs = tree.get_child("cross_section", empty);
        if (cs.get_child_optional("circle_length")) {
            const double len = ini_get<double>(cs, "circle_length", 1.0);
            m.cross_section = CrossSection::circle(len, ini_get<int>(cs, "modes", 1));
        } else {
            m.cross_section.eigenvalues = number_list(ini_get<std::string>(cs, "eigenvalues", "0"));
            const auto mult = number_list(ini_get<std::string>(cs, "multiplicities", ""));
            for (std::size_t i = 0; i < m.cross_section.eigenvalues.size(); ++i)
                m.cross_section.multiplicity.push_back(i < mult.size() ? static_cast<int>(mult[i]) : 1);
        }

        const auto& cu = tree.get_child("cusp", empty);
        m.cusp_profile = read_profile(cu, "cusp");
        m.cusp_length = ini_get<double>(cu, "length", 1.0);
        const auto& fu = tree.get_child("funnel", empty);
        m.funnel_profile = read_profile(fu, "funnel");
        m.funnel_hyperbolic_length = ini_get<double>(fu, "hyperbolic_length", 1.0);
        m.funnel_offset = ini_get<double>(fu, "offset", 0.0);
        m.core_area = ini_get<double>(tree.get_child("core", empty), "area", 0.0);

        const auto& pe = tree.get_child("perturbation", empty);
        m.perturbation.amplitude = ini_get<double>(pe, "amplitude", 0.0);
        m.perturbation.center = ini_get<double>(pe, "center", 0.0);
        m.perturbation.half_width = ini_get<double>(pe, "half_width", 1.0);

        if (m.glue && (m.cusp_profile.kind != WarpProfile::Kind::ConstantOne ||
                       m.funnel_profile.kind != WarpProfile::Kind::ConstantOne))
            throw ConfigError("glued models require constant-one profiles on both ends");
        return m;
    } catch (const pt::ptree_error& e) {
        throw ConfigError(std::string("model file: ") + e.what());
    }
}

ModelSurface load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

}  // namespace cuspscale
