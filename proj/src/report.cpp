#include "cuspscale/report.hpp"

#include <boost/crc.hpp>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cuspscale {

std::string tool_version() { return CUSPSCALE_VERSION; }

std::string config_hash(const std::string& text) {
    boost::crc_32_type crc;
    crc.process_bytes(text.data(), text.size());
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08x", crc.checksum());
    return buf;
}

std::string stamp_json(const std::string& json, const Provenance& p) {
    auto doc = nlohmann::ordered_json::parse(json);
    nlohmann::ordered_json out;
    out["provenance"] = {{"config_hash", p.config_hash}, {"version", p.version}, {"command", p.command},
                         {"seed", p.seed}};
    if (doc.is_object()) {
        for (auto it = doc.begin(); it != doc.end(); ++it) out[it.key()] = it.value();
    } else {
        out["data"] = doc;
    }
    return out.dump(2) + "\n";
}

std::string stamp_csv(const std::string& csv, const Provenance& p) {
    std::ostringstream os;
    os << "# config_hash: " << p.config_hash << "\n# version: " << p.version << "\n# command: " << p.command
       << "\n";
    return os.str() + csv;
}

std::string stamp_svg(const std::string& svg, const Provenance& p) {
    const auto open = svg.find("<svg");
    const auto close = open == std::string::npos ? open : svg.find('>', open);
    if (close == std::string::npos) throw NumericError("stamp_svg: no <svg> element");
    std::ostringstream os;
    os << "\n<!-- config_hash: " << p.config_hash << " version: " << p.version << " command: " << p.command
       << " -->";
    return svg.substr(0, close + 1) + os.str() + svg.substr(close + 1);
}

namespace {

struct Frame {
    double x0, x1, y0, y1;
    double W = 640, H = 400;
    double X(double x) const { return 40 + (W - 60) * (x - x0) / (x1 - x0); }
    double Y(double y) const { return H - 30 - (H - 50) * (y - y0) / (y1 - y0); }
};

std::string header(const Frame& f) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.W << "\" height=\"" << f.H << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    return os.str();
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

}  // namespace

std::string contour_svg(const std::vector<const ContourSpec*>& contours) {
    Frame f{0, 1, 0, 1};
    for (const ContourSpec* c : contours) {
        if (c->r.empty()) continue;
        f.x1 = std::max(f.x1, c->r.back());
        for (double v : c->f) f.y1 = std::max(f.y1, v);
    }
    std::ostringstream os;
    os.precision(6);
    os << header(f);
    int k = 0;
    for (const ContourSpec* c : contours) {
        os << "<polyline fill=\"none\" stroke=\"" << kColors[k++ % 5] << "\" points=\"";
        const std::size_t stride = std::max<std::size_t>(1, c->r.size() / 800);
        for (std::size_t i = 0; i < c->r.size(); i += stride) os << f.X(c->r[i]) << ',' << f.Y(c->f[i]) << ' ';
        os << "\"><title>" << end_name(c->end) << " alpha=" << c->alpha << " " << branch_name(c->branch)
           << "</title></polyline>\n";
        for (double b : c->breakpoints)
            if (b <= f.x1)
                os << "<line x1=\"" << f.X(b) << "\" y1=\"" << f.Y(f.y0) << "\" x2=\"" << f.X(b) << "\" y2=\""
                   << f.Y(f.y1) << "\" stroke=\"#bbb\" stroke-dasharray=\"3,3\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string resonance_map_svg(const std::vector<ResonanceReport>& reports) {
    Frame f{-1.5, 0.5, -1.0, 0.25};
    std::ostringstream os;
    os.precision(6);
    os << header(f);
    int k = 0;
    for (const auto& r : reports) {
        const char* col = kColors[k++ % 5];
        // shaded logarithmic strip
        const double depth = r.radius;
        os << "<rect x=\"" << f.X(f.x0) << "\" y=\"" << f.Y(0) << "\" width=\"" << f.X(f.x1) - f.X(f.x0)
           << "\" height=\"" << f.Y(-depth) - f.Y(0) << "\" fill=\"" << col << "\" fill-opacity=\"0.12\"/>\n";
        os << "<polyline fill=\"none\" stroke=\"" << col << "\" points=\"";
        for (int i = 0; i <= 128; ++i) {
            const double a = 2 * M_PI * i / 128;
            os << f.X(r.radius * std::cos(a)) << ',' << f.Y(r.radius * std::sin(a)) << ' ';
        }
        os << "\"><title>h=" << r.h << " window</title></polyline>\n";
        for (const auto& e : r.rows) {
            if (e.zeta.real() < f.x0 || e.zeta.real() > f.x1 || e.zeta.imag() < f.y0 || e.zeta.imag() > f.y1) continue;
            os << "<circle cx=\"" << f.X(e.zeta.real()) << "\" cy=\"" << f.Y(e.zeta.imag()) << "\" r=\"2\" fill=\""
               << (e.stable ? col : "none") << "\" stroke=\"" << col << "\"/>\n";
        }
    }
    os << "<line x1=\"" << f.X(f.x0) << "\" y1=\"" << f.Y(0) << "\" x2=\"" << f.X(f.x1) << "\" y2=\"" << f.Y(0)
       << "\" stroke=\"black\"/>\n</svg>\n";
    return os.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
}

}  // namespace cuspscale
