#pragma once

#include <string>
#include <vector>

#include "cuspscale/contour.hpp"
#include "cuspscale/resonance.hpp"

namespace cuspscale {

std::string tool_version();
// CRC-32 of the text, as 8 hex digits.
std::string config_hash(const std::string& text);

struct Provenance {
    std::string config_hash, version, command;
    unsigned long long seed = 0;
};

// Inserts a "provenance" object at the top level of a JSON document.
std::string stamp_json(const std::string& json, const Provenance& p);
// Prepends "# key: value" lines to CSV text.
std::string stamp_csv(const std::string& csv, const Provenance& p);

// Inserts a provenance comment right after the opening <svg> tag.
std::string stamp_svg(const std::string& svg, const Provenance& p);

// Figures as standalone SVG.
std::string contour_svg(const std::vector<const ContourSpec*>& contours);
// Window disc, log-strip shading {im zeta > -C h log(1/h)}, and eigenvalues per h.
std::string resonance_map_svg(const std::vector<ResonanceReport>& reports);

void write_file(const std::string& path, const std::string& text);

}  // namespace cuspscale
