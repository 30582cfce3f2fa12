#pragma once

#include <string>

#include "cuspscale/geometry.hpp"

namespace cuspscale {

// Sectioned key = value text ([model], [cross_section], [cusp], [funnel], [core], [perturbation]).
ModelSurface parse_model(const std::string& text);
ModelSurface load_model(const std::string& path);

}  // namespace cuspscale
