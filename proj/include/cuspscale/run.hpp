#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cuspscale/contour.hpp"
#include "cuspscale/resonance.hpp"

namespace cuspscale {

struct RunConfig {
    std::string source;        // raw text, hashed into artifacts
    std::string model_path;    // resolved relative to the config file
    std::string command;
    std::string out = "out";
    std::uint64_t seed = 1;
    int jobs = 1;
    // window and grids
    double C = 0.5;
    std::vector<double> h{0.2, 0.1, 0.05};
    ScanPlan scan;
    // contour
    End end = End::Cusp;
    double alpha = 0;
    std::vector<double> symbol_R{1, 5, 10};
    int symbol_alpha_points = 40;
    // dynamics
    int count = 100;
    double T = 20, dt = 1e-3;
    // escape
    double delta_p = 0.05, delta_f = 0.05, delta0_ratio = 0.1;
    // scan-resolvent
    int resolvent_modes = 4;
};

const std::vector<std::string>& command_names();

RunConfig parse_run_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

// Executes one command and writes its artifacts under cfg.out.
// Returns 0 on success (findings included), 2 on configuration errors, 3 on computation errors.
int run(const RunConfig& cfg, std::string* message = nullptr);

}  // namespace cuspscale
