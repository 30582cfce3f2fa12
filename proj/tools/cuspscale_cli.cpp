#include <CLI11.hpp>
#include <iostream>

#include "cuspscale/geometry.hpp"
#include "cuspscale/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"cuspscale: resonance-free window toolkit for cusp/funnel surfaces"};
    std::string config, command, out;
    int jobs = 0;
    long long seed = -1;
    app.add_option("--config", config, "run configuration (INI)")->required();
    app.add_option("--command", command, "overrides [run] command")
        ->check(CLI::IsMember(cuspscale::command_names()));
    app.add_option("--out", out, "output directory");
    app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "random seed")->check(CLI::NonNegativeNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    cuspscale::RunConfig cfg;
    try {
        cfg = cuspscale::load_run_config(config);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    if (!command.empty()) cfg.command = command;
    if (!out.empty()) cfg.out = out;
    if (jobs > 0) cfg.jobs = jobs;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    std::string msg;
    const int rc = cuspscale::run(cfg, &msg);
    (rc == 0 ? std::cout : std::cerr) << msg << '\n';
    return rc;
}
