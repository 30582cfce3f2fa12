#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cuspscale/report.hpp"
#include "cuspscale/run.hpp"
#include "json.hpp"

using namespace cuspscale;
namespace fs = std::filesystem;

namespace {

const std::string models = std::string(CUSPSCALE_SOURCE_DIR) + "/models/";

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("cuspscale_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig config(const std::string& model, const std::string& command, const fs::path& out,
                 const std::string& extra = "") {
    const std::string text = "[run]\nmodel = " + models + model + "\ncommand = " + command + "\nout = " + out.string() +
                             "\nseed = 5\n" + extra;
    return parse_run_config(text);
}

int cli(const std::string& args) {
    const std::string cmd = std::string(CUSPSCALE_CLI) + " " + args + " > /dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST_CASE("provenance helpers") {
    CHECK(config_hash("abc") == "352441c2");
    CHECK(config_hash("abc") != config_hash("abd"));
    const Provenance p{"0badc0de", "1.2.3", "zero-volume", 9};
    const auto j = nlohmann::json::parse(stamp_json("{\"x\": 1}", p));
    CHECK(j["provenance"]["config_hash"] == "0badc0de");
    CHECK(j["provenance"]["version"] == "1.2.3");
    CHECK(j["x"] == 1);
    CHECK(stamp_csv("a,b\n", p).rfind("# config_hash: 0badc0de\n# version: 1.2.3\n", 0) == 0);
    const std::string svg = stamp_svg("<svg width=\"1\"></svg>", p);
    CHECK(svg.find("<!-- config_hash: 0badc0de version: 1.2.3") != std::string::npos);
    CHECK_THROWS(stamp_svg("<html/>", p));
}

TEST_CASE("run config parsing") {
    const RunConfig c = parse_run_config("[run]\ncommand = zero-volume\n[window]\nC = 0.25\nh = 0.2, 0.1\n[grid]\nN = 256\n"
                                         "scheme = chebyshev\n[contour]\nend = funnel\n");
    CHECK(c.C == 0.25);
    CHECK(c.h == std::vector<double>{0.2, 0.1});
    CHECK(c.scan.N == 256);
    CHECK(c.scan.scheme == Scheme::Chebyshev);
    CHECK(c.end == End::Funnel);
    CHECK_THROWS_AS(parse_run_config("[window]\nh = 1.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[window]\nC = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[window]\nC = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[grid]\nscheme = fem\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[run\n"), ConfigError);
    CHECK_THROWS_AS(load_run_config("/nonexistent.ini"), ConfigError);
}

TEST_CASE("exit codes") {
    const fs::path out = scratch("codes");
    std::string msg;
    CHECK(run(config("missing.ini", "zero-volume", out), &msg) == 2);
    CHECK(msg.find("does not exist") != std::string::npos);
    CHECK(run(config("parabolic_cylinder.ini", "fly", out), &msg) == 2);
    // a cusp profile with a pole on the real axis makes the area quadrature fail
    {
        const fs::path bad = scratch("pole_model.ini");
        std::ofstream(bad) << "[model]\nglue = false\n[cusp]\nprofile = user-analytic\ncoeffs = -2\nshift = 1\n"
                              "theta_max = 0.5\n";
        RunConfig c = parse_run_config("[run]\nmodel = " + bad.string() + "\ncommand = zero-volume\nout = " +
                                       out.string() + "\n");
        CHECK(run(c, &msg) == 3);
    }
    CHECK(cli("--config " + models + "runs/zero-volume.ini --out " + out.string()) == 0);
    CHECK(cli("--config /nonexistent.ini") == 2);
    CHECK(cli("--config " + models + "runs/zero-volume.ini --command fly") == 2);
    CHECK(cli("--config " + models + "runs/zero-volume.ini --jobs 0") == 2);
    CHECK(cli("") == 2);
}

TEST_CASE("validate-geometry on a broken profile reports findings and exits 0") {
    const fs::path out = scratch("broken");
    std::string msg;
    REQUIRE(run(config("broken_profile.ini", "validate-geometry", out), &msg) == 0);
    const auto s = nlohmann::json::parse(slurp(out / "validation_summary.json"));
    CHECK(s["all_pass"] == false);
    bool found = false;
    for (const auto& f : s["failing"])
        if (f["id"] == "cusp.warp_near_one") found = !f["witness"].get<std::string>().empty();
    CHECK(found);
    CHECK(slurp(out / "validation.jsonl").find("cusp.warp_near_one") != std::string::npos);
}

TEST_CASE("build-contour for the cusp at alpha = 0 has two regions") {
    const fs::path out = scratch("contour");
    REQUIRE(run(config("parabolic_cylinder.ini", "build-contour", out)) == 0);
    const auto j = nlohmann::json::parse(slurp(out / "contour.json"));
    CHECK(j["branch"] == "small-alpha");
    CHECK(j["regions"] == nlohmann::json::array({"I", "II"}));
    CHECK(slurp(out / "contour.csv").find("r,f,f1,f2,region") != std::string::npos);
    CHECK(slurp(out / "contour.svg").find("<polyline") != std::string::npos);
}

TEST_CASE("artifacts are deterministic and carry provenance") {
    for (const char* cmd : {"build-contour", "zero-volume", "trace-geodesics", "verify-escape"}) {
        const fs::path a = scratch(std::string(cmd) + "_a"), b = scratch(std::string(cmd) + "_b");
        const std::string extra = "[dynamics]\ncount = 12\nT = 12\n";
        REQUIRE(run(config("parabolic_cylinder.ini", cmd, a, extra)) == 0);
        RunConfig cb = config("parabolic_cylinder.ini", cmd, a, extra);
        cb.out = b.string();
        cb.jobs = 2;
        REQUIRE(run(cb) == 0);
        const std::string hash = config_hash(cb.source + "\n" + slurp(models + "parabolic_cylinder.ini"));
        int files = 0;
        for (const auto& e : fs::directory_iterator(a)) {
            const std::string body = slurp(e.path());
            CHECK(body == slurp(b / e.path().filename()));
            CHECK(body.find(hash) != std::string::npos);
            CHECK(body.find(tool_version()) != std::string::npos);
            ++files;
        }
        CHECK(files > 0);
    }
}

TEST_CASE("seed changes the sampled trajectories") {
    const fs::path a = scratch("seed_a"), b = scratch("seed_b");
    const std::string extra = "[dynamics]\ncount = 5\nT = 5\n";
    RunConfig ca = config("parabolic_cylinder.ini", "trace-geodesics", a, extra);
    RunConfig cb = ca;
    cb.out = b.string();
    cb.seed = 6;
    REQUIRE(run(ca) == 0);
    REQUIRE(run(cb) == 0);
    CHECK(slurp(a / "trajectory_0.csv") != slurp(b / "trajectory_0.csv"));
}

TEST_CASE("zero-volume, verify-symbols and scan-resolvent artifacts") {
    const fs::path out = scratch("misc");
    REQUIRE(run(config("parabolic_cylinder.ini", "zero-volume", out)) == 0);
    const auto v = nlohmann::json::parse(slurp(out / "zero_volume.json"));
    CHECK(v["total"].get<double>() == doctest::Approx(2 * std::sinh(1.0) + std::exp(-1.0)).epsilon(1e-12));

    REQUIRE(run(config("parabolic_cylinder.ini", "verify-symbols", out, "[symbols]\nR = 5\nalpha_points = 2\n")) == 0);
    CHECK(nlohmann::json::parse(slurp(out / "symbols.json"))["reports"].size() == 9);

    REQUIRE(run(config("parabolic_cylinder.ini", "scan-resolvent", out,
                       "[window]\nh = 0.2\n[grid]\nN = 512\nboundary_samples = 8\n[resolvent]\nmodes = 2\n")) == 0);
    std::istringstream csv(slurp(out / "resolvent_floor.csv"));
    std::string line;
    int rows = 0;
    while (std::getline(csv, line))
        if (!line.empty() && line[0] != '#' && line[0] != 'h') ++rows;
    CHECK(rows == 16);
}

TEST_CASE("compute-resonances on the bundled model at h = 0.1") {
    const fs::path out = scratch("resonances");
    REQUIRE(run(config("parabolic_cylinder.ini", "compute-resonances", out,
                       "[window]\nh = 0.1\n[grid]\nN = 1024\nboundary_samples = 16\n")) == 0);
    const auto s = nlohmann::json::parse(slurp(out / "resonances_summary.json"));
    CHECK(s["verdict"] == "empty");
    CHECK(s["kappa"].get<double>() > 0);
    const auto r = nlohmann::json::parse(slurp(out / "resonances_h0.1.json"));
    CHECK(r["provenance"]["command"] == "compute-resonances");
    CHECK(slurp(out / "resonance_map.svg").find("<circle") != std::string::npos);
}
