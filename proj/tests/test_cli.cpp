#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "exitlab/chung.hpp"
#include "exitlab/cli.hpp"
#include "exitlab/config.hpp"
#include "exitlab/errors.hpp"
#include "exitlab/parallel.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
namespace cfg = exitlab::config;
using exitlab::ConfigError;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("exitlab-test-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = exitlab::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string key_of(const std::string& text) {
    std::istringstream in(text);
    try {
        (void)cfg::parse(in);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "";
}

std::string body_of(const fs::path& csv) {
    std::ifstream in(csv);
    std::string body;
    for (std::string line; std::getline(in, line);) {
        if (!line.starts_with("#")) body += line + "\n";
    }
    return body;
}

fs::path only_file(const fs::path& dir, const std::string& prefix) {
    fs::path found;
    int count = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().filename().string().starts_with(prefix)) {
            found = e.path();
            ++count;
        }
    }
    REQUIRE(count == 1);
    return found;
}

}  // namespace

TEST_CASE("configuration sections map onto the run settings") {
    std::istringstream in(R"([domain]
kind = corner
half_width = 1
start = 0.5 -0.25

[spectral]
h = 0.0625, 0.03125
L = 16

[mc]
horizons = 1:3:0.5
n = 1e5
seed = 12
bridge = off

[fit]
window = 6 15
)");
    const auto c = cfg::parse(in);
    CHECK(c.domain.kind == exitlab::geometry::DomainKind::Corner);
    CHECK(c.domain.start.x1 == 0.5);
    CHECK(c.domain.start.x2 == -0.25);
    CHECK(c.spectral.h == std::vector<double>{0.0625, 0.03125});
    CHECK(c.spectral.arm_length == 16.0);
    CHECK(c.mc.horizons == std::vector<double>{1.0, 1.5, 2.0, 2.5, 3.0});
    CHECK(c.mc.n == 100000);
    CHECK(c.mc.seed == 12);
    CHECK_FALSE(c.mc.policy.bridge);
    CHECK(c.fit.theorem.window.lo == 6.0);
    CHECK(c.fit.theorem.window.hi == 15.0);
    CHECK(c.spectrum_options().h == 0.03125);
}

TEST_CASE("validation errors name the offending key") {
    CHECK(key_of("[spectral]\nh = -0.1\n") == "spectral.h");
    CHECK(key_of("[spectral]\nh = 0.0625 0.125\n") == "spectral.h");
    CHECK(key_of("[spectral]\nresolution = 3\n") == "spectral.resolution");
    CHECK(key_of("[mc]\nn = 0\n") == "mc.n");
    CHECK(key_of("[mc]\nn = 2.5\n") == "mc.n");
    CHECK(key_of("[mc]\nhorizons = 2 1\n") == "mc.horizons");
    CHECK(key_of("[mc]\ndt_max = abc\n") == "mc.dt_max");
    CHECK(key_of("[mc]\nadapt = 2\n") == "mc.adapt");
    CHECK(key_of("[mc]\nbridge = maybe\n") == "mc.bridge");
    CHECK(key_of("[domain]\nkind = annulus\n") == "domain.kind");
    CHECK(key_of("[domain]\nstart = 3 3\n") == "domain.start");
    CHECK(key_of("[domain]\nhalf_width = 0\n") == "domain.half_width");
    CHECK(key_of("[domain]\nkind = union_of_rects\n") == "domain.rects");
    CHECK(key_of("[fit]\nwindow = 5 4\n") == "fit.window");
    CHECK(key_of("[small_deviation]\nr = 1.5\n") == "small_deviation.r");
    CHECK(key_of("[plots]\ncolour = red\n") == "plots.colour");
    CHECK(key_of("top = 1\n") == "top");
    CHECK(key_of("[mc]\nn = 10\n") == "");
}

TEST_CASE("overrides take precedence and the hash follows the settings") {
    std::istringstream a("[mc]\nseed = 3\n"), b("[mc]\n  seed   =   3  \n\n[output]\ndir = elsewhere\n");
    const auto ca = cfg::parse(a), cb = cfg::parse(b);
    CHECK(ca.hash() == cb.hash());
    CHECK(ca.hash().size() == 16);
    std::istringstream c("[mc]\nseed = 3\n");
    const auto cc = cfg::parse(c, {{"mc.seed", "4"}});
    CHECK(cc.mc.seed == 4);
    CHECK(cc.hash() != ca.hash());
    CHECK(cfg::fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(cfg::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    std::istringstream d("[mc]\nseed = 3\n");
    CHECK_THROWS_AS((void)cfg::parse(d, {{"mc.sede", "4"}}), ConfigError);
}

TEST_CASE("malformed configurations exit with status 2") {
    TempDir tmp;
    const auto ini = tmp.path / "bad.ini";
    std::ofstream(ini) << "[spectral]\nh = -0.0625\n";
    const auto r = run({"spectrum", "--config", ini.string()});
    CHECK(r.code == exitlab::cli::kExitValidation);
    CHECK(r.err.find("spectral.h") != std::string::npos);
    CHECK(run({"spectrum", "--config", (tmp.path / "missing.ini").string()}).code == exitlab::cli::kExitValidation);
    CHECK(run({"no-such-command"}).code == exitlab::cli::kExitValidation);
    CHECK(run({"survival-exact", "--domain", "cross", "-o", tmp.path.string()}).code == exitlab::cli::kExitValidation);
    CHECK(run({"--help"}).code == exitlab::cli::kExitOk);
}

TEST_CASE("survival-exact writes the closed-form values") {
    TempDir tmp;
    const auto r = run({"survival-exact", "--domain", "strip", "--start", "3 0", "--horizons", "0.5 1 2 4", "-o",
                        tmp.path.string()});
    REQUIRE(r.code == 0);
    const auto csv = only_file(tmp.path, "survival-exact-strip-");
    CHECK(csv.extension() == ".csv");
    std::istringstream body(body_of(csv));
    std::string line;
    std::getline(body, line);
    CHECK(line == "t,value,truncation_terms");
    for (double t : {0.5, 1.0, 2.0, 4.0}) {
        REQUIRE(std::getline(body, line));
        const auto c1 = line.find(','), c2 = line.rfind(',');
        CHECK(std::stod(line.substr(0, c1)) == t);
        CHECK(std::stod(line.substr(c1 + 1, c2 - c1 - 1)) ==
              doctest::Approx(exitlab::chung::interval_survival(0.0, t).value).epsilon(1e-15));
    }
    std::ifstream in(csv);
    std::getline(in, line);
    CHECK(line.starts_with("# exitlab"));
    std::getline(in, line);
    CHECK(line.find("config_hash=") != std::string::npos);
}

TEST_CASE("survival-mc is reproducible byte for byte") {
    TempDir a, b;
    const std::vector<std::string> common{"survival-mc", "--domain", "cross", "--horizons", "0.5 1 2", "--replicas",
                                          "20000", "--seed", "8"};
    auto args = common;
    args.insert(args.end(), {"-o", a.path.string(), "--threads", "1"});
    REQUIRE(run(args).code == 0);
    args = common;
    args.insert(args.end(), {"-o", b.path.string(), "--threads", "3"});
    REQUIRE(run(args).code == 0);
    const auto fa = only_file(a.path, "survival-mc-cross-"), fb = only_file(b.path, "survival-mc-cross-");
    CHECK(fa.filename() == fb.filename());
    CHECK(body_of(fa) == body_of(fb));
    CHECK(body_of(fa).starts_with("t,estimate,stderr,n\n"));
}

TEST_CASE("spectrum reports the cross trapped mode") {
    TempDir tmp;
    const auto r = run({"spectrum", "--domain", "cross", "--set", "spectral.h=0.0625", "--set", "spectral.L=8", "--set",
                        "spectral.write_v0=true", "-o", tmp.path.string()});
    REQUIRE(r.code == 0);
    std::ifstream in(only_file(tmp.path, "spectrum-cross-"));
    const auto j = nlohmann::json::parse(in);
    CHECK(j["lambda0"].get<double>() / j["threshold"].get<double>() == doctest::Approx(0.66).epsilon(0.02));
    CHECK(j["eigenvalue_list"].size() == 1);
    CHECK(j["metadata"]["config_hash"].get<std::string>().size() == 16);
    CHECK(j["decay_fits"].size() == 4);
    for (const char* key : {"lambda1", "amplitude", "h", "L"}) CHECK(j.contains(key));
    CHECK(fs::exists(tmp.path / j["v0_csv"].get<std::string>()));
}

TEST_CASE("verify-theorem refuses a domain without trapped modes") {
    TempDir tmp;
    const auto r = run({"verify-theorem", "--domain", "strip", "--set", "spectral.h=0.0625", "--set", "spectral.L=8",
                        "-o", tmp.path.string()});
    CHECK(r.code == exitlab::cli::kExitNumerical);
}

TEST_CASE("small-deviation maps r to the horizon r^-2") {
    TempDir tmp;
    REQUIRE(run({"small-deviation", "--set", "small_deviation.r=1", "--replicas", "20000", "-o", tmp.path.string()})
                .code == 0);
    std::ifstream in(only_file(tmp.path, "small-deviation-cross-"));
    const auto j = nlohmann::json::parse(in);
    CHECK(j["horizon"].get<double>() == 1.0);
    CHECK(j["source"] == "mc");
    CHECK(j["stderr"].get<double>() > 0.0);
}

TEST_CASE("the worker cap from the environment is honoured") {
    TempDir tmp;
    const int before = exitlab::parallel::worker_count();
    setenv(exitlab::parallel::kWorkerCapVariable, "1", 1);
    REQUIRE(run({"survival-mc", "--threads", "4", "--replicas", "100", "-o", tmp.path.string()}).code == 0);
    CHECK(exitlab::parallel::worker_count() == 1);
    unsetenv(exitlab::parallel::kWorkerCapVariable);
    exitlab::parallel::set_worker_count(before);
}
