#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "delaybounds/cli.hpp"
#include "delaybounds/config.hpp"
#include "delaybounds/errors.hpp"
#include "delaybounds/output.hpp"

using namespace dbounds;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(DB_SOURCE_DIR) / "configs";

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string error_of(const std::string& text) {
    try {
        parse_config(text, "t.json");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("dbounds_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun cli(std::vector<std::string> args) {
    args.insert(args.begin(), "delaybounds");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string vdp_text() { return slurp(kConfigs / "vdp.json"); }

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("shipped configs round trip") {
    int seen = 0;
    for (const auto& entry : fs::directory_iterator(kConfigs)) {
        if (entry.path().extension() != ".json") continue;
        ++seen;
        CAPTURE(entry.path().string());
        const RunConfig cfg = load_config(entry.path().string());
        CHECK_NOTHROW(validate_config(cfg));
        const RunConfig again = parse_config(emit_config(cfg));
        CHECK(again == cfg);
        CHECK(emit_config(again) == emit_config(cfg));
        CHECK(config_hash(again) == config_hash(cfg));
    }
    CHECK(seen >= 5);
}

TEST_CASE("values are read as written") {
    const RunConfig cfg = parse_config(vdp_text());
    CHECK(cfg.model == ModelKind::vdp);
    CHECK(cfg.params.d == 0.1);
    CHECK(cfg.params.omega2_sq == 4.0);
    CHECK(cfg.K == 6);
    CHECK(cfg.sweep.theta_step_value() == doctest::Approx(std::numbers::pi / 48));
    CHECK(cfg.grid().theta_step == doctest::Approx(std::numbers::pi / 48));
    CHECK(cfg.stepper().step == 0.01);
    CHECK(cfg.probe_settings().varpi == 50.0);
}

TEST_CASE("errors point at the offending line") {
    const std::string base = vdp_text();
    SUBCASE("unknown key") {
        const std::string msg = error_of(replace(base, "\"c2\": 0.2,", "\"c2\": 0.2, \"c9\": 1,"));
        CHECK(msg.find("c9") != std::string::npos);
        CHECK(msg.find("line 5") != std::string::npos);
    }
    SUBCASE("missing physical parameter") {
        const std::string msg = error_of(replace(base, "    \"d\": 0.1,\n", ""));
        CHECK(msg.find("d") != std::string::npos);
        CHECK_FALSE(msg.empty());
    }
    SUBCASE("wrong type") {
        const std::string msg = error_of(replace(base, "\"K\": 6", "\"K\": \"six\""));
        CHECK(msg.find("line 30") != std::string::npos);
    }
    SUBCASE("syntax error") {
        const std::string msg = error_of(replace(base, "\"T\": 40.0,", "\"T\": 40.0,,"));
        CHECK(msg.find("line 31") != std::string::npos);
    }
    SUBCASE("bad enum") {
        CHECK_FALSE(error_of(replace(base, "\"model\": \"vdp\"", "\"model\": \"lorenz\"")).empty());
        CHECK_FALSE(error_of(replace(base, "\"pi/48\"", "\"tau/2\"")).empty());
    }
    SUBCASE("tanh needs its scales") {
        CHECK_FALSE(error_of(replace(base, "\"model\": \"vdp\"", "\"model\": \"vdp_tanh\"")).empty());
    }
}

TEST_CASE("cross-field validation") {
    RunConfig cfg = parse_config(vdp_text());
    cfg.dt = 0.75;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    cfg = parse_config(vdp_text());
    cfg.K = 0;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    cfg = parse_config(vdp_text());
    cfg.varpi = -1.0;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
}

TEST_CASE("theta step forms") {
    SweepConfig s;
    s.theta_step = "pi/8";
    CHECK(s.theta_step_value() == doctest::Approx(std::numbers::pi / 8));
    s.theta_step = "0.25";
    CHECK(s.theta_step_value() == 0.25);
    s.theta_step = "pi/1";
    CHECK(s.theta_step_value() == doctest::Approx(std::numbers::pi));
}

TEST_CASE("hash tracks content") {
    RunConfig a = parse_config(vdp_text());
    RunConfig b = a;
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    b.output_dir = "elsewhere";
    CHECK(config_hash(a) == config_hash(b));
    b.params.mu1 = 1.0000001;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("phi list parsing") {
    CHECK(parse_phi_list("0.5,0,-1,2e-3") == std::vector<double>{0.5, 0.0, -1.0, 2e-3});
    CHECK_THROWS_AS(parse_phi_list("0.5,x"), ConfigError);
}

TEST_CASE("number formatting") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1e300 * 1e10) == "inf");
    CHECK(format_number(-0.5) == "-0.5");
}

TEST_CASE("cli exit codes") {
    const fs::path dir = scratch("exit");
    const std::string cfg = (kConfigs / "vdp.json").string();
    const std::string outdir = (dir / "o").string();

    CHECK(cli({"simulate", "--config", cfg, "--T", "5", "--output-dir", outdir}).code == kExitOk);
    CHECK(fs::exists(dir / "o" / "simulate.csv"));

    CHECK(cli({"simulate", "--config", (dir / "missing.json").string()}).code == kExitConfig);
    CHECK(cli({"nonsense"}).code == kExitConfig);
    CHECK(cli({"simulate", "--config", cfg, "--phi-s", "1,2"}).code == kExitConfig);
    CHECK(cli({"simulate", "--config", cfg, "--K", "0", "--output-dir", outdir}).code == kExitConfig);

    std::ofstream(dir / "bad.json") << "{ \"model\": \"vdp\", }";
    const CliRun bad = cli({"cascade", "--config", (dir / "bad.json").string()});
    CHECK(bad.code == kExitConfig);
    CHECK(bad.err.find("line 1") != std::string::npos);

    // large data blows up the simulation
    const CliRun boom = cli({"simulate", "--config", cfg, "--phi-s", "0,60,0,0", "--T", "20",
                             "--output-dir", outdir});
    CHECK(boom.code == kExitNumerical);
    const CliRun casc = cli({"cascade", "--config", cfg, "--phi-s", "0,60,0,0", "--T", "20",
                             "--output-dir", outdir});
    CHECK(casc.code == kExitNumerical);
}

TEST_CASE("reruns are byte identical") {
    const fs::path dir = scratch("rerun");
    const std::string cfg = (kConfigs / "duffing.json").string();
    for (const char* sub : {"a", "b"}) {
        const std::string o = (dir / sub).string();
        REQUIRE(cli({"bounds", "--config", cfg, "--T", "10", "--K", "3", "--output-dir", o}).code ==
                kExitOk);
        REQUIRE(cli({"boundary", "--config", cfg, "--method", "reference", "--T", "10",
                     "--output-dir", o})
                    .code == kExitOk);
    }
    for (const char* name : {"bounds_K3.csv", "boundary_reference_K6.csv"}) {
        CAPTURE(name);
        const std::string a = slurp(dir / "a" / name);
        CHECK_FALSE(a.empty());
        CHECK(a == slurp(dir / "b" / name));
    }
    const CsvTable t = read_csv((dir / "a" / "bounds_K3.csv").string());
    CHECK(t.meta.at("kind") == "bounds");
    CHECK(t.meta.at("K") == "3");
    CHECK(t.meta.count("config_hash") == 1);
    CHECK(t.columns.front() == "t");
    CHECK(t.number(0, "t") == 0.0);

    // comparing a file with itself gives zero gaps and no violations
    const std::string metrics = (dir / "m.csv").string();
    REQUIRE(cli({"compare", (dir / "a" / "bounds_K3.csv").string(),
                 (dir / "b" / "bounds_K3.csv").string(), "--out", metrics})
                .code == kExitOk);
    const CsvTable m = read_csv(metrics);
    bool saw_violation_metric = false;
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        const std::string& metric = m.rows[r][m.column("metric")];
        if (metric == "enclosure_violations") {
            saw_violation_metric = true;
            CHECK(m.number(r, "value") == 0.0);
        }
    }
    CHECK(saw_violation_metric);

    CHECK(cli({"compare", (dir / "a" / "bounds_K3.csv").string(),
               (dir / "a" / "boundary_reference_K6.csv").string(), "--out", metrics})
              .code == kExitConfig);
}
