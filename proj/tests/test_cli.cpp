#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "msoc/csv.hpp"
#include "msoc/pipeline.hpp"
#include "msoc/scenario.hpp"
#include "test_support.hpp"

using namespace msoc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("msoc_test_" + tag + "_" +
                                            std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ScenarioConfig small_config() {
    ScenarioConfig cfg = msoc_test::default_config(1);
    cfg.n_slow = 9;
    cfg.n_torus = 8;
    cfg.epsilon_list = {0.4};
    cfg.mc_paths = 50;
    cfg.mc_horizon = 2.0;
    cfg.mc_dt = 5e-3;
    return cfg;
}

}  // namespace

TEST_CASE("pipeline: density stage output is all ones for decoupled dynamics") {
    TempDir tmp("density");
    ScenarioConfig cfg = small_config();
    cfg.theta_c = 0.0;  // zero fast drift -> uniform invariant density
    run_pipeline(cfg, {"density"}, tmp.path.string(), false);
    const std::string text = slurp(tmp.path / "density.csv");
    REQUIRE(!text.empty());
    CHECK(text.rfind("# scenario_hash=", 0) == 0);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // hash comment
    std::getline(in, line);
    CHECK(line == "x,y1,y2,rho");
    int rows = 0;
    while (std::getline(in, line)) {
        const auto pos = line.rfind(',');
        const double rho = std::stod(line.substr(pos + 1));
        CHECK(rho == doctest::Approx(1.0).epsilon(1e-9));
        ++rows;
    }
    CHECK(rows == cfg.n_slow * cfg.n_torus * cfg.n_torus);
}

TEST_CASE("pipeline: missing dependency is an error without auto-deps") {
    TempDir tmp("deps");
    ScenarioConfig cfg = small_config();
    CHECK_THROWS_AS(run_pipeline(cfg, {"solve-effective"}, tmp.path.string(), false),
                    PipelineError);
    CHECK_THROWS_WITH_AS(run_pipeline(cfg, {"bogus-stage"}, tmp.path.string(), false),
                         doctest::Contains("bogus-stage"), PipelineError);
}

TEST_CASE("pipeline: auto-deps pulls prerequisites in order") {
    TempDir tmp("autodeps");
    ScenarioConfig cfg = small_config();
    const auto manifest = run_pipeline(cfg, {"solve-effective"}, tmp.path.string(), true);
    CHECK(fs::exists(tmp.path / "density.csv"));
    CHECK(fs::exists(tmp.path / "effective_tables.csv"));
    CHECK(fs::exists(tmp.path / "effective_value.csv"));
    CHECK(fs::exists(tmp.path / "manifest.json"));
    // density must precede homogenize which precedes solve-effective
    std::vector<std::string> order;
    for (const auto& s : manifest.stages) order.push_back(s.name);
    const auto at = [&](const std::string& n) {
        return std::find(order.begin(), order.end(), n) - order.begin();
    };
    CHECK(at("density") < at("homogenize"));
    CHECK(at("homogenize") < at("solve-effective"));
}

TEST_CASE("pipeline: stage reuses dependency output already on disk") {
    TempDir tmp("reuse");
    ScenarioConfig cfg = small_config();
    run_pipeline(cfg, {"density", "homogenize"}, tmp.path.string(), false);
    // no auto-deps, but the tables CSV exists: must not throw
    const auto manifest = run_pipeline(cfg, {"solve-effective"}, tmp.path.string(), false);
    CHECK(manifest.stages.size() == 1);
}

TEST_CASE("pipeline: manifest round-trips through JSON") {
    TempDir tmp("manifest");
    RunManifest m;
    m.scenario_hash = 0xdeadbeefULL;
    m.tool_version = "test";
    m.stages.push_back({"density", {}, {"density.csv"}, 1.25});
    const auto p = (tmp.path / "manifest.json").string();
    write_manifest(m, p);
    const auto r = read_manifest(p);
    CHECK(r.scenario_hash == m.scenario_hash);
    CHECK(r.tool_version == m.tool_version);
    REQUIRE(r.stages.size() == 1);
    CHECK(r.stages[0].name == "density");
    CHECK(r.stages[0].outputs == std::vector<std::string>{"density.csv"});
    CHECK(r.stages[0].wall_clock_s == 1.25);
}

TEST_CASE("pipeline: re-running produces byte-identical CSVs") {
    TempDir a("det_a"), b("det_b");
    ScenarioConfig cfg = small_config();
    const std::vector<std::string> stages = {"density", "homogenize", "solve-effective",
                                             "simulate"};
    run_pipeline(cfg, stages, a.path.string(), false, 1);
    run_pipeline(cfg, stages, b.path.string(), false, 4);
    for (const auto& f :
         {"density.csv", "effective_tables.csv", "effective_value.csv", "mc_values.csv"}) {
        CAPTURE(f);
        const std::string ca = slurp(a.path / f), cb = slurp(b.path / f);
        CHECK(!ca.empty());
        CHECK(ca == cb);
    }
}

TEST_CASE("report: converge stage output feeds the error figure") {
    TempDir tmp("report");
    ScenarioConfig cfg = small_config();
    const auto manifest = run_pipeline(cfg, {"converge"}, tmp.path.string(), true);
    const auto summary = emit_report(manifest, tmp.path.string());
    CHECK(fs::exists(tmp.path / "err_vs_eps.dat"));
    CHECK(fs::exists(tmp.path / "summary.txt"));
    CHECK(slurp(tmp.path / "summary.txt") == summary);
    CHECK(summary.find("converge") != std::string::npos);
}

TEST_CASE("csv writer: formatting is lossless and stable") {
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.1) == format_double(0.1));
    const double v = 0.1234567890123456789;
    CHECK(std::stod(format_double(v)) == v);
    TempDir tmp("csv");
    const auto p = (tmp.path / "t.csv").string();
    {
        CsvWriter w(p, {"a", "b"}, 42);
        w.row({1.5, -0.25});
        w.close();
    }
    const std::string text = slurp(p);
    CHECK(text == "# scenario_hash=42\na,b\n1.5,-0.25\n");
}

TEST_CASE("scenario: canonical text and hash are stable under reparse") {
    ScenarioConfig cfg = small_config();
    const auto text = scenario_canonical_text(cfg);
    const auto cfg2 = load_scenario(text);
    CHECK(scenario_hash(cfg) == scenario_hash(cfg2));
    CHECK(scenario_canonical_text(cfg2) == text);
}
