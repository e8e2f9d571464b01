#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "latticefibers/experiment.hpp"
#include "latticefibers/schema.hpp"

using namespace latfib;
namespace fs = std::filesystem;

namespace {

const fs::path kSourceDir = LATFIB_SOURCE_DIR;

fs::path temp_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("latfib_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    REQUIRE(f.good());
    std::ostringstream o;
    o << f.rdbuf();
    return o.str();
}

nlohmann::json load_json(const fs::path& p) {
    std::ifstream f(p);
    REQUIRE(f.good());
    return nlohmann::json::parse(f);
}

}  // namespace

TEST_CASE("config parsing") {
    const fs::path base = temp_dir("cfg");
    SECTION("rejects malformed configs") {
        CHECK_THROWS_AS(ExperimentConfig::parse({{"mode", "warp"},
                                                 {"masses", {1.0, 1.0}},
                                                 {"dimension", 1},
                                                 {"k", {{"point", {0.0}}}}},
                                                base),
                        std::invalid_argument);
        CHECK_THROWS_AS(ExperimentConfig::parse({{"mode", "band"}, {"masses", {1.0, 1.0}}, {"dimension", 1}},
                                                base),
                        std::invalid_argument);
        CHECK_THROWS_AS(ExperimentConfig::parse({{"mode", "band"},
                                                 {"masses", {1.0, 1.0}},
                                                 {"dimension", 2},
                                                 {"potential", {{"dimension", 1}, {"entries", nlohmann::json::array()}}},
                                                 {"k", {{"point", {0.0, 0.0}}}}},
                                                base),
                        std::invalid_argument);
        CHECK_THROWS_AS(ExperimentConfig::parse({{"mode", "band"},
                                                 {"masses", {1.0, 1.0}},
                                                 {"dimension", 1},
                                                 {"k", {{"point", {0.0}}}},
                                                 {"deltas", {0.0}}},
                                                base),
                        std::invalid_argument);
        CHECK_THROWS_AS(ExperimentConfig::parse({{"mode", "band"},
                                                 {"masses", {1.0, 1.0}},
                                                 {"dimension", 1},
                                                 {"k", {{"point", {0.0}}}},
                                                 {"radii", {20, 10}}},
                                                base),
                        std::invalid_argument);
        CHECK_THROWS_AS(ExperimentConfig::load(base / "missing.json"), std::invalid_argument);
    }
    SECTION("grid k sets hit the torus boundary exactly") {
        const auto cfg = ExperimentConfig::parse({{"mode", "band"},
                                                  {"masses", {1.0, 1.0}},
                                                  {"dimension", 1},
                                                  {"k", {{"grid", {{"points_per_axis", 9}}}}}},
                                                 base);
        REQUIRE(cfg.k_points.size() == 9);
        bool has_pi = false;
        for (const auto& k : cfg.k_points) {
            if (k[0] == kPi) has_pi = true;
        }
        CHECK(has_pi);
    }
    SECTION("potential file indirection") {
        Potential v(1);
        v.set({2}, -0.75);
        std::ofstream f(base / "pot.json");
        f << potential_to_json(v).dump() << "\n";
        f.close();
        const auto cfg = ExperimentConfig::parse({{"mode", "scan"},
                                                  {"masses", {1.0, 1.0}},
                                                  {"dimension", 1},
                                                  {"potential", "pot.json"},
                                                  {"k", {{"point", {0.0}}}}},
                                                 base);
        CHECK(cfg.potential.value(LatticePoint{2}) == -0.75);
        CHECK_THROWS_AS(ExperimentConfig::parse({{"mode", "scan"},
                                                 {"masses", {1.0, 1.0}},
                                                 {"dimension", 1},
                                                 {"potential", "nope.json"},
                                                 {"k", {{"point", {0.0}}}}},
                                                base),
                        std::invalid_argument);
    }
    fs::remove_all(base);
}

TEST_CASE("shipped configs validate against the schema") {
    const auto schema = load_json(kSourceDir / "schemas" / "config.schema.json");
    for (const char* name : {"appendix.json", "appendix_convergence.json", "delta_well_1d.json"}) {
        const auto doc = load_json(kSourceDir / "configs" / name);
        const auto errors = validate_schema(schema, doc);
        CAPTURE(name, errors);
        CHECK(errors.empty());
    }
    // a broken document is rejected
    const auto errors = validate_schema(schema, nlohmann::json{{"mode", "warp"}});
    CHECK_FALSE(errors.empty());
}

TEST_CASE("band mode report") {
    const fs::path out = temp_dir("band");
    const auto cfg = ExperimentConfig::parse({{"mode", "band"},
                                              {"masses", {1.0, 2.0}},
                                              {"dimension", 1},
                                              {"k", {{"grid", {{"points_per_axis", 8}}}}}},
                                             out);
    RunOptions opt;
    opt.out_dir = out.string();
    const Json report = run(cfg, opt);
    CHECK(report["mode"] == "band");
    REQUIRE(report["results"].size() == 8);
    for (const auto& row : report["results"]) {
        const QuasiMomentum k(row["k"].get<std::vector<double>>());
        const BandParams bp = band_params(MassPair(1, 2), k);
        CHECK(row["band_min"].get<double>() == Catch::Approx(bp.band_min));
        CHECK(row["band_max"].get<double>() == Catch::Approx(bp.band_max));
        CHECK(row["ratio"].get<double>() == Catch::Approx(bp.ratio));
    }
    CHECK(fs::exists(out / "tables" / "band.csv"));
    CHECK(fs::exists(out / "plots" / "band_edges.svg"));
    // CSV has a header plus one row per k
    std::istringstream csv(slurp(out / "tables" / "band.csv"));
    std::string line;
    int lines = 0;
    while (std::getline(csv, line)) {
        if (!line.empty()) ++lines;
    }
    CHECK(lines == 9);
    fs::remove_all(out);
}

TEST_CASE("scan mode on the shipped delta-well config") {
    const auto cfg = ExperimentConfig::load(kSourceDir / "configs" / "delta_well_1d.json");
    const fs::path out = temp_dir("scan");
    RunOptions opt;
    opt.out_dir = out.string();
    opt.jobs = 2;
    const Json report = run(cfg, opt);
    REQUIRE(report["results"].size() == 9);
    int boundary_rows = 0;
    for (const auto& row : report["results"]) {
        REQUIRE(row.contains("spectrum"));
        // one bound state below the band at every k, boundary or not
        CHECK(row["spectrum"]["n_below"].get<std::int64_t>() == 1);
        CHECK(row["spectrum"]["n_above"].get<std::int64_t>() == 0);
        if (row["boundary_k"].get<bool>()) {
            ++boundary_rows;
            CHECK(row["A"].get<double>() == 0.0);
        }
    }
    CHECK(boundary_rows == 1);  // exactly the k = pi grid point
    CHECK(fs::exists(out / "tables" / "scan.csv"));
    const auto schema = load_json(kSourceDir / "schemas" / "report.schema.json");
    CHECK(validate_schema(schema, load_json(out / "report.json")).empty());
    fs::remove_all(out);
}

TEST_CASE("dichotomy mode on the shipped appendix config") {
    const auto cfg = ExperimentConfig::load(kSourceDir / "configs" / "appendix.json");
    const fs::path out = temp_dir("dicho");
    RunOptions opt;
    opt.out_dir = out.string();
    const Json report = run(cfg, opt);
    REQUIRE(report["results"].size() == 2);
    CHECK(report["results"][0]["verdict"] == "Infinite");
    CHECK(report["results"][0]["alpha"] == Json::array({1}));
    CHECK(report["results"][1]["verdict"] == "Finite");
    CHECK(report["results"][1]["containment_radius"].get<std::int64_t>() == 0);
    fs::remove_all(out);
}

TEST_CASE("bs-count mode") {
    const fs::path out = temp_dir("bs");
    const auto cfg = ExperimentConfig::parse({{"mode", "bs-count"},
                                              {"masses", {1.0, 1.0}},
                                              {"dimension", 1},
                                              {"potential", {{"dimension", 1}, {"entries", {{0, -1.0}}}}},
                                              {"k", {{"point", {0.0}}}},
                                              {"radii", {500}},
                                              {"z", -0.1}},
                                             out);
    RunOptions opt;
    opt.out_dir = out.string();
    const Json report = run(cfg, opt);
    REQUIRE(report["results"].size() == 1);
    CHECK(report["results"][0]["count"].get<std::int64_t>() == 1);
    CHECK(report["results"][0]["side"] == "below");
    CHECK(fs::exists(out / "tables" / "bs_count.csv"));

    // z is mandatory
    auto j = cfg.echo;
    j.erase("z");
    const auto noz = ExperimentConfig::parse(j, out);
    CHECK_THROWS_AS(run(noz, opt), std::invalid_argument);
    fs::remove_all(out);
}

TEST_CASE("convergence mode emits counts per radius") {
    const fs::path out = temp_dir("conv");
    const auto cfg = ExperimentConfig::parse({{"mode", "convergence"},
                                              {"masses", {1.0, 1.0}},
                                              {"dimension", 1},
                                              {"potential", {{"dimension", 1}, {"entries", {{0, -1.0}}}}},
                                              {"k", {{"point", {0.0}}}},
                                              {"radii", {10, 14, 18}},
                                              {"deltas", {1e-6}}},
                                             out);
    RunOptions opt;
    opt.out_dir = out.string();
    const Json report = run(cfg, opt);
    REQUIRE(report["results"].size() == 1);
    CHECK(report["results"][0]["verdict"] == "Stable");
    CHECK(report["results"][0]["stable_count"].get<std::int64_t>() == 1);
    CHECK(report["results"][0]["counts"] == Json::array({1, 1, 1}));
    CHECK(fs::exists(out / "tables" / "convergence.csv"));
    CHECK(fs::exists(out / "plots" / "counts_vs_radius.svg"));
    fs::remove_all(out);
}

TEST_CASE("stable output is byte-identical across runs") {
    const auto cfg = ExperimentConfig::load(kSourceDir / "configs" / "delta_well_1d.json");
    const fs::path out1 = temp_dir("det1");
    const fs::path out2 = temp_dir("det2");
    RunOptions opt;
    opt.stable_output = true;
    opt.out_dir = out1.string();
    run(cfg, opt);
    opt.jobs = 4;  // parallelism must not change the report
    opt.out_dir = out2.string();
    run(cfg, opt);
    CHECK(slurp(out1 / "report.json") == slurp(out2 / "report.json"));
    CHECK(slurp(out1 / "tables" / "scan.csv") == slurp(out2 / "tables" / "scan.csv"));
    CHECK_FALSE(load_json(out1 / "report.json").contains("timings"));
    fs::remove_all(out1);
    fs::remove_all(out2);
}

TEST_CASE("worker pool") {
    SECTION("environment cap on jobs") {
        setenv("LATTICEFIBERS_THREADS", "1", 1);
        CHECK(effective_jobs(8) == 1);
        unsetenv("LATTICEFIBERS_THREADS");
        CHECK(effective_jobs(8) == 8);
        CHECK(effective_jobs(0) == 1);
    }
    SECTION("per-task error capture") {
        std::vector<int> hits(4, 0);
        const auto errors = parallel_for(4, 2, [&](std::int64_t i) {
            if (i == 1) throw std::runtime_error("task one failed");
            hits[static_cast<std::size_t>(i)] = 1;
        });
        CHECK(errors[1] == "task one failed");
        CHECK(errors[0].empty());
        CHECK(hits[0] == 1);
        CHECK(hits[2] == 1);
        CHECK(hits[3] == 1);
    }
}
