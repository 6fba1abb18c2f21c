#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmmh/errors.hpp"
#include "pmmh/math.hpp"
#include "pmmh/models/registry.hpp"
#include "pmmh/study.hpp"

using namespace pmmh;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& sub) {
    fs::path d = fs::temp_directory_path() / "pmmh_study_tests" / sub;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

long data_rows(const fs::path& csv) {
    std::ifstream in(csv);
    std::string line;
    long n = -1;  // header
    while (std::getline(in, line)) ++n;
    return n;
}

AppConfig demo_config(const std::string& outdir) {
    AppConfig app;
    app.preset = "sv";
    app.sampler = SamplerKind::kImh;
    app.iterations = 300;
    app.prelim_iterations = 100;
    app.imh.refit_schedule = {50, 100, 200};
    app.filter.particles = 60;
    app.seed = 21;
    app.replicates = 2;
    app.evidence = true;
    app.plots = true;
    app.output_dir = outdir;
    return app;
}

Dataset demo_data() {
    models::ModelBundle b = models::make_preset("sv");
    b.prototype.set("mu", -0.7);
    b.prototype.set("phi", 0.95);
    b.prototype.set("sigma2", 0.04);
    Rng rng(derive_seed(5, stream::kSimulate));
    Dataset d;
    d.y = simulate_series(b.model, b.prototype, 40, rng);
    return d;
}

std::string med_iqr_cell(std::vector<double> v) {
    double med = quantile(v, 0.5);
    double iqr = quantile(v, 0.75) - quantile(v, 0.25);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g (%.3g)", med, iqr);
    return buf;
}

}  // namespace

TEST_CASE("replicate seeds: zero is the master, the rest are derived") {
    CHECK(replicate_seed(42, 0) == 42);
    CHECK(replicate_seed(42, 3) == derive_seed(42, stream::kReplicate, 3));
    CHECK(replicate_seed(42, 1) != replicate_seed(42, 2));
    CHECK(replicate_seed(42, 1) != 42);
}

TEST_CASE("study writes per-replicate artifacts and a consistent aggregate table") {
    fs::path out = scratch("study");
    AppConfig app = demo_config(out.string());
    Dataset data = demo_data();
    std::ostringstream log;
    StudyResult res = run_study(app, data, log);

    REQUIRE(res.replicates.size() == 2);
    CHECK(res.replicates[0].seed == 21);
    CHECK(res.replicates[1].seed == replicate_seed(21, 1));
    for (const char* rep : {"replicate_00", "replicate_01"}) {
        CHECK(fs::exists(out / rep / "draws.csv"));
        CHECK(fs::exists(out / rep / "summary.json"));
        CHECK(fs::exists(out / rep / "trace_mu.svg"));
        CHECK(fs::exists(out / rep / "hist_sigma2.svg"));
        CHECK(fs::exists(out / rep / "filtered_state.svg"));
        CHECK(data_rows(out / rep / "draws.csv") == app.iterations);
    }
    CHECK(log.str().find("replicate 0") != std::string::npos);

    json j = json::parse(slurp(out / "replicate_00" / "summary.json"));
    CHECK(j["model"] == "sv");
    CHECK(j["sampler"] == "imh");
    CHECK(j["filter"] == "sir");
    CHECK(j["iterations"] == 300);
    CHECK(j["seed"] == 21);
    CHECK(j["acceptance_percent"].get<double>() ==
          res.replicates[0].diagnostics.acceptance_percent);
    CHECK(j["if"]["median"].get<double>() == res.replicates[0].diagnostics.if_median);
    REQUIRE(res.replicates[0].evidence);
    CHECK(j["evidence"]["log_p_bs"].get<double>() == res.replicates[0].evidence->log_p_bs);
    CHECK(j["parameters"].size() == 3);
    CHECK(j["parameters"][0]["name"] == "mu");

    // the table's median (IQR) cells must match a recomputation from the JSONs
    std::vector<double> acc, if_med, bs;
    for (const char* rep : {"replicate_00", "replicate_01"}) {
        json s = json::parse(slurp(out / rep / "summary.json"));
        acc.push_back(s["acceptance_percent"].get<double>());
        if_med.push_back(s["if"]["median"].get<double>());
        bs.push_back(s["evidence"]["log_p_bs"].get<double>());
    }
    std::string table = slurp(res.table_path);
    CHECK(table.find("| imh | sir |") != std::string::npos);
    CHECK(table.find(med_iqr_cell(acc)) != std::string::npos);
    CHECK(table.find(med_iqr_cell(if_med)) != std::string::npos);
    CHECK(table.find(med_iqr_cell(bs)) != std::string::npos);
}

TEST_CASE("rerunning a study reproduces the draw files byte for byte") {
    Dataset data = demo_data();
    fs::path out1 = scratch("rerun1"), out2 = scratch("rerun2");
    AppConfig app = demo_config(out1.string());
    app.plots = false;
    app.evidence = false;
    std::ostringstream log;
    run_study(app, data, log);
    app.output_dir = out2.string();
    run_study(app, data, log);
    for (const char* rep : {"replicate_00", "replicate_01"}) {
        CHECK(slurp(out1 / rep / "draws.csv") == slurp(out2 / rep / "draws.csv"));
        // summaries match except for measured wall-clock time
        json a = json::parse(slurp(out1 / rep / "summary.json"));
        json b = json::parse(slurp(out2 / rep / "summary.json"));
        for (auto* j : {&a, &b}) {
            j->erase("seconds_per_iteration");
            j->erase("ect_median");
        }
        CHECK(a == b);
    }
}

TEST_CASE("a single-replicate study matches a plain chain run byte for byte") {
    Dataset data = demo_data();
    fs::path out = scratch("single");
    AppConfig app = demo_config(out.string());
    app.replicates = 1;
    app.plots = false;
    app.evidence = false;
    std::ostringstream log;
    run_study(app, data, log);

    RunSetup setup = build_run(app, data);
    RunRecord rec = run_chain(setup.inputs, setup.config);
    fs::path direct = out / "direct.csv";
    write_draws_csv(direct.string(), rec);
    CHECK(slurp(direct) == slurp(out / "replicate_00" / "draws.csv"));
}

TEST_CASE("summary comparison subtracts evidence and rejects summaries without it") {
    fs::path d = scratch("compare");
    std::ofstream(d / "a.json") << R"({ "evidence": { "log_p_bs": -10.5, "log_p_is": -10.25 } })";
    std::ofstream(d / "b.json") << R"({ "evidence": { "log_p_bs": -12.0, "log_p_is": -12.5 } })";
    std::ofstream(d / "c.json") << R"({ "model": "sv" })";

    Comparison cmp = compare_summaries((d / "a.json").string(), (d / "b.json").string());
    CHECK(cmp.log_bf_bs == 1.5);
    CHECK(cmp.log_bf_is == 2.25);
    CHECK_THROWS_WITH(compare_summaries((d / "a.json").string(), (d / "c.json").string()),
                      doctest::Contains("evidence"));
    CHECK_THROWS_WITH(compare_summaries((d / "missing.json").string(), (d / "b.json").string()),
                      doctest::Contains("cannot open"));
}

TEST_CASE("oracle self-checks pass") {
    std::ostringstream out;
    CHECK(verify_oracles(out));
    CHECK(out.str().find("FAIL") == std::string::npos);
    long passes = 0;
    std::stringstream ss(out.str());
    std::string line;
    while (std::getline(ss, line))
        if (line.rfind("PASS", 0) == 0) ++passes;
    CHECK(passes == 5);
}
