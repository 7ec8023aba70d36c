#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "errors.hpp"
#include "harness.hpp"

using namespace hsk;

TEST_CASE("harness: trace text round trip") {
    std::vector<TraceRecord> recs = {
        {0xC0A80101, 1}, {0x01020304, 7}, {0x123456789ABCDEFull, 2}};
    std::string text = format_trace(recs);
    CHECK(text == "192.168.1.1\n1.2.3.4,7\n0x123456789abcdef,2\n");
    CHECK(parse_trace_text(text) == recs);
}

TEST_CASE("harness: trace parsing accepts comments and blank lines") {
    auto recs = parse_trace_text("# header\n\n 10.0.0.1 , 3 # inline\n0xFF\n");
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].key == 0x0A000001);
    CHECK(recs[0].weight == 3);
    CHECK(recs[1].key == 255);
    CHECK(recs[1].weight == 1);
}

TEST_CASE("harness: trace parse errors carry file and line") {
    CHECK_THROWS_WITH_AS(parse_trace_text("1.2.3.4\n999.1.1.1\n", "t.trace"),
                         doctest::Contains("t.trace:2"), IoError);
    CHECK_THROWS_WITH_AS(parse_trace_text("hello\n", "t.trace"),
                         doctest::Contains("t.trace:1"), IoError);
    CHECK_THROWS_WITH_AS(parse_trace_text("1.2.3.4,0\n", "t.trace"),
                         doctest::Contains("weight"), IoError);
    CHECK_THROWS_WITH_AS(parse_trace_text("1.2.3.4,-2\n", "t.trace"),
                         doctest::Contains("weight"), IoError);
    CHECK_THROWS_WITH_AS(parse_trace_text("0xZZ\n", "t.trace"),
                         doctest::Contains("hex"), IoError);
    CHECK_THROWS_AS(parse_trace_file("/nonexistent/x.trace"), IoError);
}

TEST_CASE("harness: format_key picks dotted quads for 32-bit keys") {
    CHECK(format_key(0) == "0.0.0.0");
    CHECK(format_key(0xFFFFFFFFull) == "255.255.255.255");
    CHECK(format_key(0x100000000ull) == "0x100000000");
}

TEST_CASE("harness: zipf stream is deterministic") {
    auto a = generate_zipf(5000, 100, 1.0, 7);
    auto b = generate_zipf(5000, 100, 1.0, 7);
    CHECK(format_trace(a) == format_trace(b));
    auto c = generate_zipf(5000, 100, 1.0, 8);
    CHECK(format_trace(a) != format_trace(c));
}

TEST_CASE("harness: zipf top share at skew 1") {
    auto stream = generate_zipf(200000, 6000, 1.0, 42);
    CHECK(stream.size() == 200000);
    auto truth = oracle_count(stream);
    CHECK(truth.size() == 6000);
    uint64_t top = 0, total = 0;
    for (const auto& [k, f] : truth) {
        top = std::max(top, f);
        total += f;
    }
    CHECK(total == 200000);
    double share = double(top) / double(total);
    CHECK(share >= 0.05);
    CHECK(share <= 0.15);
}

TEST_CASE("harness: zipf skew 0 is near uniform") {
    auto truth = oracle_count(generate_zipf(50000, 100, 0.0, 3));
    uint64_t lo = UINT64_MAX, hi = 0;
    for (const auto& [k, f] : truth) {
        lo = std::min(lo, f);
        hi = std::max(hi, f);
    }
    CHECK(double(hi) / double(lo) <= 2.0);
}

TEST_CASE("harness: zipf input validation") {
    CHECK_THROWS_AS(generate_zipf(10, 0, 1.0, 1), ConfigError);
    CHECK_THROWS_AS(generate_zipf(10, 5, -1.0, 1), ConfigError);
}

TEST_CASE("harness: oracle counting") {
    CHECK(oracle_count({}).empty());
    auto truth = oracle_count({{9, 1}, {9, 1}, {9, 3}});
    CHECK(truth == std::map<uint64_t, uint64_t>{{9, 5}});
}

TEST_CASE("harness: evaluate hand cases") {
    std::map<uint64_t, uint64_t> truth = {{1, 10}, {2, 10}, {3, 10}};
    std::map<uint64_t, uint64_t> reported = {{1, 10}, {2, 10}, {4, 10}};
    Metrics m = evaluate(reported, truth, 1);
    CHECK(m.precision == doctest::Approx(2.0 / 3.0));
    CHECK(m.recall == doctest::Approx(2.0 / 3.0));
    CHECK(m.f1 == doctest::Approx(2.0 / 3.0));
    CHECK(m.are == doctest::Approx(1.0 / 3.0)); // key 3 reads as estimate 0

    Metrics perfect = evaluate(truth, truth, 5);
    CHECK(perfect.f1 == 1.0);
    CHECK(perfect.are == 0.0);

    Metrics empty = evaluate({}, truth, 1);
    CHECK(empty.precision == 0.0);
    CHECK(empty.recall == 0.0);
    CHECK(empty.f1 == 0.0);

    Metrics none = evaluate({}, {}, 1);
    CHECK(none.precision == 1.0);
    CHECK(none.recall == 1.0);
}

TEST_CASE("harness: evaluate filters both sides by threshold") {
    std::map<uint64_t, uint64_t> truth = {{1, 100}, {2, 3}};
    std::map<uint64_t, uint64_t> reported = {{1, 100}, {2, 3}, {3, 2}};
    Metrics m = evaluate(reported, truth, 10);
    CHECK(m.precision == 1.0); // sub-threshold entries are not counted
    CHECK(m.recall == 1.0);
}

TEST_CASE("harness: estimation ARE") {
    std::map<uint64_t, uint64_t> truth = {{1, 10}, {2, 20}};
    std::map<uint64_t, uint64_t> est = {{1, 11}, {2, 20}};
    CHECK(estimation_are(est, truth) == doctest::Approx(0.05));
    CHECK(estimation_are(truth, truth) == 0.0);
    CHECK(estimation_are({}, {}) == 0.0);
}

TEST_CASE("harness: success rate stages only improve") {
    std::vector<std::string> modes = {"pure", "svd", "ilp"};
    auto rows = run_success_rate(20, {0, 26}, 12, modes, 99);
    REQUIRE(rows.size() == 6);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(rows[i].buckets == 0);
        CHECK(rows[i].rate == 0.0);
    }
    CHECK(rows[3].mode == "pure");
    CHECK(rows[5].mode == "ilp");
    CHECK(rows[3].rate <= rows[4].rate);
    CHECK(rows[4].rate <= rows[5].rate);
    CHECK(rows[5].rate > 0.0);

    std::string csv = success_rate_csv(rows);
    CHECK(csv.substr(0, 26) == "buckets,mode,success_rate\n");
    CHECK(csv.find("26,pure,") != std::string::npos);

    CHECK_THROWS_AS(run_success_rate(10, {8}, 2, {"magic"}, 1), ConfigError);
}

static const char* kExperimentCfg = R"([tree]
key_bits = 32
leaf_bits = 8
arity = 2

[cm]
depth = 3

[coldfilter]
depth = 3
threshold = 20

[tracker]
capacity = 200

[tasks]
hh_threshold_pct = 0.75
hc_delta_pct = 0.5

[experiment]
items = 3000
keys = 150
skew = 1.0
permute_fraction = 0.1
budgets_kb = 8, 16

[seeds]
master = 11
)";

TEST_CASE("harness: experiment sweep runs and is deterministic") {
    ConfigFile cfg = ConfigFile::parse_string(kExperimentCfg, "exp.cfg");
    ExperimentResult a = run_experiment(cfg);
    ExperimentResult b = run_experiment(cfg);
    CHECK(a.metrics_csv == b.metrics_csv);
    CHECK(a.diagnostics_json == b.diagnostics_json);

    // header + 2 budgets x 3 tasks
    CHECK(std::count(a.metrics_csv.begin(), a.metrics_csv.end(), '\n') == 7);
    CHECK(a.metrics_csv.rfind("budget_bytes,task,precision,recall,f1,are\n", 0) == 0);
    CHECK(a.metrics_csv.find("8192,hh,") != std::string::npos);
    CHECK(a.metrics_csv.find("16384,est,") != std::string::npos);
    CHECK(a.diagnostics_json.find("\"full\"") != std::string::npos);
}

TEST_CASE("harness: experiment replays a trace file") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "hsk_harness_test";
    fs::create_directories(dir);
    fs::path trace = dir / "tiny.trace";

    auto stream = generate_zipf(2000, 80, 1.0, 5);
    write_trace_file(trace.string(), stream, "tiny synthetic window");

    std::string text = std::string("[coldfilter]\nthreshold = 12\n") +
                       "[tracker]\ncapacity = 120\n" +
                       "[tasks]\nhh_threshold_pct = 0.7\nhc_delta_pct = 1.0\n" +
                       "[experiment]\ntrace = " + trace.string() +
                       "\nbudgets_kb = 8\npermute_fraction = 0.1\n" +
                       "[seeds]\nmaster = 4\n";
    ConfigFile cfg = ConfigFile::parse_string(text, "replay.cfg");
    ExperimentResult res = run_experiment_files(cfg, (dir / "out").string());
    CHECK(res.diagnostics_json.find("\"items\": 2000") != std::string::npos);

    std::ifstream in(dir / "out" / "metrics.csv");
    REQUIRE(in.good());
    std::string disk((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    CHECK(disk == res.metrics_csv);
    CHECK(fs::exists(dir / "out" / "diagnostics.json"));
    fs::remove_all(dir);
}

TEST_CASE("harness: experiment rejects budgets below the fixed allocation") {
    ConfigFile cfg = ConfigFile::parse_string(
        "[experiment]\nitems = 500\nkeys = 50\nbudgets_kb = 1\n[tracker]\ncapacity = "
        "200\n[coldfilter]\nthreshold = 8\n",
        "small.cfg");
    CHECK_THROWS_WITH_AS(run_experiment(cfg), doctest::Contains("budget"), ConfigError);
}

TEST_CASE("harness: config to tracker and decoder mappings") {
    ConfigFile cfg = ConfigFile::parse_string(
        "[tree]\nkey_bits = 16\nleaf_bits = 8\narity = 2\n"
        "[rbf]\nepsilon = 0.01\nroot_filter = off\nexplosion_cap = 1024\n"
        "[cm]\ndepth = 4\ntotal_buckets = 400\nmode = unit\n"
        "[coldfilter]\ndepth = 2\nwidth = 512\ncounter_max = 100\nthreshold = 9\n"
        "[tracker]\ncapacity = 77\n"
        "[decoder]\nilp = off\nsvd = on\nilp_node_budget = 5000\n"
        "[seeds]\nmaster = 21\n");
    TrackerConfig t = tracker_config_from(cfg);
    CHECK(t.key_bits == 16);
    CHECK(t.leaf_bits == 8);
    CHECK(t.capacity_n == 77);
    CHECK(t.epsilon == doctest::Approx(0.01));
    CHECK(!t.rbf_options.root_filter);
    CHECK(t.rbf_options.explosion_cap == 1024);
    CHECK(t.cm_depth == 4);
    CHECK(t.cm_total_buckets == 400);
    CHECK(t.cm_mode == CmMode::Unit);
    CHECK(t.cf_depth == 2);
    CHECK(t.cf_width == 512);
    CHECK(t.cf_counter_max == 100);
    CHECK(t.threshold == 9);
    CHECK(t.seed == 21);

    DecoderConfig d = decoder_config_from(cfg);
    CHECK(d.svd_enabled);
    CHECK(!d.ilp_enabled);
    CHECK(d.ilp_node_budget == 5000);

    ConfigFile bad = ConfigFile::parse_string("[cm]\nmode = banana\n");
    CHECK_THROWS_WITH_AS(tracker_config_from(bad), doctest::Contains("cm.mode"),
                         ConfigError);
}
