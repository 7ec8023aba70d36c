#include "doctest.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hiddensketch.h"

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / "hsk_capi_test") {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const char* name) const { return (path / name).string(); }
};

const char* kTrackerCfg =
    "[tracker]\ncapacity = 64\n"
    "[coldfilter]\nthreshold = 5\nwidth = 4096\n"
    "[seeds]\nmaster = 3\n";

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("capi: version and status names") {
    CHECK(hs_version() != nullptr);
    CHECK(std::strcmp(hs_status_name(HS_OK), "ok") == 0);
    CHECK(std::strcmp(hs_status_name(HS_ERR_IO), "io") == 0);
    CHECK(std::strcmp(hs_status_name(HS_ERR_EXPLOSION), "explosion") == 0);
}

TEST_CASE("capi: null arguments are rejected with messages") {
    CHECK(hs_tracker_create(nullptr, nullptr) == HS_ERR_ARGUMENT);
    CHECK(std::string(hs_last_error()).find("NULL") != std::string::npos);
    CHECK(hs_tracker_open_window(nullptr) == HS_ERR_ARGUMENT);
    CHECK(hs_snapshot_load("x", nullptr) == HS_ERR_ARGUMENT);
    CHECK(hs_report_create(nullptr, 0, nullptr, nullptr) == HS_ERR_ARGUMENT);
    hs_tracker_destroy(nullptr); // must be a no-op
    hs_snapshot_destroy(nullptr);
    hs_report_destroy(nullptr);
    hs_changes_destroy(nullptr);
}

TEST_CASE("capi: tracker window lifecycle end to end") {
    TempDir dir;
    hs_tracker* t = nullptr;
    REQUIRE(hs_tracker_create_from_text(kTrackerCfg, &t) == HS_OK);

    uint64_t bits = 0;
    CHECK(hs_tracker_memory_bits(t, &bits) == HS_OK);
    CHECK(bits > 0);

    CHECK(hs_tracker_process(t, 1, 1) == HS_ERR_CONFIG); // no window yet
    REQUIRE(hs_tracker_open_window(t) == HS_OK);
    CHECK(hs_tracker_open_window(t) == HS_ERR_CONFIG); // double open

    CHECK(hs_tracker_process(t, 0xC0A80101, 40) == HS_OK);
    CHECK(hs_tracker_process(t, 0x0A000001, 25) == HS_OK);
    CHECK(hs_tracker_process(t, 0x08080808, 3) == HS_OK); // stays cold
    CHECK(hs_tracker_process(t, 7, 0) == HS_ERR_CONFIG);  // zero weight

    hs_snapshot* s1 = nullptr;
    REQUIRE(hs_tracker_close_window(t, &s1) == HS_OK);
    uint64_t id = 0, items = 0;
    int over = -1;
    CHECK(hs_snapshot_window_id(s1, &id) == HS_OK);
    CHECK(id == 1);
    CHECK(hs_snapshot_total_items(s1, &items) == HS_OK);
    CHECK(items == 68);
    CHECK(hs_snapshot_over_capacity(s1, &over) == HS_OK);
    CHECK(over == 0);

    // second window with one key surging
    REQUIRE(hs_tracker_open_window(t) == HS_OK);
    CHECK(hs_tracker_process(t, 0xC0A80101, 40) == HS_OK);
    CHECK(hs_tracker_process(t, 0x0A000001, 90) == HS_OK);
    hs_snapshot* s2 = nullptr;
    REQUIRE(hs_tracker_close_window(t, &s2) == HS_OK);

    // snapshot round trip through a file
    std::string snap_path = dir.file("w1.snap");
    REQUIRE(hs_snapshot_save(s1, snap_path.c_str()) == HS_OK);
    hs_snapshot* loaded = nullptr;
    REQUIRE(hs_snapshot_load(snap_path.c_str(), &loaded) == HS_OK);
    uint64_t id2 = 0;
    CHECK(hs_snapshot_window_id(loaded, &id2) == HS_OK);
    CHECK(id2 == 1);

    // decode both windows; threshold 0 lists every decoded key
    hs_report* r1 = nullptr;
    hs_report* r2 = nullptr;
    REQUIRE(hs_report_create(loaded, 0, nullptr, &r1) == HS_OK);
    REQUIRE(hs_report_create(s2, 0, nullptr, &r2) == HS_OK);

    int status = -1;
    CHECK(hs_report_decode_status(r1, &status) == HS_OK);
    CHECK(status == HS_DECODE_FULL);

    size_t n = 0;
    REQUIRE(hs_report_count(r1, &n) == HS_OK);
    CHECK(n == 2);
    uint64_t freq = 0;
    int found = 0;
    CHECK(hs_report_lookup(r1, 0xC0A80101, &freq, &found) == HS_OK);
    CHECK(found == 1);
    CHECK(freq == 40); // exact: decoded passes + threshold
    CHECK(hs_report_lookup(r1, 0x08080808, &freq, &found) == HS_OK);
    CHECK(found == 0);
    CHECK(hs_report_entry(r1, 99, nullptr, nullptr) == HS_ERR_ARGUMENT);

    uint64_t key = 0;
    bool saw_surger = false;
    for (size_t i = 0; i < n; ++i) {
        REQUIRE(hs_report_entry(r1, i, &key, &freq) == HS_OK);
        if (key == 0x0A000001) {
            saw_surger = true;
            CHECK(freq == 25);
        }
    }
    CHECK(saw_surger);

    // heavy changers between the two windows
    hs_changes* ch = nullptr;
    REQUIRE(hs_changes_create(r1, loaded, r2, s2, 30, &ch) == HS_OK);
    size_t nch = 0;
    REQUIRE(hs_changes_count(ch, &nch) == HS_OK);
    REQUIRE(nch == 1);
    int64_t change = 0;
    REQUIRE(hs_changes_entry(ch, 0, &key, &change) == HS_OK);
    CHECK(key == 0x0A000001);
    CHECK(change == 65);

    hs_changes_destroy(ch);
    hs_report_destroy(r1);
    hs_report_destroy(r2);
    hs_snapshot_destroy(loaded);
    hs_snapshot_destroy(s1);
    hs_snapshot_destroy(s2);
    hs_tracker_destroy(t);
}

TEST_CASE("capi: corrupt snapshot file reports io error") {
    TempDir dir;
    std::string path = dir.file("bad.snap");
    {
        std::ofstream out(path, std::ios::binary);
        out << "not a snapshot";
    }
    hs_snapshot* s = nullptr;
    CHECK(hs_snapshot_load(path.c_str(), &s) == HS_ERR_IO);
    CHECK(std::string(hs_last_error()).size() > 0);
    CHECK(hs_snapshot_load(dir.file("absent.snap").c_str(), &s) == HS_ERR_IO);
}

TEST_CASE("capi: bad config text reports config error") {
    hs_tracker* t = nullptr;
    CHECK(hs_tracker_create_from_text("[tracker]\ncapacity = banana\n", &t) ==
          HS_ERR_CONFIG);
    CHECK(hs_tracker_create("/nonexistent/tracker.cfg", &t) == HS_ERR_CONFIG);
}

TEST_CASE("capi: trace generation is deterministic") {
    TempDir dir;
    std::string a = dir.file("a.trace"), b = dir.file("b.trace");
    REQUIRE(hs_generate_trace(a.c_str(), 2000, 50, 1.0, 9) == HS_OK);
    REQUIRE(hs_generate_trace(b.c_str(), 2000, 50, 1.0, 9) == HS_OK);
    CHECK(slurp(a) == slurp(b));
    CHECK(hs_generate_trace(dir.file("c.trace").c_str(), 10, 0, 1.0, 1) ==
          HS_ERR_CONFIG);
}

TEST_CASE("capi: eval compares reported file against truth file") {
    TempDir dir;
    std::string truth = dir.file("truth.trace"), rep = dir.file("rep.trace");
    {
        std::ofstream out(truth);
        out << "1.1.1.1,10\n2.2.2.2,10\n3.3.3.3,10\n";
        std::ofstream r(rep);
        r << "1.1.1.1,10\n2.2.2.2,10\n4.4.4.4,10\n";
    }
    double p = 0, rr = 0, f1 = 0, are = 0;
    REQUIRE(hs_eval_files(rep.c_str(), truth.c_str(), 1, &p, &rr, &f1, &are) == HS_OK);
    CHECK(p == doctest::Approx(2.0 / 3.0));
    CHECK(rr == doctest::Approx(2.0 / 3.0));
    CHECK(f1 == doctest::Approx(2.0 / 3.0));
    CHECK(are == doctest::Approx(1.0 / 3.0));
    CHECK(hs_eval_files(rep.c_str(), dir.file("none.trace").c_str(), 1, &p, &rr, &f1,
                        &are) == HS_ERR_IO);
}

TEST_CASE("capi: success rate table lands in a csv") {
    TempDir dir;
    std::string csv = dir.file("rates.csv");
    uint64_t buckets[] = {0, 26};
    REQUIRE(hs_success_rate(csv.c_str(), 20, buckets, 2, 6, "pure, ilp", 5) == HS_OK);
    std::string text = slurp(csv);
    CHECK(text.rfind("buckets,mode,success_rate\n", 0) == 0);
    CHECK(text.find("0,pure,0.0000") != std::string::npos);
    CHECK(text.find("26,ilp,") != std::string::npos);
    CHECK(hs_success_rate(csv.c_str(), 20, buckets, 2, 6, "magic", 5) ==
          HS_ERR_CONFIG);
    CHECK(hs_success_rate(csv.c_str(), 20, buckets, 2, 6, " , ", 5) == HS_ERR_CONFIG);
}

TEST_CASE("capi: experiment writes outputs and snapshots") {
    TempDir dir;
    std::string cfg_path = dir.file("exp.cfg");
    {
        std::ofstream out(cfg_path);
        out << "[coldfilter]\nthreshold = 12\n"
            << "[tracker]\ncapacity = 120\n"
            << "[tasks]\nhh_threshold_pct = 0.7\nhc_delta_pct = 1.0\n"
            << "[experiment]\nitems = 2000\nkeys = 80\nskew = 1.0\n"
            << "budgets_kb = 8\npermute_fraction = 0.1\nsave_snapshots = yes\n"
            << "[seeds]\nmaster = 4\n";
    }
    std::string out_dir = dir.file("out");
    REQUIRE(hs_run_experiment(cfg_path.c_str(), out_dir.c_str()) == HS_OK);
    CHECK(fs::exists(fs::path(out_dir) / "metrics.csv"));
    CHECK(fs::exists(fs::path(out_dir) / "diagnostics.json"));

    // the saved snapshots decode through the same C surface
    hs_snapshot* s = nullptr;
    REQUIRE(hs_snapshot_load((fs::path(out_dir) / "window1.snap").string().c_str(),
                             &s) == HS_OK);
    hs_report* r = nullptr;
    REQUIRE(hs_report_create(s, 0, cfg_path.c_str(), &r) == HS_OK);
    size_t n = 0;
    REQUIRE(hs_report_count(r, &n) == HS_OK);
    CHECK(n > 0);
    hs_report_destroy(r);
    hs_snapshot_destroy(s);

    CHECK(hs_run_experiment(dir.file("absent.cfg").c_str(), out_dir.c_str()) ==
          HS_ERR_CONFIG);
}
