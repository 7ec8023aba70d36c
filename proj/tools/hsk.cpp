#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hiddensketch.h"

namespace {

int fail(hs_status st) {
    std::fprintf(stderr, "hsk: %s error: %s\n", hs_status_name(st), hs_last_error());
    return int(st);
}

// trace-compatible key spelling: dotted quad for 32-bit keys, hex above
std::string key_text(uint64_t key) {
    char buf[32];
    if (key <= 0xFFFFFFFFull)
        std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", unsigned(key >> 24) & 255,
                      unsigned(key >> 16) & 255, unsigned(key >> 8) & 255,
                      unsigned(key) & 255);
    else
        std::snprintf(buf, sizeof buf, "0x%" PRIx64, key);
    return buf;
}

int run_gen(const std::string& out, uint64_t items, uint64_t keys, double skew,
            uint64_t seed) {
    hs_status st = hs_generate_trace(out.c_str(), items, keys, skew, seed);
    if (st != HS_OK)
        return fail(st);
    std::fprintf(stderr, "wrote %" PRIu64 " records over %" PRIu64 " keys to %s\n",
                 items, keys, out.c_str());
    return 0;
}

int run_run(const std::string& config, const std::string& out_dir) {
    hs_status st = hs_run_experiment(config.c_str(), out_dir.c_str());
    if (st != HS_OK)
        return fail(st);
    std::fprintf(stderr, "experiment outputs in %s\n", out_dir.c_str());
    return 0;
}

int run_decode(const std::string& snapshot, uint64_t threshold,
               const std::string& config, const std::string& out) {
    hs_snapshot* snap = nullptr;
    hs_status st = hs_snapshot_load(snapshot.c_str(), &snap);
    if (st != HS_OK)
        return fail(st);

    hs_report* rep = nullptr;
    st = hs_report_create(snap, threshold, config.empty() ? nullptr : config.c_str(),
                          &rep);
    if (st != HS_OK) {
        hs_snapshot_destroy(snap);
        return fail(st);
    }

    int status = HS_DECODE_FAILED;
    hs_report_decode_status(rep, &status);
    const char* names[] = {"full", "partial", "failed"};
    std::fprintf(stderr, "decode status: %s\n", names[status]);

    std::FILE* dst = stdout;
    if (!out.empty()) {
        dst = std::fopen(out.c_str(), "wb");
        if (!dst) {
            std::fprintf(stderr, "hsk: io error: cannot write %s\n", out.c_str());
            hs_report_destroy(rep);
            hs_snapshot_destroy(snap);
            return int(HS_ERR_IO);
        }
    }
    size_t n = 0;
    hs_report_count(rep, &n);
    for (size_t i = 0; i < n; ++i) {
        uint64_t key = 0, freq = 0;
        hs_report_entry(rep, i, &key, &freq);
        std::fprintf(dst, "%s,%" PRIu64 "\n", key_text(key).c_str(), freq);
    }
    if (dst != stdout)
        std::fclose(dst);

    hs_report_destroy(rep);
    hs_snapshot_destroy(snap);
    return status == HS_DECODE_FAILED ? int(HS_ERR_INCONSISTENT) : 0;
}

int run_eval(const std::string& reported, const std::string& truth,
             uint64_t threshold) {
    double p = 0, r = 0, f1 = 0, are = 0;
    hs_status st = hs_eval_files(reported.c_str(), truth.c_str(), threshold, &p, &r,
                                 &f1, &are);
    if (st != HS_OK)
        return fail(st);
    std::printf("precision,recall,f1,are\n%.6f,%.6f,%.6f,%.6f\n", p, r, f1, are);
    return 0;
}

int run_success_rate(const std::string& out, uint64_t keys,
                     const std::vector<uint64_t>& buckets, uint32_t trials,
                     const std::string& modes, uint64_t seed) {
    hs_status st = hs_success_rate(out.c_str(), keys, buckets.data(), buckets.size(),
                                   trials, modes.c_str(), seed);
    if (st != HS_OK)
        return fail(st);
    std::fprintf(stderr, "success-rate table in %s\n", out.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hidden Sketch: reversible sketches for heavy hitters and heavy "
                 "changers"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("hsk ") + hs_version());

    std::string out, config, snapshot, reported, truth, modes = "pure,svd,ilp";
    uint64_t items = 200000, keys = 6000, seed = 1, threshold = 0;
    double skew = 1.0;
    uint32_t trials = 1000;
    std::vector<uint64_t> buckets = {80, 90, 100, 110, 120, 130};

    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic Zipf trace");
    gen->add_option("--out", out, "trace file to write")->required();
    gen->add_option("--items", items, "records to emit");
    gen->add_option("--keys", keys, "distinct keys");
    gen->add_option("--skew", skew, "Zipf exponent");
    gen->add_option("--seed", seed, "RNG seed");

    CLI::App* run = app.add_subcommand("run", "run a full experiment sweep");
    run->add_option("--config", config, "experiment config file")->required();
    run->add_option("--out", out, "output directory")->required();

    CLI::App* decode =
        app.add_subcommand("decode", "decode a window snapshot to key,count lines");
    decode->add_option("--snapshot", snapshot, "snapshot file")->required();
    decode->add_option("--threshold", threshold,
                       "report keys at or above this frequency (0: all)");
    decode->add_option("--config", config, "config file with [decoder] overrides");
    decode->add_option("--out", out, "write the dump here instead of stdout");

    CLI::App* eval =
        app.add_subcommand("eval", "score a reported key,count file against truth");
    eval->add_option("--reported", reported, "reported key,count file")->required();
    eval->add_option("--truth", truth, "ground-truth trace file")->required();
    eval->add_option("--threshold", threshold, "heavy-hitter threshold")->required();

    CLI::App* rate =
        app.add_subcommand("success-rate", "decode success-rate study table");
    rate->add_option("--out", out, "CSV file to write")->required();
    rate->add_option("--keys", keys, "distinct keys per instance");
    rate->add_option("--buckets", buckets, "bucket counts to sweep")->delimiter(',');
    rate->add_option("--trials", trials, "instances per bucket count");
    rate->add_option("--modes", modes, "comma list from pure,svd,ilp");
    rate->add_option("--seed", seed, "RNG seed");

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed())
        return run_gen(out, items, keys, skew, seed);
    if (run->parsed())
        return run_run(config, out);
    if (decode->parsed())
        return run_decode(snapshot, threshold, config, out);
    if (eval->parsed())
        return run_eval(reported, truth, threshold);
    if (rate->parsed())
        return run_success_rate(out, keys, buckets, trials, modes, seed);
    return 1;
}
