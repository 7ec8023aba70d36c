#ifndef HSK_HARNESS_HPP
#define HSK_HARNESS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "config.hpp"
#include "tracker.hpp"

namespace hsk {

struct TraceRecord {
    uint64_t key = 0;
    uint64_t weight = 1;
    bool operator==(const TraceRecord&) const = default;
};

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double are = 0.0;
};

// Trace files: one record per line, `<key>[,<weight>]`, key as dotted IPv4
// or 0x-prefixed hex, `#` starts a comment.
std::vector<TraceRecord> parse_trace_text(const std::string& text,
                                          const std::string& name = "<string>");
std::vector<TraceRecord> parse_trace_file(const std::string& path);
std::string format_key(uint64_t key); // dotted for 32-bit keys, hex above
std::string format_trace(const std::vector<TraceRecord>& records);
void write_trace_file(const std::string& path,
                      const std::vector<TraceRecord>& records,
                      const std::string& comment = "");

// Seeded synthetic stream: n_items records over n_keys distinct random
// 32-bit keys with Zipf(skew) frequencies (exact largest-remainder counts),
// order shuffled. Same arguments, same bytes.
std::vector<TraceRecord> generate_zipf(uint64_t n_items, uint64_t n_keys,
                                       double skew, uint64_t seed);

std::map<uint64_t, uint64_t> oracle_count(const std::vector<TraceRecord>& records);

// Precision/recall/F1 of `reported` against `truth` at the given threshold
// (both sides filtered to entries >= threshold), plus the average relative
// error over the true heavy-hitter set (missing keys read as estimate 0).
Metrics evaluate(const std::map<uint64_t, uint64_t>& reported,
                 const std::map<uint64_t, uint64_t>& truth, uint64_t threshold);

// ARE over every truth key; estimates may come from any source.
double estimation_are(const std::map<uint64_t, uint64_t>& estimates,
                      const std::map<uint64_t, uint64_t>& truth);

// Decode success-rate study: for each bucket count and decoder mode
// ("pure", "svd", "ilp"; each mode includes the previous stages), the
// fraction of `trials` random instances decoding to Full status. All modes
// see identical instances for a given (bucket count, trial) pair.
struct SuccessRateRow {
    uint64_t buckets = 0;
    std::string mode;
    double rate = 0.0;
};
std::vector<SuccessRateRow> run_success_rate(
    uint64_t n_keys, const std::vector<uint64_t>& bucket_counts, uint32_t trials,
    const std::vector<std::string>& modes, uint64_t seed, uint64_t freq_lo = 1,
    uint64_t freq_hi = 100);
std::string success_rate_csv(const std::vector<SuccessRateRow>& rows);

DecoderConfig decoder_config_from(const ConfigFile& cfg);
TrackerConfig tracker_config_from(const ConfigFile& cfg);

// Full experiment: generate two windows (the second with a fraction of key
// frequencies permuted), sweep the memory budgets, run heavy-hitter,
// heavy-changer and estimation tasks against the oracle.
struct ExperimentResult {
    std::string metrics_csv;
    std::string diagnostics_json;
};
ExperimentResult run_experiment(const ConfigFile& cfg);
ExperimentResult run_experiment_files(const ConfigFile& cfg,
                                      const std::string& out_dir);

} // namespace hsk

#endif
