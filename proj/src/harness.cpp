#include "harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

#include "bitio.hpp"
#include "errors.hpp"
#include "hash.hpp"

namespace hsk {

namespace {

// Unbiased bounded draw; avoids the library distributions so streams are
// reproducible regardless of the standard library.
uint64_t bounded_rand(std::mt19937_64& rng, uint64_t bound) {
    uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        uint64_t r = rng();
        if (r >= threshold)
            return r % bound;
    }
}

template <typename T>
void fisher_yates(std::vector<T>& v, std::mt19937_64& rng) {
    for (size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[size_t(bounded_rand(rng, i))]);
}

std::string trimmed(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

uint64_t parse_key_token(const std::string& token, const std::string& where) {
    if (token.find('.') != std::string::npos) {
        unsigned a, b, c, d;
        char extra;
        if (std::sscanf(token.c_str(), "%u.%u.%u.%u%c", &a, &b, &c, &d, &extra) != 4 ||
            a > 255 || b > 255 || c > 255 || d > 255)
            throw IoError(where + ": malformed dotted key '" + token + "'");
        return (uint64_t(a) << 24) | (b << 16) | (c << 8) | d;
    }
    if (token.size() > 2 && (token[0] == '0') && (token[1] == 'x' || token[1] == 'X')) {
        char* end = nullptr;
        errno = 0;
        unsigned long long v = std::strtoull(token.c_str() + 2, &end, 16);
        if (end != token.c_str() + token.size() || errno != 0)
            throw IoError(where + ": malformed hex key '" + token + "'");
        return v;
    }
    throw IoError(where + ": key must be dotted IPv4 or 0x-prefixed hex, got '" +
                  token + "'");
}

} // namespace

std::vector<TraceRecord> parse_trace_text(const std::string& text,
                                          const std::string& name) {
    std::vector<TraceRecord> out;
    std::istringstream in(text);
    std::string line;
    uint32_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trimmed(line);
        if (line.empty())
            continue;
        std::string where = name + ":" + std::to_string(lineno);
        size_t comma = line.find(',');
        std::string key_tok = trimmed(comma == std::string::npos ? line
                                                                 : line.substr(0, comma));
        TraceRecord rec;
        rec.key = parse_key_token(key_tok, where);
        if (comma != std::string::npos) {
            std::string w = trimmed(line.substr(comma + 1));
            char* end = nullptr;
            unsigned long long parsed = std::strtoull(w.c_str(), &end, 10);
            if (w.empty() || end != w.c_str() + w.size() || parsed == 0 ||
                w.front() == '-')
                throw IoError(where + ": weight must be a positive integer, got '" +
                              w + "'");
            rec.weight = parsed;
        }
        out.push_back(rec);
    }
    return out;
}

std::vector<TraceRecord> parse_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open trace file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_trace_text(buf.str(), path);
}

std::string format_key(uint64_t key) {
    char buf[32];
    if (key <= 0xFFFFFFFFull) {
        std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", unsigned(key >> 24) & 255,
                      unsigned(key >> 16) & 255, unsigned(key >> 8) & 255,
                      unsigned(key) & 255);
    } else {
        std::snprintf(buf, sizeof buf, "0x%llx", (unsigned long long)key);
    }
    return buf;
}

std::string format_trace(const std::vector<TraceRecord>& records) {
    std::string out;
    out.reserve(records.size() * 12);
    for (const TraceRecord& r : records) {
        out += format_key(r.key);
        if (r.weight != 1) {
            out += ',';
            out += std::to_string(r.weight);
        }
        out += '\n';
    }
    return out;
}

void write_trace_file(const std::string& path, const std::vector<TraceRecord>& records,
                      const std::string& comment) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write trace file: " + path);
    if (!comment.empty())
        out << "# " << comment << "\n";
    out << format_trace(records);
    if (!out)
        throw IoError("failed while writing trace file: " + path);
}

std::vector<TraceRecord> generate_zipf(uint64_t n_items, uint64_t n_keys, double skew,
                                       uint64_t seed) {
    if (n_keys < 1)
        throw ConfigError("generate_zipf: n_keys must be at least 1");
    if (!(skew >= 0.0))
        throw ConfigError("generate_zipf: skew must be non-negative");

    std::mt19937_64 rng(seed);

    // rank r (1-based) gets the r-th drawn distinct key
    std::vector<uint64_t> key_of_rank;
    key_of_rank.reserve(n_keys);
    std::unordered_set<uint64_t> seen;
    while (key_of_rank.size() < n_keys) {
        uint64_t k = rng() & 0xFFFFFFFFull;
        if (seen.insert(k).second)
            key_of_rank.push_back(k);
    }

    // exact counts by largest remainder over weights r^-skew
    std::vector<long double> weight(n_keys);
    long double total_weight = 0.0L;
    for (uint64_t r = 0; r < n_keys; ++r) {
        weight[r] = std::pow((long double)(r + 1), -(long double)skew);
        total_weight += weight[r];
    }
    std::vector<uint64_t> count(n_keys, 0);
    std::vector<std::pair<long double, uint64_t>> remainder(n_keys);
    uint64_t assigned = 0;
    for (uint64_t r = 0; r < n_keys; ++r) {
        long double share = (long double)n_items * weight[r] / total_weight;
        count[r] = uint64_t(share);
        assigned += count[r];
        remainder[r] = {share - (long double)count[r], r};
    }
    std::stable_sort(remainder.begin(), remainder.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (uint64_t i = 0; assigned < n_items; ++i, ++assigned)
        ++count[remainder[i % n_keys].second];

    std::vector<TraceRecord> stream;
    stream.reserve(n_items);
    for (uint64_t r = 0; r < n_keys; ++r)
        for (uint64_t i = 0; i < count[r]; ++i)
            stream.push_back({key_of_rank[r], 1});
    fisher_yates(stream, rng);
    return stream;
}

std::map<uint64_t, uint64_t> oracle_count(const std::vector<TraceRecord>& records) {
    std::map<uint64_t, uint64_t> truth;
    for (const TraceRecord& r : records)
        truth[r.key] += r.weight;
    return truth;
}

Metrics evaluate(const std::map<uint64_t, uint64_t>& reported,
                 const std::map<uint64_t, uint64_t>& truth, uint64_t threshold) {
    size_t true_hh = 0;
    for (const auto& [k, f] : truth)
        if (f >= threshold)
            ++true_hh;
    size_t reported_hh = 0, tp = 0;
    for (const auto& [k, f] : reported) {
        if (f < threshold)
            continue;
        ++reported_hh;
        auto it = truth.find(k);
        if (it != truth.end() && it->second >= threshold)
            ++tp;
    }

    Metrics m;
    m.precision = reported_hh ? double(tp) / double(reported_hh)
                              : (true_hh == 0 ? 1.0 : 0.0);
    m.recall = true_hh ? double(tp) / double(true_hh) : (reported_hh == 0 ? 1.0 : 0.0);
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    if (true_hh) {
        double sum = 0.0;
        for (const auto& [k, f] : truth) {
            if (f < threshold)
                continue;
            auto it = reported.find(k);
            double est = it == reported.end() ? 0.0 : double(it->second);
            sum += std::abs(double(f) - est) / double(f);
        }
        m.are = sum / double(true_hh);
    }
    return m;
}

double estimation_are(const std::map<uint64_t, uint64_t>& estimates,
                      const std::map<uint64_t, uint64_t>& truth) {
    if (truth.empty())
        return 0.0;
    double sum = 0.0;
    for (const auto& [k, f] : truth) {
        auto it = estimates.find(k);
        double est = it == estimates.end() ? 0.0 : double(it->second);
        sum += std::abs(double(f) - est) / double(f);
    }
    return sum / double(truth.size());
}

namespace {

DecoderConfig mode_decoder_config(const std::string& mode) {
    DecoderConfig d;
    if (mode == "pure") {
        d.svd_enabled = false;
        d.ilp_enabled = false;
    } else if (mode == "svd") {
        d.ilp_enabled = false;
    } else if (mode != "ilp") {
        throw ConfigError("unknown decoder mode '" + mode +
                          "' (expected pure, svd, or ilp)");
    }
    return d;
}

} // namespace

std::vector<SuccessRateRow> run_success_rate(uint64_t n_keys,
                                             const std::vector<uint64_t>& bucket_counts,
                                             uint32_t trials,
                                             const std::vector<std::string>& modes,
                                             uint64_t seed, uint64_t freq_lo,
                                             uint64_t freq_hi) {
    if (n_keys < 1)
        throw ConfigError("success rate: n_keys must be at least 1");
    if (freq_lo < 1 || freq_hi < freq_lo)
        throw ConfigError("success rate: frequency range must satisfy 1 <= lo <= hi");
    std::vector<DecoderConfig> mode_cfgs;
    for (const std::string& m : modes)
        mode_cfgs.push_back(mode_decoder_config(m));

    std::vector<SuccessRateRow> rows;
    for (uint64_t buckets : bucket_counts) {
        std::vector<uint64_t> success(modes.size(), 0);
        if (buckets > 0) {
            for (uint32_t t = 0; t < trials; ++t) {
                std::mt19937_64 rng(hash_mix(seed, (buckets << 24) ^ t));
                std::vector<uint64_t> keys;
                std::unordered_set<uint64_t> seen;
                while (keys.size() < n_keys) {
                    uint64_t k = rng();
                    if (seen.insert(k).second)
                        keys.push_back(k);
                }
                CmSketch sk = CmSketch::from_total_buckets(3, buckets, rng(),
                                                           CmMode::Prime);
                for (uint64_t k : keys)
                    sk.insert(k, freq_lo + bounded_rand(rng, freq_hi - freq_lo + 1));
                for (size_t mi = 0; mi < modes.size(); ++mi) {
                    try {
                        DecodeResult res = decode(keys, sk, mode_cfgs[mi]);
                        if (res.status == DecodeStatus::Full)
                            ++success[mi];
                    } catch (const NumericalError&) {
                        // counts as a failed decode for this mode
                    } catch (const BudgetError&) {
                    }
                }
            }
        }
        for (size_t mi = 0; mi < modes.size(); ++mi) {
            double rate = trials ? double(success[mi]) / double(trials) : 0.0;
            rows.push_back({buckets, modes[mi], rate});
        }
    }
    return rows;
}

std::string success_rate_csv(const std::vector<SuccessRateRow>& rows) {
    std::string out = "buckets,mode,success_rate\n";
    char buf[96];
    for (const SuccessRateRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%llu,%s,%.4f\n", (unsigned long long)r.buckets,
                      r.mode.c_str(), r.rate);
        out += buf;
    }
    return out;
}

DecoderConfig decoder_config_from(const ConfigFile& cfg) {
    DecoderConfig d;
    d.rank_tolerance = cfg.get_f64("decoder.rank_tolerance", d.rank_tolerance);
    d.round_tolerance = cfg.get_f64("decoder.round_tolerance", d.round_tolerance);
    d.svd_enabled = cfg.get_bool("decoder.svd", d.svd_enabled);
    d.ilp_enabled = cfg.get_bool("decoder.ilp", d.ilp_enabled);
    d.ilp_node_budget = cfg.get_u64("decoder.ilp_node_budget", d.ilp_node_budget);
    d.svd_max_dim = size_t(cfg.get_u64("decoder.svd_max_dim", d.svd_max_dim));
    return d;
}

TrackerConfig tracker_config_from(const ConfigFile& cfg) {
    TrackerConfig t;
    t.key_bits = uint32_t(cfg.get_u64("tree.key_bits", t.key_bits));
    t.leaf_bits = uint32_t(cfg.get_u64("tree.leaf_bits", t.leaf_bits));
    t.arity = uint32_t(cfg.get_u64("tree.arity", t.arity));
    t.capacity_n = cfg.get_u64("tracker.capacity", t.capacity_n);
    t.epsilon = cfg.get_f64("rbf.epsilon", t.epsilon);
    t.rbf_options.root_filter = cfg.get_bool("rbf.root_filter", true);
    t.rbf_options.explosion_cap =
        cfg.get_u64("rbf.explosion_cap", t.rbf_options.explosion_cap);
    t.cm_depth = uint32_t(cfg.get_u64("cm.depth", t.cm_depth));
    t.cm_total_buckets = cfg.get_u64("cm.total_buckets", t.cm_total_buckets);
    std::string mode = cfg.get("cm.mode", "prime");
    if (mode == "prime")
        t.cm_mode = CmMode::Prime;
    else if (mode == "unit")
        t.cm_mode = CmMode::Unit;
    else
        throw ConfigError(cfg.name() + ": cm.mode must be 'prime' or 'unit', got '" +
                          mode + "'");
    t.cf_depth = uint32_t(cfg.get_u64("coldfilter.depth", t.cf_depth));
    t.cf_width = uint32_t(cfg.get_u64("coldfilter.width", t.cf_width));
    t.cf_counter_max = uint32_t(cfg.get_u64("coldfilter.counter_max", t.cf_counter_max));
    t.threshold = uint32_t(cfg.get_u64("coldfilter.threshold", t.threshold));
    t.seed = cfg.get_u64("seeds.master", t.seed);
    return t;
}

namespace {

std::string status_name(DecodeStatus s) {
    switch (s) {
        case DecodeStatus::Full: return "full";
        case DecodeStatus::Partial: return "partial";
        case DecodeStatus::Failed: return "failed";
    }
    return "unknown";
}

nlohmann::json window_json(const WindowSnapshot& snap, const WindowReport& rep) {
    return nlohmann::json{{"id", snap.window_id},
                          {"total_items", snap.total_items},
                          {"distinct_inserted", snap.distinct_inserted},
                          {"over_capacity", snap.over_capacity},
                          {"status", status_name(rep.status)},
                          {"pure_solved", rep.diagnostics.pure_solved},
                          {"svd_solved", rep.diagnostics.svd_solved},
                          {"ilp_solved", rep.diagnostics.ilp_solved},
                          {"ilp_nodes", rep.diagnostics.ilp_nodes},
                          {"note", rep.diagnostics.note},
                          {"reported_keys", rep.heavy_hitters.size()}};
}

std::string format_metric(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace

namespace {

ExperimentResult run_experiment_impl(const ConfigFile& cfg, const std::string& out_dir) {
    double permute = cfg.get_f64("experiment.permute_fraction", 0.05);
    std::vector<uint64_t> budgets_kb =
        cfg.get_u64_list("experiment.budgets_kb", {32, 40, 48, 64, 96});
    double hh_pct = cfg.get_f64("tasks.hh_threshold_pct", 0.01);
    double hc_pct = cfg.get_f64("tasks.hc_delta_pct", 0.05);
    if (permute < 0.0 || permute > 1.0)
        throw ConfigError(cfg.name() + ": experiment.permute_fraction must be in [0,1]");

    TrackerConfig base = tracker_config_from(cfg);
    DecoderConfig dcfg = decoder_config_from(cfg);

    SeedStream seeds(cfg.get_u64("seeds.master", 1));
    uint64_t trace_seed = seeds.next();
    uint64_t permute_seed = seeds.next();
    uint64_t shuffle_seed = seeds.next();
    uint64_t tracker_seed = seeds.next();

    std::vector<TraceRecord> window1;
    if (cfg.has("experiment.trace")) {
        // relative trace paths anchor at the config file, not the cwd
        std::filesystem::path trace(cfg.get_required("experiment.trace"));
        std::filesystem::path base = std::filesystem::path(cfg.name()).parent_path();
        if (trace.is_relative() && !base.empty())
            trace = base / trace;
        window1 = parse_trace_file(trace.string());
    } else {
        window1 = generate_zipf(cfg.get_u64("experiment.items", 200000),
                                cfg.get_u64("experiment.keys", 6000),
                                cfg.get_f64("experiment.skew", 1.0), trace_seed);
    }
    uint64_t items = 0;
    for (const TraceRecord& r : window1)
        items += r.weight;
    std::map<uint64_t, uint64_t> truth1 = oracle_count(window1);

    // window 2: permute the frequencies of a fraction of the keys
    std::map<uint64_t, uint64_t> truth2 = truth1;
    {
        std::vector<uint64_t> all_keys;
        all_keys.reserve(truth1.size());
        for (const auto& [k, f] : truth1)
            all_keys.push_back(k);
        std::mt19937_64 rng(permute_seed);
        fisher_yates(all_keys, rng);
        size_t m = size_t(std::llround(permute * double(all_keys.size())));
        std::vector<uint64_t> vals;
        vals.reserve(m);
        for (size_t i = 0; i < m; ++i)
            vals.push_back(truth1.at(all_keys[i]));
        fisher_yates(vals, rng);
        for (size_t i = 0; i < m; ++i)
            truth2[all_keys[i]] = vals[i];
    }
    std::vector<TraceRecord> window2;
    {
        window2.reserve(items);
        for (const auto& [k, f] : truth2)
            for (uint64_t i = 0; i < f; ++i)
                window2.push_back({k, 1});
        std::mt19937_64 rng(shuffle_seed);
        fisher_yates(window2, rng);
    }

    uint64_t hh_threshold =
        std::max<uint64_t>(1, uint64_t(std::llround(double(items) * hh_pct / 100.0)));
    uint64_t total_change = 0;
    std::map<uint64_t, uint64_t> truth_change;
    for (const auto& [k, f1] : truth1) {
        uint64_t f2 = truth2.at(k);
        uint64_t d = f1 > f2 ? f1 - f2 : f2 - f1;
        total_change += d;
        if (d > 0)
            truth_change[k] = d;
    }
    uint64_t delta = std::max<uint64_t>(
        1, uint64_t(std::llround(double(total_change) * hc_pct / 100.0)));

    std::string csv = "budget_bytes,task,precision,recall,f1,are\n";
    nlohmann::json diag;
    diag["config"] = cfg.name();
    diag["items"] = items;
    diag["distinct_keys"] = truth1.size();
    diag["permute_fraction"] = permute;
    diag["hh_threshold"] = hh_threshold;
    diag["hc_delta"] = delta;
    diag["total_change"] = total_change;
    diag["memory_note"] = "budgets count counter and bit arrays only";
    diag["budgets"] = nlohmann::json::array();

    for (uint64_t kb : budgets_kb) {
        uint64_t budget_bits = kb * 1024 * 8;
        TrackerConfig tcfg = base;
        tcfg.seed = tracker_seed;
        // fixed Hidden Sketch allocation, remainder to the cold filter
        Tracker probe(tcfg);
        uint64_t hs_bits = probe.memory_bits() -
                           uint64_t(tcfg.cf_depth) * tcfg.cf_width * 8;
        if (budget_bits <= hs_bits + uint64_t(tcfg.cf_depth) * 8)
            throw ConfigError("experiment: budget " + std::to_string(kb) +
                              " KB cannot cover the Hidden Sketch allocation (" +
                              std::to_string(hs_bits / 8) + " bytes)");
        tcfg.cf_width = uint32_t((budget_bits - hs_bits) / (8 * tcfg.cf_depth));

        Tracker tracker(tcfg);
        tracker.open_window();
        for (const TraceRecord& r : window1)
            tracker.process(r.key, r.weight);
        WindowSnapshot s1 = tracker.close_window();
        tracker.open_window();
        for (const TraceRecord& r : window2)
            tracker.process(r.key, r.weight);
        WindowSnapshot s2 = tracker.close_window();

        if (!out_dir.empty() && cfg.get_bool("experiment.save_snapshots", false)) {
            // snapshots of the final budget survive the sweep
            for (const WindowSnapshot* s : {&s1, &s2}) {
                ByteWriter w;
                s->save(w);
                w.write_file(out_dir + "/window" + std::to_string(s->window_id) +
                             ".snap");
            }
        }

        // One decode per window serves both tasks: the change comparison
        // needs candidates down to delta + 1, the heavy-hitter metrics are
        // re-thresholded by evaluate(). A window whose recovery explodes
        // (overdriven sketch at a starved budget) scores as a failed decode
        // rather than aborting the sweep.
        uint64_t report_threshold = std::min(hh_threshold, delta + 1);
        WindowReport r1, r2;
        std::string decode_note;
        for (auto [snap, rep] : {std::pair(&s1, &r1), std::pair(&s2, &r2)}) {
            try {
                *rep = Tracker::heavy_hitters(*snap, report_threshold, dcfg);
            } catch (const Error& e) {
                rep->window_id = snap->window_id;
                rep->status = DecodeStatus::Failed;
                if (!decode_note.empty())
                    decode_note += "; ";
                decode_note += e.what();
            }
        }

        uint64_t budget_bytes = kb * 1024;
        Metrics hh = evaluate(r1.frequencies, truth1, hh_threshold);
        csv += std::to_string(budget_bytes) + ",hh," + format_metric(hh.precision) +
               "," + format_metric(hh.recall) + "," + format_metric(hh.f1) + "," +
               format_metric(hh.are) + "\n";

        Metrics hc;
        std::string hc_note;
        try {
            auto changes = Tracker::heavy_changers(r1, s1, r2, s2, delta);
            std::map<uint64_t, uint64_t> reported_change;
            for (const auto& [k, c] : changes)
                reported_change[k] = uint64_t(c < 0 ? -c : c);
            hc = evaluate(reported_change, truth_change, delta + 1);
        } catch (const Error& e) {
            hc_note = e.what();
        }
        csv += std::to_string(budget_bytes) + ",hc," + format_metric(hc.precision) +
               "," + format_metric(hc.recall) + "," + format_metric(hc.f1) + "," +
               format_metric(hc.are) + "\n";

        std::map<uint64_t, uint64_t> estimates;
        for (const auto& [k, f] : truth1) {
            auto it = r1.frequencies.find(k);
            estimates[k] = it != r1.frequencies.end() ? it->second
                                                      : s1.cold.estimate(k);
        }
        double est_are = estimation_are(estimates, truth1);
        csv += std::to_string(budget_bytes) + ",est,,,," + format_metric(est_are) +
               "\n";

        nlohmann::json budget_diag;
        budget_diag["budget_bytes"] = budget_bytes;
        budget_diag["hidden_sketch_bits"] = hs_bits;
        budget_diag["cold_filter_width"] = tcfg.cf_width;
        budget_diag["cold_filter_bits"] = uint64_t(tcfg.cf_depth) * tcfg.cf_width * 8;
        budget_diag["windows"] =
            nlohmann::json::array({window_json(s1, r1), window_json(s2, r2)});
        if (!decode_note.empty())
            budget_diag["decode_error"] = decode_note;
        if (!hc_note.empty())
            budget_diag["hc_error"] = hc_note;
        diag["budgets"].push_back(budget_diag);
    }

    ExperimentResult out;
    out.metrics_csv = csv;
    out.diagnostics_json = diag.dump(2) + "\n";
    return out;
}

} // namespace

ExperimentResult run_experiment(const ConfigFile& cfg) {
    return run_experiment_impl(cfg, "");
}

ExperimentResult run_experiment_files(const ConfigFile& cfg, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    ExperimentResult res = run_experiment_impl(cfg, out_dir);
    auto write = [&](const std::string& file, const std::string& text) {
        std::string path = out_dir + "/" + file;
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw IoError("cannot write " + path);
        out << text;
        if (!out)
            throw IoError("failed while writing " + path);
    };
    write("metrics.csv", res.metrics_csv);
    write("diagnostics.json", res.diagnostics_json);
    return res;
}

} // namespace hsk
