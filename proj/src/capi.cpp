#include "hiddensketch.h"

#include <cstring>
#include <fstream>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "bitio.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "harness.hpp"
#include "tracker.hpp"

struct hs_tracker {
    hsk::Tracker impl;
};

struct hs_snapshot {
    hsk::WindowSnapshot impl;
};

struct hs_report {
    hsk::WindowReport impl;
    std::vector<std::pair<uint64_t, uint64_t>> entries; // heavy hitters, by key
};

struct hs_changes {
    std::vector<std::pair<uint64_t, int64_t>> entries;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

template <typename Fn>
hs_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const hsk::ConfigError& e) {
        set_error(e.what());
        return HS_ERR_CONFIG;
    } catch (const hsk::IoError& e) {
        set_error(e.what());
        return HS_ERR_IO;
    } catch (const hsk::OverflowError& e) {
        set_error(e.what());
        return HS_ERR_OVERFLOW;
    } catch (const hsk::ExplosionError& e) {
        set_error(e.what());
        return HS_ERR_EXPLOSION;
    } catch (const hsk::InconsistencyError& e) {
        set_error(e.what());
        return HS_ERR_INCONSISTENT;
    } catch (const hsk::NumericalError& e) {
        set_error(e.what());
        return HS_ERR_NUMERICAL;
    } catch (const hsk::BudgetError& e) {
        set_error(e.what());
        return HS_ERR_BUDGET;
    } catch (const std::bad_alloc&) {
        set_error("out of memory");
        return HS_ERR_INTERNAL;
    } catch (const std::exception& e) {
        set_error(e.what());
        return HS_ERR_INTERNAL;
    }
}

hs_status need(bool ok, const char* what) {
    if (ok)
        return HS_OK;
    set_error(std::string(what) + " must not be NULL");
    return HS_ERR_ARGUMENT;
}

hsk::TrackerConfig tracker_config_for(const char* config_path) {
    if (!config_path)
        return {};
    return hsk::tracker_config_from(hsk::ConfigFile::parse_file(config_path));
}

hsk::DecoderConfig decoder_config_for(const char* config_path) {
    if (!config_path)
        return {};
    return hsk::decoder_config_from(hsk::ConfigFile::parse_file(config_path));
}

} // namespace

extern "C" {

const char* hs_status_name(hs_status status) {
    switch (status) {
        case HS_OK: return "ok";
        case HS_ERR_ARGUMENT: return "argument";
        case HS_ERR_CONFIG: return "config";
        case HS_ERR_IO: return "io";
        case HS_ERR_OVERFLOW: return "overflow";
        case HS_ERR_EXPLOSION: return "explosion";
        case HS_ERR_INCONSISTENT: return "inconsistent";
        case HS_ERR_NUMERICAL: return "numerical";
        case HS_ERR_BUDGET: return "budget";
        case HS_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* hs_last_error(void) { return g_last_error.c_str(); }

const char* hs_version(void) { return "1.0.0"; }

hs_status hs_tracker_create(const char* config_path, hs_tracker** out) {
    if (hs_status s = need(out != nullptr, "out"))
        return s;
    return guarded([&] {
        *out = new hs_tracker{hsk::Tracker(tracker_config_for(config_path))};
        return HS_OK;
    });
}

hs_status hs_tracker_create_from_text(const char* config_text, hs_tracker** out) {
    if (hs_status s = need(config_text != nullptr, "config_text"))
        return s;
    if (hs_status s = need(out != nullptr, "out"))
        return s;
    return guarded([&] {
        auto cfg = hsk::ConfigFile::parse_string(config_text, "<config>");
        *out = new hs_tracker{hsk::Tracker(hsk::tracker_config_from(cfg))};
        return HS_OK;
    });
}

void hs_tracker_destroy(hs_tracker* tracker) { delete tracker; }

hs_status hs_tracker_open_window(hs_tracker* tracker) {
    if (hs_status s = need(tracker != nullptr, "tracker"))
        return s;
    return guarded([&] {
        tracker->impl.open_window();
        return HS_OK;
    });
}

hs_status hs_tracker_process(hs_tracker* tracker, uint64_t key, uint64_t weight) {
    if (hs_status s = need(tracker != nullptr, "tracker"))
        return s;
    return guarded([&] {
        tracker->impl.process(key, weight);
        return HS_OK;
    });
}

hs_status hs_tracker_close_window(hs_tracker* tracker, hs_snapshot** out) {
    if (hs_status s = need(tracker != nullptr, "tracker"))
        return s;
    if (hs_status s = need(out != nullptr, "out"))
        return s;
    return guarded([&] {
        *out = new hs_snapshot{tracker->impl.close_window()};
        return HS_OK;
    });
}

hs_status hs_tracker_memory_bits(const hs_tracker* tracker, uint64_t* out) {
    if (hs_status s = need(tracker != nullptr, "tracker"))
        return s;
    if (hs_status s = need(out != nullptr, "out"))
        return s;
    return guarded([&] {
        *out = tracker->impl.memory_bits();
        return HS_OK;
    });
}

void hs_snapshot_destroy(hs_snapshot* snapshot) { delete snapshot; }

hs_status hs_snapshot_save(const hs_snapshot* snapshot, const char* path) {
    if (hs_status s = need(snapshot != nullptr, "snapshot"))
        return s;
    if (hs_status s = need(path != nullptr, "path"))
        return s;
    return guarded([&] {
        hsk::ByteWriter w;
        snapshot->impl.save(w);
        w.write_file(path);
        return HS_OK;
    });
}

hs_status hs_snapshot_load(const char* path, hs_snapshot** out) {
    if (hs_status s = need(path != nullptr, "path"))
        return s;
    if (hs_status s = need(out != nullptr, "out"))
        return s;
    return guarded([&] {
        std::vector<uint8_t> bytes = hsk::read_file_bytes(path);
        hsk::ByteReader r(bytes);
        *out = new hs_snapshot{hsk::WindowSnapshot::load(r)};
        return HS_OK;
    });
}

hs_status hs_snapshot_window_id(const hs_snapshot* snapshot, uint64_t* out) {
    if (hs_status s = need(snapshot != nullptr, "snapshot"))
        return s;
    if (hs_status s = need(out != nullptr, "out"))
        return s;
    *out = snapshot->impl.window_id;
    return HS_OK;
}

hs_status hs_snapshot_total_items(const hs_snapshot* snapshot, uint64_t* out) {
    if (hs_status s = need(snapshot != nullptr, "snapshot"))
        return s;
    if (hs_status s = need(out != nullptr, "out"))
        return s;
    *out = snapshot->impl.total_items;
    return HS_OK;
}

hs_status hs_snapshot_over_capacity(const hs_snapshot* snapshot, int* out) {
    if (hs_status s = need(snapshot != nullptr, "snapshot"))
        return s;
    if (hs_status s = need(out != nullptr, "out"))
        return s;
    *out = snapshot->impl.over_capacity ? 1 : 0;
    return HS_OK;
}

hs_status hs_report_create(const hs_snapshot* snapshot, uint64_t threshold,
                           const char* config_path, hs_report** out) {
    if (hs_status s = need(snapshot != nullptr, "snapshot"))
        return s;
    if (hs_status s = need(out != nullptr, "out"))
        return s;
    return guarded([&] {
        hsk::WindowReport rep = hsk::Tracker::heavy_hitters(
            snapshot->impl, threshold, decoder_config_for(config_path));
        auto* r = new hs_report{std::move(rep), {}};
        r->entries.assign(r->impl.heavy_hitters.begin(), r->impl.heavy_hitters.end());
        *out = r;
        return HS_OK;
    });
}

void hs_report_destroy(hs_report* report) { delete report; }

hs_status hs_report_decode_status(const hs_report* report, int* out) {
    if (hs_status s = need(report != nullptr, "report"))
        return s;
    if (hs_status s = need(out != nullptr, "out"))
        return s;
    switch (report->impl.status) {
        case hsk::DecodeStatus::Full: *out = HS_DECODE_FULL; break;
        case hsk::DecodeStatus::Partial: *out = HS_DECODE_PARTIAL; break;
        case hsk::DecodeStatus::Failed: *out = HS_DECODE_FAILED; break;
    }
    return HS_OK;
}

hs_status hs_report_count(const hs_report* report, size_t* out) {
    if (hs_status s = need(report != nullptr, "report"))
        return s;
    if (hs_status s = need(out != nullptr, "out"))
        return s;
    *out = report->entries.size();
    return HS_OK;
}

hs_status hs_report_entry(const hs_report* report, size_t index, uint64_t* key,
                          uint64_t* frequency) {
    if (hs_status s = need(report != nullptr, "report"))
        return s;
    if (index >= report->entries.size()) {
        set_error("report entry index " + std::to_string(index) + " out of range (" +
                  std::to_string(report->entries.size()) + " entries)");
        return HS_ERR_ARGUMENT;
    }
    if (key)
        *key = report->entries[index].first;
    if (frequency)
        *frequency = report->entries[index].second;
    return HS_OK;
}

hs_status hs_report_lookup(const hs_report* report, uint64_t key, uint64_t* frequency,
                           int* found) {
    if (hs_status s = need(report != nullptr, "report"))
        return s;
    auto it = report->impl.frequencies.find(key);
    if (found)
        *found = it != report->impl.frequencies.end() ? 1 : 0;
    if (frequency)
        *frequency = it != report->impl.frequencies.end() ? it->second : 0;
    return HS_OK;
}

hs_status hs_changes_create(const hs_report* report1, const hs_snapshot* snapshot1,
                            const hs_report* report2, const hs_snapshot* snapshot2,
                            uint64_t delta, hs_changes** out) {
    if (hs_status s = need(report1 && report2, "report"))
        return s;
    if (hs_status s = need(snapshot1 && snapshot2, "snapshot"))
        return s;
    if (hs_status s = need(out != nullptr, "out"))
        return s;
    return guarded([&] {
        auto changes = hsk::Tracker::heavy_changers(report1->impl, snapshot1->impl,
                                                    report2->impl, snapshot2->impl,
                                                    delta);
        auto* c = new hs_changes{};
        c->entries.assign(changes.begin(), changes.end());
        *out = c;
        return HS_OK;
    });
}

void hs_changes_destroy(hs_changes* changes) { delete changes; }

hs_status hs_changes_count(const hs_changes* changes, size_t* out) {
    if (hs_status s = need(changes != nullptr, "changes"))
        return s;
    if (hs_status s = need(out != nullptr, "out"))
        return s;
    *out = changes->entries.size();
    return HS_OK;
}

hs_status hs_changes_entry(const hs_changes* changes, size_t index, uint64_t* key,
                           int64_t* change) {
    if (hs_status s = need(changes != nullptr, "changes"))
        return s;
    if (index >= changes->entries.size()) {
        set_error("changes entry index " + std::to_string(index) + " out of range (" +
                  std::to_string(changes->entries.size()) + " entries)");
        return HS_ERR_ARGUMENT;
    }
    if (key)
        *key = changes->entries[index].first;
    if (change)
        *change = changes->entries[index].second;
    return HS_OK;
}

hs_status hs_generate_trace(const char* path, uint64_t n_items, uint64_t n_keys,
                            double skew, uint64_t seed) {
    if (hs_status s = need(path != nullptr, "path"))
        return s;
    return guarded([&] {
        auto stream = hsk::generate_zipf(n_items, n_keys, skew, seed);
        char comment[128];
        std::snprintf(comment, sizeof comment,
                      "zipf items=%llu keys=%llu skew=%g seed=%llu",
                      (unsigned long long)n_items, (unsigned long long)n_keys, skew,
                      (unsigned long long)seed);
        hsk::write_trace_file(path, stream, comment);
        return HS_OK;
    });
}

hs_status hs_run_experiment(const char* config_path, const char* out_dir) {
    if (hs_status s = need(config_path != nullptr, "config_path"))
        return s;
    if (hs_status s = need(out_dir != nullptr, "out_dir"))
        return s;
    return guarded([&] {
        auto cfg = hsk::ConfigFile::parse_file(config_path);
        hsk::run_experiment_files(cfg, out_dir);
        return HS_OK;
    });
}

hs_status hs_success_rate(const char* out_csv_path, uint64_t n_keys,
                          const uint64_t* bucket_counts, size_t n_bucket_counts,
                          uint32_t trials, const char* modes_csv, uint64_t seed) {
    if (hs_status s = need(out_csv_path != nullptr, "out_csv_path"))
        return s;
    if (hs_status s = need(bucket_counts != nullptr || n_bucket_counts == 0,
                           "bucket_counts"))
        return s;
    if (hs_status s = need(modes_csv != nullptr, "modes_csv"))
        return s;
    return guarded([&] {
        std::vector<uint64_t> buckets(bucket_counts, bucket_counts + n_bucket_counts);
        std::vector<std::string> modes;
        std::string tok;
        for (const char* p = modes_csv;; ++p) {
            if (*p == ',' || *p == '\0') {
                if (!tok.empty())
                    modes.push_back(tok);
                tok.clear();
                if (*p == '\0')
                    break;
            } else if (*p != ' ') {
                tok += *p;
            }
        }
        if (modes.empty())
            throw hsk::ConfigError("success rate: no decoder modes given");
        auto rows = hsk::run_success_rate(n_keys, buckets, trials, modes, seed);
        std::ofstream out(out_csv_path, std::ios::binary);
        if (!out)
            throw hsk::IoError(std::string("cannot write ") + out_csv_path);
        out << hsk::success_rate_csv(rows);
        if (!out)
            throw hsk::IoError(std::string("failed while writing ") + out_csv_path);
        return HS_OK;
    });
}

hs_status hs_eval_files(const char* reported_path, const char* truth_path,
                        uint64_t threshold, double* precision, double* recall,
                        double* f1, double* are) {
    if (hs_status s = need(reported_path != nullptr, "reported_path"))
        return s;
    if (hs_status s = need(truth_path != nullptr, "truth_path"))
        return s;
    return guarded([&] {
        auto reported = hsk::oracle_count(hsk::parse_trace_file(reported_path));
        auto truth = hsk::oracle_count(hsk::parse_trace_file(truth_path));
        hsk::Metrics m = hsk::evaluate(reported, truth, threshold);
        if (precision)
            *precision = m.precision;
        if (recall)
            *recall = m.recall;
        if (f1)
            *f1 = m.f1;
        if (are)
            *are = m.are;
        return HS_OK;
    });
}

} // extern "C"
