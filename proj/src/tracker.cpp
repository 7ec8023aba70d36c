#include "tracker.hpp"

#include <cmath>
#include <string>

#include "bitio.hpp"
#include "errors.hpp"

namespace hsk {

namespace {
constexpr uint32_t kWindowMagic = 0x53575348; // "HSWS"
constexpr uint32_t kWindowVersion = 1;
} // namespace

Tracker::Tracker(const TrackerConfig& cfg)
    : cfg_(cfg), tree_(SegTree::build(cfg.key_bits, cfg.leaf_bits, cfg.arity)),
      window_seeds_(cfg.seed) {
    if (cfg_.capacity_n < 1)
        throw ConfigError("tracker: capacity_n must be at least 1");
    if (cfg_.epsilon == 0.0) {
        int k = int(tree_.leaf_count());
        int l = int(tree_.key_bits());
        if (k >= l)
            throw ConfigError("tracker: default epsilon 2^(k-l) degenerates for "
                              "this tree; set epsilon explicitly");
        cfg_.epsilon = std::pow(2.0, double(k - l));
    }
    plan_ = plan_memory(cfg_.capacity_n, cfg_.epsilon, tree_, cfg_.rbf_options);
    if (cfg_.cm_total_buckets == 0)
        cfg_.cm_total_buckets =
            uint64_t(cfg_.cm_depth) *
            CmSketch::width_for_capacity(cfg_.capacity_n, cfg_.cm_depth);
}

void Tracker::open_window() {
    if (window_open())
        throw ConfigError("tracker: a window is already open");
    uint64_t cold_seed = window_seeds_.next();
    uint64_t rbf_seed = window_seeds_.next();
    uint64_t cm_seed = window_seeds_.next();
    cold_.emplace(cfg_.cf_depth, cfg_.cf_width, cfg_.threshold, cold_seed,
                  cfg_.cf_counter_max);
    rbf_.emplace(tree_, plan_, rbf_seed, cfg_.rbf_options.explosion_cap);
    cm_.emplace(CmSketch::from_total_buckets(cfg_.cm_depth, cfg_.cm_total_buckets,
                                             cm_seed, cfg_.cm_mode));
    hs_keys_.clear();
    total_items_ = 0;
}

void Tracker::process(uint64_t key, uint64_t weight) {
    if (!window_open())
        throw ConfigError("tracker: process called with no open window");
    if (weight == 0)
        throw ConfigError("tracker: record weight must be positive");
    if (!tree_.key_in_range(key))
        throw ConfigError("tracker: key has bits above key_bits set");

    uint64_t passes = 0;
    for (uint64_t i = 0; i < weight; ++i)
        if (cold_->offer(key))
            ++passes;
    if (passes > 0) {
        rbf_->insert(key);
        cm_->insert(key, passes);
        hs_keys_.insert(key);
    }
    total_items_ += weight;
}

WindowSnapshot Tracker::close_window() {
    if (!window_open())
        throw ConfigError("tracker: close_window called with no open window");
    WindowSnapshot snap(next_window_id_++, total_items_, hs_keys_.size(),
                        hs_keys_.size() > cfg_.capacity_n, cfg_.capacity_n,
                        std::move(*cold_),
                        HiddenSketch{std::move(*rbf_), std::move(*cm_)});
    cold_.reset();
    rbf_.reset();
    cm_.reset();
    hs_keys_.clear();
    total_items_ = 0;
    return snap;
}

uint64_t Tracker::memory_bits() const {
    uint64_t cold_bits = uint64_t(cfg_.cf_depth) * cfg_.cf_width * 8;
    return cold_bits + plan_.total_bits + cfg_.cm_total_buckets * 64;
}

WindowReport Tracker::heavy_hitters(const WindowSnapshot& snap, uint64_t threshold,
                                    const DecoderConfig& dcfg) {
    WindowReport report;
    report.window_id = snap.window_id;
    report.total_items = snap.total_items;
    report.over_capacity = snap.over_capacity;

    std::vector<uint64_t> candidates = snap.hs.rbf.recover();
    DecodeResult decoded = decode(candidates, snap.hs.cm, dcfg);
    report.status = decoded.status;
    report.diagnostics = decoded.diagnostics;
    if (decoded.status == DecodeStatus::Failed)
        return report; // caller decides the fallback

    uint64_t t = snap.cold.threshold();
    for (const auto& [key, count] : decoded.frequencies) {
        uint64_t reported = count + t;
        report.frequencies[key] = reported;
        if (reported >= threshold)
            report.heavy_hitters[key] = reported;
    }
    return report;
}

std::map<uint64_t, int64_t> Tracker::heavy_changers(const WindowReport& rep1,
                                                    const WindowSnapshot& snap1,
                                                    const WindowReport& rep2,
                                                    const WindowSnapshot& snap2,
                                                    uint64_t delta) {
    if (rep1.status == DecodeStatus::Failed || rep2.status == DecodeStatus::Failed)
        throw Error("heavy changers: a window failed to decode; no partial "
                    "comparison is made");

    auto frequency_in = [](uint64_t key, const WindowReport& rep,
                           const WindowSnapshot& snap) -> uint64_t {
        auto it = rep.frequencies.find(key);
        if (it != rep.frequencies.end())
            return it->second;
        return snap.cold.estimate(key);
    };

    std::map<uint64_t, int64_t> changes;
    auto consider = [&](uint64_t key) {
        if (changes.count(key))
            return;
        uint64_t f1 = frequency_in(key, rep1, snap1);
        uint64_t f2 = frequency_in(key, rep2, snap2);
        int64_t change = int64_t(f2) - int64_t(f1);
        if (change > int64_t(delta) || -change > int64_t(delta))
            changes[key] = change;
    };
    for (const auto& [key, f] : rep1.heavy_hitters)
        consider(key);
    for (const auto& [key, f] : rep2.heavy_hitters)
        consider(key);
    return changes;
}

void WindowSnapshot::save(ByteWriter& w) const {
    w.u32(kWindowMagic);
    w.u32(kWindowVersion);
    w.u64(window_id);
    w.u64(total_items);
    w.u64(distinct_inserted);
    w.u8(over_capacity ? 1 : 0);
    w.u64(capacity_n);
    cold.save(w);
    hs.rbf.save(w);
    hs.cm.save(w);
}

WindowSnapshot WindowSnapshot::load(ByteReader& r) {
    if (r.u32() != kWindowMagic)
        throw IoError("window snapshot: bad magic");
    if (r.u32() != kWindowVersion)
        throw IoError("window snapshot: unsupported version");
    uint64_t id = r.u64();
    uint64_t items = r.u64();
    uint64_t distinct = r.u64();
    bool over = r.u8() != 0;
    uint64_t capacity = r.u64();
    CuFilter cold = CuFilter::load(r);
    Rbf rbf = Rbf::load(r);
    CmSketch cm = CmSketch::load(r);
    return WindowSnapshot(id, items, distinct, over, capacity, std::move(cold),
                          HiddenSketch{std::move(rbf), std::move(cm)});
}

} // namespace hsk
