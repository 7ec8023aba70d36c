#ifndef HSK_TRACKER_HPP
#define HSK_TRACKER_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <unordered_set>

#include "cmsketch.hpp"
#include "coldfilter.hpp"
#include "decoder.hpp"
#include "hash.hpp"
#include "keyspace.hpp"
#include "rbf.hpp"

namespace hsk {

// Stage-2 pair: the RBF stores which keys passed the cold filter, the CM
// sketch stores how often. The two are always inserted in lockstep.
struct HiddenSketch {
    Rbf rbf;
    CmSketch cm;
};

struct TrackerConfig {
    uint32_t key_bits = 32;
    uint32_t leaf_bits = 8;
    uint32_t arity = 2;
    uint64_t capacity_n = 1800;      // design item count for the Hidden Sketch
    double epsilon = 0.0;            // RBF target FPR; 0 means 2^(k-l)
    uint32_t cm_depth = 3;
    uint64_t cm_total_buckets = 0;   // 0 means depth * width_for_capacity
    CmMode cm_mode = CmMode::Prime;
    uint32_t cf_depth = 3;
    uint32_t cf_width = 65536;       // buckets per cold-filter row
    uint32_t cf_counter_max = 255;
    uint32_t threshold = 200;        // cold-filter pass threshold T
    uint64_t seed = 1;
    RbfOptions rbf_options{};
};

// One closed window: the sketch triple plus bookkeeping, ready to decode
// or to persist for a later heavy-changer comparison.
struct WindowSnapshot {
    uint64_t window_id = 0;
    uint64_t total_items = 0;
    uint64_t distinct_inserted = 0; // distinct keys that reached the Hidden Sketch
    bool over_capacity = false;
    uint64_t capacity_n = 0;
    CuFilter cold;
    HiddenSketch hs;

    WindowSnapshot(uint64_t id, uint64_t items, uint64_t distinct, bool over,
                   uint64_t capacity, CuFilter c, HiddenSketch h)
        : window_id(id), total_items(items), distinct_inserted(distinct),
          over_capacity(over), capacity_n(capacity), cold(std::move(c)),
          hs(std::move(h)) {}

    void save(ByteWriter& w) const;
    static WindowSnapshot load(ByteReader& r);
};

struct WindowReport {
    uint64_t window_id = 0;
    uint64_t total_items = 0;
    std::map<uint64_t, uint64_t> heavy_hitters; // key -> reported frequency
    std::map<uint64_t, uint64_t> frequencies;   // every decoded key -> decoded + T
    DecodeStatus status = DecodeStatus::Failed;
    DecodeDiagnostics diagnostics;
    bool over_capacity = false;
};

// Two-stage tracker: a cold filter in front of a Hidden Sketch, with
// non-overlapping windows. Closing a window hands back its sketches;
// opening the next one starts from fresh state.
class Tracker {
public:
    explicit Tracker(const TrackerConfig& cfg);

    const TrackerConfig& config() const { return cfg_; }
    const SegTree& tree() const { return tree_; }

    void open_window();
    bool window_open() const { return cold_.has_value(); }
    uint64_t next_window_id() const { return next_window_id_; }

    // Count `weight` occurrences of key in the open window.
    void process(uint64_t key, uint64_t weight = 1);

    WindowSnapshot close_window();

    uint64_t total_items() const { return total_items_; }
    uint64_t memory_bits() const; // counter and bit arrays of the open window

    // Decode a closed window and keep keys reported at or above threshold.
    // Reported frequency = decoded count + T. A Failed decode yields an
    // empty report carrying the Failed status.
    static WindowReport heavy_hitters(const WindowSnapshot& snap,
                                      uint64_t threshold,
                                      const DecoderConfig& dcfg = {});

    // Signed frequency changes (window 2 minus window 1) with magnitude
    // above delta, over the union of the two heavy-hitter sets. Keys absent
    // from a window's decode fall back to its cold-filter estimate.
    static std::map<uint64_t, int64_t> heavy_changers(
        const WindowReport& rep1, const WindowSnapshot& snap1,
        const WindowReport& rep2, const WindowSnapshot& snap2, uint64_t delta);

private:
    TrackerConfig cfg_;
    SegTree tree_;
    MemoryPlan plan_;
    uint64_t next_window_id_ = 1;
    uint64_t total_items_ = 0;
    std::optional<CuFilter> cold_;
    std::optional<Rbf> rbf_;
    std::optional<CmSketch> cm_;
    std::unordered_set<uint64_t> hs_keys_;
    SeedStream window_seeds_;
};

} // namespace hsk

#endif
