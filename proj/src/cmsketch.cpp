#include "cmsketch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bitio.hpp"
#include "errors.hpp"
#include "hash.hpp"
#include "primes.hpp"

namespace hsk {

namespace {
constexpr uint64_t kCounterMax = (uint64_t(1) << 63) - 1;
constexpr uint32_t kMagic = 0x4D435348; // "HSCM"
} // namespace

CmSketch::CmSketch(uint32_t depth, uint32_t width, uint64_t seed, CmMode mode) {
    if (depth == 0) throw ConfigError("cm depth must be positive");
    if (width == 0) throw ConfigError("cm width must be positive");
    depth_ = depth;
    widths_.assign(depth, width);
    seed_ = seed;
    mode_ = mode;
    derive_seeds();
}

CmSketch CmSketch::from_total_buckets(uint32_t depth, uint64_t total, uint64_t seed,
                                      CmMode mode) {
    if (depth == 0) throw ConfigError("cm depth must be positive");
    if (total < depth)
        throw ConfigError("cm needs at least one bucket per array: total " +
                          std::to_string(total) + ", depth " + std::to_string(depth));
    CmSketch sk;
    sk.depth_ = depth;
    uint64_t base = total / depth;
    uint64_t extra = total % depth;
    for (uint32_t r = 0; r < depth; ++r)
        sk.widths_.push_back(uint32_t(base + (r < extra ? 1 : 0)));
    sk.seed_ = seed;
    sk.mode_ = mode;
    sk.derive_seeds();
    return sk;
}

uint32_t CmSketch::width_for_capacity(uint64_t n, uint32_t depth) {
    double c;
    switch (depth) {
        case 3: c = 1.222; break;
        case 4: c = 1.295; break;
        case 5: c = 1.425; break;
        default:
            throw ConfigError("no decoding constant for cm depth " + std::to_string(depth) +
                              " (supported: 3, 4, 5)");
    }
    return uint32_t(std::ceil(c * double(n) / double(depth)));
}

void CmSketch::derive_seeds() {
    SeedStream ss(seed_);
    hash_seeds_.clear();
    for (uint32_t r = 0; r < depth_; ++r) hash_seeds_.push_back(ss.next());
    prime_hash_seed_ = ss.next();
    row_offsets_.clear();
    uint64_t off = 0;
    for (uint32_t r = 0; r < depth_; ++r) {
        row_offsets_.push_back(off);
        off += widths_[r];
    }
    counters_.assign(off, 0);
}

size_t CmSketch::bucket_index(uint32_t row, uint64_t key) const {
    return size_t(row_offsets_[row] + hash_mix(hash_seeds_[row], key) % widths_[row]);
}

uint64_t CmSketch::prime_for(uint64_t key) const {
    const auto& table = prime_table_256();
    return table[hash_mix(prime_hash_seed_, key) % table.size()];
}

std::vector<uint32_t> CmSketch::bucket_rows(uint64_t key) const {
    std::vector<uint32_t> rows;
    rows.reserve(depth_);
    for (uint32_t r = 0; r < depth_; ++r) rows.push_back(uint32_t(bucket_index(r, key)));
    return rows;
}

void CmSketch::insert(uint64_t key, uint64_t delta) {
    if (delta == 0) throw ConfigError("cm insert delta must be positive");
    uint64_t add = delta;
    if (mode_ == CmMode::Prime) {
        uint64_t p = prime_for(key);
        if (delta > kCounterMax / p)
            throw OverflowError("cm increment " + std::to_string(delta) + " * prime " +
                                std::to_string(p) + " exceeds counter range");
        add = delta * p;
    }
    for (uint32_t r = 0; r < depth_; ++r) {
        uint64_t& c = counters_[bucket_index(r, key)];
        if (c > kCounterMax - add)
            throw OverflowError("cm counter overflow at row " + std::to_string(r));
        c += add;
    }
}

uint64_t CmSketch::query(uint64_t key) const {
    uint64_t m = std::numeric_limits<uint64_t>::max();
    for (uint32_t r = 0; r < depth_; ++r)
        m = std::min(m, counters_[bucket_index(r, key)]);
    if (mode_ == CmMode::Prime) m /= prime_for(key);
    return m;
}

EquationSystem CmSketch::to_equation_system(const std::vector<uint64_t>& candidates) const {
    EquationSystem sys;
    sys.n_rows = uint32_t(counters_.size());
    sys.columns = candidates;
    std::sort(sys.columns.begin(), sys.columns.end());
    sys.columns.erase(std::unique(sys.columns.begin(), sys.columns.end()), sys.columns.end());
    sys.coeffs.reserve(sys.columns.size());
    sys.col_rows.reserve(sys.columns.size());
    for (uint64_t key : sys.columns) {
        sys.coeffs.push_back(mode_ == CmMode::Prime ? prime_for(key) : 1);
        sys.col_rows.push_back(bucket_rows(key));
    }
    sys.rhs.assign(counters_.begin(), counters_.end());
    return sys;
}

void CmSketch::clear() {
    std::fill(counters_.begin(), counters_.end(), 0);
}

void CmSketch::save(ByteWriter& w) const {
    w.u32(kMagic);
    w.u32(1);
    w.u8(uint8_t(mode_));
    w.u32(depth_);
    w.u64(counters_.size());
    w.u64(seed_);
    for (uint64_t c : counters_) w.u64(c);
}

CmSketch CmSketch::load(ByteReader& r) {
    if (r.u32() != kMagic) throw IoError("bad cm sketch magic");
    uint32_t version = r.u32();
    if (version != 1) throw IoError("unsupported cm sketch version " + std::to_string(version));
    CmMode mode = CmMode(r.u8());
    uint32_t depth = r.u32();
    uint64_t total = r.u64();
    uint64_t seed = r.u64();
    CmSketch sk = from_total_buckets(depth, total, seed, mode);
    for (uint64_t& c : sk.counters_) c = r.u64();
    return sk;
}

} // namespace hsk
