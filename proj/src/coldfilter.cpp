#include "coldfilter.hpp"

#include <algorithm>
#include <string>

#include "bitio.hpp"
#include "errors.hpp"
#include "hash.hpp"

namespace hsk {

namespace {
constexpr uint32_t kCuMagic = 0x55435348; // "HSCU"
constexpr uint32_t kCuVersion = 1;
} // namespace

CuFilter::CuFilter(uint32_t depth, uint32_t width, uint32_t threshold,
                   uint64_t seed, uint32_t counter_max)
    : depth_(depth), width_(width), threshold_(threshold),
      counter_max_(counter_max), seed_(seed) {
    if (depth == 0 || width == 0)
        throw ConfigError("cold filter: depth and width must be positive");
    if (depth > 64)
        throw ConfigError("cold filter: depth must be at most 64");
    if (counter_max == 0 || counter_max > 255)
        throw ConfigError("cold filter: counter_max must be in [1, 255]");
    if (threshold > counter_max)
        throw ConfigError("cold filter: threshold " + std::to_string(threshold) +
                          " exceeds counter_max " + std::to_string(counter_max));
    SeedStream seeds(seed);
    hash_seeds_.resize(depth);
    for (auto& s : hash_seeds_)
        s = seeds.next();
    counters_.assign(size_t(depth) * width, 0);
}

std::vector<size_t> CuFilter::bucket_indices(uint64_t key) const {
    std::vector<size_t> idx(depth_);
    for (uint32_t r = 0; r < depth_; ++r)
        idx[r] = size_t(r) * width_ + size_t(hash_mix(hash_seeds_[r], key) % width_);
    return idx;
}

bool CuFilter::offer(uint64_t key) {
    size_t idx[64];
    uint32_t low = counter_max_;
    for (uint32_t r = 0; r < depth_; ++r) {
        size_t i = size_t(r) * width_ + size_t(hash_mix(hash_seeds_[r], key) % width_);
        idx[r] = i;
        low = std::min(low, uint32_t(counters_[i]));
    }
    // conservative update: only the minimal buckets move, capped
    if (low < counter_max_) {
        for (uint32_t r = 0; r < depth_; ++r)
            if (counters_[idx[r]] == low)
                counters_[idx[r]] = uint8_t(low + 1);
        ++low;
    }
    return low > threshold_;
}

uint32_t CuFilter::estimate(uint64_t key) const {
    uint32_t low = counter_max_;
    for (uint32_t r = 0; r < depth_; ++r) {
        size_t i = size_t(r) * width_ + size_t(hash_mix(hash_seeds_[r], key) % width_);
        low = std::min(low, uint32_t(counters_[i]));
    }
    return low;
}

void CuFilter::clear() {
    std::fill(counters_.begin(), counters_.end(), 0);
}

void CuFilter::save(ByteWriter& w) const {
    w.u32(kCuMagic);
    w.u32(kCuVersion);
    w.u32(depth_);
    w.u32(width_);
    w.u32(threshold_);
    w.u32(counter_max_);
    w.u64(seed_);
    w.bytes(counters_.data(), counters_.size());
}

CuFilter CuFilter::load(ByteReader& r) {
    if (r.u32() != kCuMagic)
        throw IoError("cold filter image: bad magic");
    if (r.u32() != kCuVersion)
        throw IoError("cold filter image: unsupported version");
    uint32_t depth = r.u32();
    uint32_t width = r.u32();
    uint32_t threshold = r.u32();
    uint32_t counter_max = r.u32();
    uint64_t seed = r.u64();
    CuFilter f(depth, width, threshold, seed, counter_max);
    r.bytes(f.counters_.data(), f.counters_.size());
    return f;
}

} // namespace hsk
