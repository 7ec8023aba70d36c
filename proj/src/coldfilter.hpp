#ifndef HSK_COLDFILTER_HPP
#define HSK_COLDFILTER_HPP

#include <cstdint>
#include <vector>

namespace hsk {

class ByteWriter;
class ByteReader;

// Stage-1 CU sketch with small saturating counters. Items pass through to
// the main sketch once their estimate exceeds the filtering threshold.
class CuFilter {
public:
    CuFilter(uint32_t depth, uint32_t width, uint32_t threshold, uint64_t seed,
             uint32_t counter_max = 255);

    // Count one occurrence: increment the minimal buckets (saturating).
    // Returns true iff the post-increment minimum exceeds the threshold,
    // i.e. the item should also go to the main sketch.
    bool offer(uint64_t key);

    // Min of the item's buckets (CM-style read of the CU structure).
    uint32_t estimate(uint64_t key) const;

    std::vector<size_t> bucket_indices(uint64_t key) const;

    uint32_t depth() const { return depth_; }
    uint32_t width() const { return width_; }
    uint32_t threshold() const { return threshold_; }
    uint32_t counter_max() const { return counter_max_; }
    uint64_t seed() const { return seed_; }
    uint64_t memory_bits() const { return uint64_t(counters_.size()) * 8; }
    const std::vector<uint8_t>& counters() const { return counters_; }

    void clear();

    void save(ByteWriter& w) const;
    static CuFilter load(ByteReader& r);

private:
    uint32_t depth_ = 0;
    uint32_t width_ = 0;
    uint32_t threshold_ = 0;
    uint32_t counter_max_ = 255;
    uint64_t seed_ = 0;
    std::vector<uint64_t> hash_seeds_;
    std::vector<uint8_t> counters_; // depth rows of width bytes
};

} // namespace hsk

#endif
