#ifndef HSK_CMSKETCH_HPP
#define HSK_CMSKETCH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "equation.hpp"

namespace hsk {

class ByteWriter;
class ByteReader;

enum class CmMode : uint8_t { Unit = 0, Prime = 1 };

// Count-Min sketch with d disjoint counter arrays. In prime mode every
// update for key e is scaled by a per-key prime p_e, which later lets the
// decoder treat divisibility as evidence when it inverts the counters.
class CmSketch {
public:
    // d arrays of w buckets each (m = d*w).
    CmSketch(uint32_t depth, uint32_t width, uint64_t seed, CmMode mode = CmMode::Unit);

    // m buckets split as evenly as possible across d arrays; the first
    // (m mod d) arrays get one extra bucket. Lets experiments sweep
    // arbitrary totals such as 130.
    static CmSketch from_total_buckets(uint32_t depth, uint64_t total, uint64_t seed,
                                       CmMode mode = CmMode::Unit);

    // Buckets needed per array for n keys at depth d per the decoding
    // constants (d=3 -> 1.222, 4 -> 1.295, 5 -> 1.425): w = ceil(c_d*n/d).
    static uint32_t width_for_capacity(uint64_t n, uint32_t depth);

    void insert(uint64_t key, uint64_t delta = 1);
    uint64_t query(uint64_t key) const;

    EquationSystem to_equation_system(const std::vector<uint64_t>& candidates) const;

    uint32_t depth() const { return depth_; }
    uint64_t total_buckets() const { return counters_.size(); }
    uint32_t row_width(uint32_t row) const { return widths_[row]; }
    CmMode mode() const { return mode_; }
    uint64_t seed() const { return seed_; }
    const std::vector<uint64_t>& counters() const { return counters_; }

    uint64_t prime_for(uint64_t key) const;
    std::vector<uint32_t> bucket_rows(uint64_t key) const; // flattened indices
    uint64_t memory_bits() const { return counters_.size() * 64; }

    void clear();

    void save(ByteWriter& w) const;
    static CmSketch load(ByteReader& r);

private:
    CmSketch() = default;
    void derive_seeds();
    size_t bucket_index(uint32_t row, uint64_t key) const;

    uint32_t depth_ = 0;
    std::vector<uint32_t> widths_;
    std::vector<uint64_t> row_offsets_;
    std::vector<uint64_t> counters_;
    std::vector<uint64_t> hash_seeds_;
    uint64_t prime_hash_seed_ = 0;
    uint64_t seed_ = 0;
    CmMode mode_ = CmMode::Unit;
};

} // namespace hsk

#endif
