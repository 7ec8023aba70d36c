#ifndef HSK_RBF_HPP
#define HSK_RBF_HPP

#include <cstdint>
#include <map>
#include <vector>

#include "bitio.hpp"
#include "keyspace.hpp"

namespace hsk {

struct MemoryPlan {
    uint64_t capacity_n = 0;
    double target_fpr = 0.0;
    uint32_t block_count = 0;
    std::map<uint32_t, uint64_t> per_node_bits;   // internal node id -> filter bits
    std::map<uint32_t, uint32_t> per_node_hashes; // internal node id -> hash count
    uint64_t total_bits = 0;                      // block bits + filter bits
};

struct RbfOptions {
    bool root_filter = true;                // Fig. 1 keeps one; droppable since the
                                            // block hash already screens whole keys
    std::vector<double> internal_weights;   // bit-split ratios, tree.internals() order
    uint64_t explosion_cap = uint64_t(1) << 22; // max Cartesian-product entries
};

// Bits for a Bloom filter holding n keys at false-positive rate eps
// (m = -n ln eps / ln^2 2) and its optimal hash count (k = -log2 eps).
uint64_t bloom_bits(uint64_t n, double eps);
uint32_t bloom_hashes(double eps);

MemoryPlan plan_memory(uint64_t n, double epsilon, const SegTree& tree,
                       const RbfOptions& opts = {});

// Per-internal-node Bloom filter over that node's key segment.
class NodeBloomFilter {
public:
    NodeBloomFilter(uint32_t node_id, uint64_t bits, uint32_t num_hashes,
                    const std::vector<uint64_t>& seeds);

    void insert(uint64_t segment);
    bool contains(uint64_t segment) const;

    uint32_t node_id() const { return node_id_; }
    uint64_t size_bits() const { return bits_.size(); }
    uint32_t num_hashes() const { return num_hashes_; }
    const BitArray& bits() const { return bits_; }
    BitArray& bits() { return bits_; }

private:
    uint32_t node_id_;
    uint32_t num_hashes_;
    std::vector<uint64_t> seeds_;
    BitArray bits_;
};

// Reversible Bloom filter: a bitmap block array stores leaf segments
// implicitly, one Bloom filter per internal tree node prunes recombination.
class Rbf {
public:
    Rbf(const SegTree& tree, const MemoryPlan& plan, uint64_t seed,
        uint64_t explosion_cap = uint64_t(1) << 22);

    void insert(uint64_t key);
    bool contains(uint64_t key) const;

    // All keys the filter claims to hold: exactly { key : contains(key) },
    // found bottom-up per block without scanning the keyspace.
    std::vector<uint64_t> recover() const;

    const SegTree& tree() const { return tree_; }
    const MemoryPlan& plan() const { return plan_; }
    uint32_t block_count() const { return plan_.block_count; }
    uint64_t memory_bits() const { return plan_.total_bits; }
    uint64_t seed() const { return seed_; }
    uint32_t block_of(uint64_t key) const;

    uint64_t explosion_cap() const { return explosion_cap_; }
    void set_explosion_cap(uint64_t cap) { explosion_cap_ = cap; }

    const BitArray& block_bits() const { return blocks_; }
    const std::vector<NodeBloomFilter>& node_filters() const { return filters_; }
    bool bit_subset_of(const Rbf& other) const;

    void clear();

    void save(ByteWriter& w) const;
    static Rbf load(ByteReader& r);

private:
    size_t leaf_bit_index(uint32_t block, uint32_t leaf_ordinal, uint64_t segment) const;
    std::vector<uint64_t> node_candidates(
        uint32_t node_id, const std::vector<std::vector<uint64_t>>& leaf_cands) const;

    SegTree tree_;
    MemoryPlan plan_;
    uint64_t seed_ = 0;
    uint64_t explosion_cap_;
    uint64_t block_hash_seed_ = 0;
    BitArray blocks_;                      // B * k bitmaps of W bits each
    std::vector<NodeBloomFilter> filters_; // tree.internals() order, per plan
    std::map<uint32_t, uint32_t> filter_of_node_;
    std::map<uint32_t, uint32_t> leaf_ordinal_;
};

} // namespace hsk

#endif
