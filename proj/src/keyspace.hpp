#ifndef HSK_KEYSPACE_HPP
#define HSK_KEYSPACE_HPP

#include <cstdint>
#include <vector>

namespace hsk {

// Keys are unsigned integers of at most 64 bits, read big-endian: the
// first (leftmost) segment holds the most significant bits, so a 32-bit
// IPv4 key a.b.c.d has leaf segments [a, b, c, d].

struct SegNode {
    uint32_t bit_offset = 0;            // offset of the segment within the key
    uint32_t bit_length = 0;
    std::vector<uint32_t> children;     // node indices; empty for leaves
    bool is_leaf() const { return children.empty(); }
};

// Hierarchical segmentation of the key. Leaves partition the key into
// equal-width base segments; each internal node covers the contiguous
// concatenation of its children. The sole node of a one-segment tree is
// both root and leaf.
class SegTree {
public:
    // leaf count = key_bits / leaf_bits; when it is not a power of
    // arity the tree leans left (the last group at each level may be
    // smaller, a group of one passes through unchanged).
    static SegTree build(uint32_t key_bits, uint32_t leaf_bits, uint32_t arity = 2);

    uint32_t key_bits() const { return key_bits_; }
    uint32_t leaf_bits() const { return leaf_bits_; }
    uint32_t arity() const { return arity_; }
    uint32_t leaf_count() const { return uint32_t(leaves_.size()); }
    uint64_t leaf_space() const { return uint64_t(1) << leaf_bits_; } // W = 2^(l/k)

    const std::vector<SegNode>& nodes() const { return nodes_; }
    const SegNode& node(uint32_t id) const { return nodes_[id]; }
    uint32_t root() const { return root_; }

    // Leaf ids in key order; internal ids bottom-up (root last).
    const std::vector<uint32_t>& leaves() const { return leaves_; }
    const std::vector<uint32_t>& internals() const { return internals_; }

    uint64_t key_mask() const {
        return key_bits_ == 64 ? ~uint64_t(0) : (uint64_t(1) << key_bits_) - 1;
    }
    bool key_in_range(uint64_t key) const { return (key & ~key_mask()) == 0; }

    // Integer value of the key's bits within the node's range.
    uint64_t segment(uint64_t key, const SegNode& n) const {
        uint64_t shifted = key >> (key_bits_ - n.bit_offset - n.bit_length);
        return n.bit_length == 64 ? shifted : shifted & ((uint64_t(1) << n.bit_length) - 1);
    }
    uint64_t segment(uint64_t key, uint32_t node_id) const {
        return segment(key, nodes_[node_id]);
    }

private:
    uint32_t key_bits_ = 0;
    uint32_t leaf_bits_ = 0;
    uint32_t arity_ = 0;
    uint32_t root_ = 0;
    std::vector<SegNode> nodes_;
    std::vector<uint32_t> leaves_;
    std::vector<uint32_t> internals_;
};

} // namespace hsk

#endif
