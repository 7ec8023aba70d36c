#include "keyspace.hpp"

#include "errors.hpp"

namespace hsk {

SegTree SegTree::build(uint32_t key_bits, uint32_t leaf_bits, uint32_t arity) {
    if (key_bits == 0 || key_bits > 64)
        throw ConfigError("key_bits must be in [1, 64], got " + std::to_string(key_bits));
    if (leaf_bits == 0 || leaf_bits > 24)
        throw ConfigError("leaf_bits must be in [1, 24], got " + std::to_string(leaf_bits));
    if (key_bits % leaf_bits != 0)
        throw ConfigError("leaf_bits " + std::to_string(leaf_bits) +
                          " does not divide key_bits " + std::to_string(key_bits));
    if (arity < 2)
        throw ConfigError("arity must be at least 2, got " + std::to_string(arity));

    SegTree t;
    t.key_bits_ = key_bits;
    t.leaf_bits_ = leaf_bits;
    t.arity_ = arity;

    uint32_t nleaves = key_bits / leaf_bits;
    for (uint32_t i = 0; i < nleaves; ++i) {
        SegNode n;
        n.bit_offset = i * leaf_bits;
        n.bit_length = leaf_bits;
        t.leaves_.push_back(uint32_t(t.nodes_.size()));
        t.nodes_.push_back(n);
    }

    std::vector<uint32_t> level = t.leaves_;
    while (level.size() > 1) {
        std::vector<uint32_t> next;
        for (size_t i = 0; i < level.size(); i += arity) {
            size_t end = std::min(i + size_t(arity), level.size());
            if (end - i == 1) {             // lone trailing node moves up as-is
                next.push_back(level[i]);
                continue;
            }
            SegNode n;
            const SegNode& first = t.nodes_[level[i]];
            const SegNode& last = t.nodes_[level[end - 1]];
            n.bit_offset = first.bit_offset;
            n.bit_length = last.bit_offset + last.bit_length - first.bit_offset;
            for (size_t j = i; j < end; ++j) n.children.push_back(level[j]);
            uint32_t id = uint32_t(t.nodes_.size());
            t.nodes_.push_back(n);
            t.internals_.push_back(id);
            next.push_back(id);
        }
        level = std::move(next);
    }
    t.root_ = level[0];
    return t;
}

} // namespace hsk
