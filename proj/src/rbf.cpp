#include "rbf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"
#include "hash.hpp"

namespace hsk {

namespace {

constexpr uint32_t kRbfMagic = 0x42525348; // "HSRB"
constexpr uint32_t kRbfVersion = 1;
const double kLn2 = std::log(2.0);

} // namespace

uint64_t bloom_bits(uint64_t n, double eps) {
    double m = -double(n) * std::log(eps) / (kLn2 * kLn2);
    uint64_t bits = uint64_t(std::ceil(m));
    return bits == 0 ? 1 : bits;
}

uint32_t bloom_hashes(double eps) {
    double k = -std::log(eps) / kLn2;
    long rounded = std::lround(k);
    if (rounded > 64)
        throw ConfigError("bloom filter needs " + std::to_string(rounded) +
                          " hashes per key; the limit is 64 (epsilon too small)");
    return rounded < 1 ? 1 : uint32_t(rounded);
}

MemoryPlan plan_memory(uint64_t n, double epsilon, const SegTree& tree,
                       const RbfOptions& opts) {
    if (n < 1)
        throw ConfigError("plan_memory: capacity n must be at least 1");
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw ConfigError("plan_memory: epsilon must lie in (0, 1)");

    MemoryPlan plan;
    plan.capacity_n = n;
    plan.target_fpr = epsilon;

    double w = double(tree.leaf_space());
    plan.block_count = uint32_t(std::ceil(double(n) / (w * kLn2)));
    if (plan.block_count == 0)
        plan.block_count = 1;
    plan.total_bits =
        uint64_t(plan.block_count) * tree.leaf_count() * tree.leaf_space();

    std::vector<uint32_t> filtered = tree.internals();
    if (!opts.root_filter && !filtered.empty())
        filtered.pop_back(); // root is last in bottom-up order

    if (!opts.internal_weights.empty() &&
        opts.internal_weights.size() != filtered.size())
        throw ConfigError("plan_memory: internal_weights must give one weight per "
                          "filtered internal node (" +
                          std::to_string(filtered.size()) + " expected)");

    double weight_sum = 0.0;
    for (size_t i = 0; i < filtered.size(); ++i) {
        double wt = opts.internal_weights.empty() ? 1.0 : opts.internal_weights[i];
        if (!(wt > 0.0))
            throw ConfigError("plan_memory: internal_weights must be positive");
        weight_sum += wt;
    }

    for (size_t i = 0; i < filtered.size(); ++i) {
        double wt = opts.internal_weights.empty() ? 1.0 : opts.internal_weights[i];
        // Splitting the bit budget in ratio wt/weight_sum is the same as
        // assigning the node a share eps^(wt/weight_sum) of the FPR budget.
        double eps_node = std::pow(epsilon, wt / weight_sum);
        uint32_t node_id = filtered[i];
        plan.per_node_bits[node_id] = bloom_bits(n, eps_node);
        plan.per_node_hashes[node_id] = bloom_hashes(eps_node);
        plan.total_bits += plan.per_node_bits[node_id];
    }
    return plan;
}

NodeBloomFilter::NodeBloomFilter(uint32_t node_id, uint64_t bits,
                                 uint32_t num_hashes,
                                 const std::vector<uint64_t>& seeds)
    : node_id_(node_id), num_hashes_(num_hashes), seeds_(seeds),
      bits_(size_t(bits)) {
    if (bits == 0 || num_hashes == 0 || seeds.size() != num_hashes)
        throw ConfigError("node bloom filter: bad size, hash count, or seeds");
}

void NodeBloomFilter::insert(uint64_t segment) {
    for (uint32_t j = 0; j < num_hashes_; ++j)
        bits_.set(size_t(hash_mix(seeds_[j], segment) % bits_.size()));
}

bool NodeBloomFilter::contains(uint64_t segment) const {
    for (uint32_t j = 0; j < num_hashes_; ++j)
        if (!bits_.test(size_t(hash_mix(seeds_[j], segment) % bits_.size())))
            return false;
    return true;
}

Rbf::Rbf(const SegTree& tree, const MemoryPlan& plan, uint64_t seed,
         uint64_t explosion_cap)
    : tree_(tree), plan_(plan), seed_(seed), explosion_cap_(explosion_cap) {
    if (plan.block_count == 0)
        throw ConfigError("rbf: plan has zero blocks");

    SeedStream seeds(seed);
    block_hash_seed_ = seeds.next();

    blocks_ = BitArray(size_t(plan.block_count) * tree_.leaf_count() *
                       tree_.leaf_space());

    for (uint32_t node_id : tree_.internals()) {
        auto bits_it = plan_.per_node_bits.find(node_id);
        if (bits_it == plan_.per_node_bits.end())
            continue; // planned without a filter for this node
        uint32_t hashes = plan_.per_node_hashes.at(node_id);
        std::vector<uint64_t> node_seeds(hashes);
        for (auto& s : node_seeds)
            s = seeds.next();
        filter_of_node_[node_id] = uint32_t(filters_.size());
        filters_.emplace_back(node_id, bits_it->second, hashes, node_seeds);
    }

    const auto& leaves = tree_.leaves();
    for (uint32_t i = 0; i < leaves.size(); ++i)
        leaf_ordinal_[leaves[i]] = i;
}

uint32_t Rbf::block_of(uint64_t key) const {
    return uint32_t(hash_mix(block_hash_seed_, key) % plan_.block_count);
}

size_t Rbf::leaf_bit_index(uint32_t block, uint32_t leaf_ordinal,
                           uint64_t segment) const {
    return size_t((uint64_t(block) * tree_.leaf_count() + leaf_ordinal) *
                      tree_.leaf_space() +
                  segment);
}

void Rbf::insert(uint64_t key) {
    if (!tree_.key_in_range(key))
        throw ConfigError("rbf insert: key has bits above key_bits set");
    uint32_t block = block_of(key);
    const auto& leaves = tree_.leaves();
    for (uint32_t i = 0; i < leaves.size(); ++i)
        blocks_.set(leaf_bit_index(block, i, tree_.segment(key, leaves[i])));
    for (auto& f : filters_)
        f.insert(tree_.segment(key, f.node_id()));
}

bool Rbf::contains(uint64_t key) const {
    if (!tree_.key_in_range(key))
        throw ConfigError("rbf contains: key has bits above key_bits set");
    uint32_t block = block_of(key);
    const auto& leaves = tree_.leaves();
    for (uint32_t i = 0; i < leaves.size(); ++i)
        if (!blocks_.test(leaf_bit_index(block, i, tree_.segment(key, leaves[i]))))
            return false;
    for (const auto& f : filters_)
        if (!f.contains(tree_.segment(key, f.node_id())))
            return false;
    return true;
}

std::vector<uint64_t> Rbf::node_candidates(
    uint32_t node_id, const std::vector<std::vector<uint64_t>>& leaf_cands) const {
    const SegNode& n = tree_.node(node_id);
    if (n.is_leaf())
        return leaf_cands[leaf_ordinal_.at(node_id)];

    std::vector<std::vector<uint64_t>> child_cands;
    child_cands.reserve(n.children.size());
    unsigned __int128 product = 1;
    for (uint32_t child : n.children) {
        child_cands.push_back(node_candidates(child, leaf_cands));
        product *= child_cands.back().size();
        if (product == 0)
            return {};
    }
    if (product > explosion_cap_)
        throw ExplosionError(
            "recovery candidate product at node " + std::to_string(node_id) +
            " has " + std::to_string(uint64_t(std::min<unsigned __int128>(
                          product, ~uint64_t(0)))) +
            " entries; cap is " + std::to_string(explosion_cap_));

    // Full Cartesian product of the children, left child most significant,
    // then one membership filter pass over the assembled segments.
    std::vector<uint64_t> combined;
    combined.reserve(size_t(product));
    std::vector<size_t> idx(n.children.size(), 0);
    for (;;) {
        uint64_t value = 0;
        for (size_t c = 0; c < idx.size(); ++c) {
            const SegNode& cn = tree_.node(n.children[c]);
            value = (value << cn.bit_length) | child_cands[c][idx[c]];
        }
        combined.push_back(value);
        size_t c = idx.size();
        while (c > 0) {
            --c;
            if (++idx[c] < child_cands[c].size())
                break;
            idx[c] = 0;
            if (c == 0)
                goto done;
        }
    }
done:
    auto it = filter_of_node_.find(node_id);
    if (it != filter_of_node_.end()) {
        const NodeBloomFilter& f = filters_[it->second];
        std::erase_if(combined, [&](uint64_t v) { return !f.contains(v); });
    }
    return combined;
}

std::vector<uint64_t> Rbf::recover() const {
    std::vector<uint64_t> out;
    uint32_t k = tree_.leaf_count();
    uint64_t w = tree_.leaf_space();
    std::vector<std::vector<uint64_t>> leaf_cands(k);
    for (uint32_t block = 0; block < plan_.block_count; ++block) {
        for (uint32_t i = 0; i < k; ++i) {
            leaf_cands[i].clear();
            for (uint64_t seg = 0; seg < w; ++seg)
                if (blocks_.test(leaf_bit_index(block, i, seg)))
                    leaf_cands[i].push_back(seg);
        }
        for (uint64_t key : node_candidates(tree_.root(), leaf_cands))
            if (block_of(key) == block)
                out.push_back(key);
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool Rbf::bit_subset_of(const Rbf& other) const {
    if (filters_.size() != other.filters_.size())
        return false;
    if (!blocks_.subset_of(other.blocks_))
        return false;
    for (size_t i = 0; i < filters_.size(); ++i)
        if (!filters_[i].bits().subset_of(other.filters_[i].bits()))
            return false;
    return true;
}

void Rbf::clear() {
    blocks_.clear();
    for (auto& f : filters_)
        f.bits().clear();
}

void Rbf::save(ByteWriter& w) const {
    w.u32(kRbfMagic);
    w.u32(kRbfVersion);
    w.u32(tree_.key_bits());
    w.u32(tree_.leaf_bits());
    w.u32(tree_.arity());
    w.u64(plan_.capacity_n);
    w.f64(plan_.target_fpr);
    w.u32(plan_.block_count);
    w.u64(seed_);
    w.u64(explosion_cap_);
    w.u32(uint32_t(filters_.size()));
    for (const auto& f : filters_) {
        w.u32(f.node_id());
        w.u64(f.size_bits());
        w.u32(f.num_hashes());
    }
    w.bits(blocks_);
    for (const auto& f : filters_)
        w.bits(f.bits());
}

Rbf Rbf::load(ByteReader& r) {
    if (r.u32() != kRbfMagic)
        throw IoError("rbf image: bad magic");
    if (r.u32() != kRbfVersion)
        throw IoError("rbf image: unsupported version");
    uint32_t key_bits = r.u32();
    uint32_t leaf_bits = r.u32();
    uint32_t arity = r.u32();
    SegTree tree = SegTree::build(key_bits, leaf_bits, arity);

    MemoryPlan plan;
    plan.capacity_n = r.u64();
    plan.target_fpr = r.f64();
    plan.block_count = r.u32();
    uint64_t seed = r.u64();
    uint64_t cap = r.u64();
    uint32_t filter_count = r.u32();
    plan.total_bits =
        uint64_t(plan.block_count) * tree.leaf_count() * tree.leaf_space();
    for (uint32_t i = 0; i < filter_count; ++i) {
        uint32_t node_id = r.u32();
        uint64_t bits = r.u64();
        uint32_t hashes = r.u32();
        plan.per_node_bits[node_id] = bits;
        plan.per_node_hashes[node_id] = hashes;
        plan.total_bits += bits;
    }

    Rbf rbf(tree, plan, seed, cap);
    BitArray blocks = r.bits();
    if (blocks.size() != rbf.blocks_.size())
        throw IoError("rbf image: block bitmap size mismatch");
    rbf.blocks_ = std::move(blocks);
    for (auto& f : rbf.filters_) {
        BitArray bits = r.bits();
        if (bits.size() != f.size_bits())
            throw IoError("rbf image: node filter size mismatch");
        f.bits() = std::move(bits);
    }
    return rbf;
}

} // namespace hsk
