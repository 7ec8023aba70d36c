#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <unordered_set>

#include "doctest.h"

#include "bitio.hpp"
#include "errors.hpp"
#include "keyspace.hpp"
#include "rbf.hpp"

using namespace hsk;

namespace {

std::vector<uint64_t> scan_keyspace(const Rbf& rbf) {
    std::vector<uint64_t> hits;
    uint64_t space = uint64_t(1) << rbf.tree().key_bits();
    REQUIRE(space <= (uint64_t(1) << 20));
    for (uint64_t key = 0; key < space; ++key)
        if (rbf.contains(key))
            hits.push_back(key);
    return hits;
}

const NodeBloomFilter& filter_covering(const Rbf& rbf, uint32_t bit_offset,
                                       uint32_t bit_length) {
    for (const auto& f : rbf.node_filters()) {
        const SegNode& n = rbf.tree().node(f.node_id());
        if (n.bit_offset == bit_offset && n.bit_length == bit_length)
            return f;
    }
    REQUIRE(false);
    return rbf.node_filters().front();
}

} // namespace

TEST_CASE("bloom sizing matches the closed forms") {
    // n=1000 at a per-node rate of 2^-10 needs about 1.44 * 1000 * 10 bits
    // and 10 hash functions.
    CHECK(bloom_bits(1000, std::pow(2.0, -10)) == 14427);
    CHECK(bloom_hashes(std::pow(2.0, -10)) == 10);
    CHECK(bloom_hashes(0.5) == 1);
    CHECK(bloom_hashes(0.9) == 1); // rounds to zero, clamped
    CHECK_THROWS_AS(bloom_hashes(1e-300), ConfigError);
}

TEST_CASE("plan_memory block count follows ceil(n / (W ln 2))") {
    SegTree tree = SegTree::build(32, 8, 2);
    MemoryPlan plan = plan_memory(1800, std::pow(2.0, -28), tree);
    CHECK(plan.block_count == 11); // ceil(1800 / (256 * 0.6931)) = 11
    CHECK(plan.capacity_n == 1800);

    uint64_t block_bits = uint64_t(plan.block_count) * 4 * 256;
    uint64_t filter_bits = 0;
    for (auto& [node, bits] : plan.per_node_bits)
        filter_bits += bits;
    CHECK(plan.total_bits == block_bits + filter_bits);
    CHECK(plan.per_node_bits.size() == 3); // two pair nodes and the root
}

TEST_CASE("plan_memory splits the filter budget equally by default") {
    SegTree tree = SegTree::build(32, 8, 2);
    MemoryPlan plan = plan_memory(1000, std::pow(2.0, -9), tree);
    // eps_node = 2^-3 per node: 1000 * 3 * ln2 / ln^2(2) = 4328.1 -> 4329
    for (auto& [node, bits] : plan.per_node_bits)
        CHECK(bits == 4329);
    for (auto& [node, hashes] : plan.per_node_hashes)
        CHECK(hashes == 3);
}

TEST_CASE("plan_memory honors custom split weights and root toggle") {
    SegTree tree = SegTree::build(32, 8, 2);

    RbfOptions opts;
    opts.internal_weights = {2.0, 1.0, 1.0};
    MemoryPlan plan = plan_memory(1000, std::pow(2.0, -16), tree, opts);
    const auto& internals = tree.internals();
    uint64_t heavy = plan.per_node_bits.at(internals[0]);
    uint64_t light = plan.per_node_bits.at(internals[1]);
    CHECK(heavy > light);
    CHECK(std::abs(double(heavy) / double(light) - 2.0) < 0.01);

    RbfOptions no_root;
    no_root.root_filter = false;
    MemoryPlan plan2 = plan_memory(1000, std::pow(2.0, -16), tree, no_root);
    CHECK(plan2.per_node_bits.size() == 2);
    CHECK(plan2.per_node_bits.count(tree.root()) == 0);

    RbfOptions bad;
    bad.internal_weights = {1.0};
    CHECK_THROWS_AS(plan_memory(1000, 0.01, tree, bad), ConfigError);
    bad.internal_weights = {1.0, -1.0, 1.0};
    CHECK_THROWS_AS(plan_memory(1000, 0.01, tree, bad), ConfigError);
}

TEST_CASE("plan_memory rejects bad parameters") {
    SegTree tree = SegTree::build(32, 8, 2);
    CHECK_THROWS_AS(plan_memory(0, 0.01, tree), ConfigError);
    CHECK_THROWS_AS(plan_memory(100, 0.0, tree), ConfigError);
    CHECK_THROWS_AS(plan_memory(100, 1.0, tree), ConfigError);
    // eps so small the per-node hash count would exceed 64
    CHECK_THROWS_AS(plan_memory(100, 1e-300, tree), ConfigError);
}

TEST_CASE("planned totals stay within 1.05x of 1.44 n l") {
    SegTree tree = SegTree::build(32, 4, 2);
    double eps = std::pow(2.0, -24.0); // 2^(k - l) with k=8 segments, l=32
    for (uint64_t n : {uint64_t(100), uint64_t(1800), uint64_t(10000)}) {
        MemoryPlan plan = plan_memory(n, eps, tree);
        double bound = 1.05 * 1.44 * double(n) * 32.0;
        CHECK(double(plan.total_bits) <= bound);
    }
}

TEST_CASE("insert places segments in the documented locations") {
    SegTree tree = SegTree::build(32, 8, 2);
    MemoryPlan plan = plan_memory(100, std::pow(2.0, -12), tree);
    Rbf rbf(tree, plan, 42);

    uint64_t key = (uint64_t(192) << 24) | (168 << 16) | (133 << 8) | 1;
    rbf.insert(key);

    uint32_t block = rbf.block_of(key);
    uint64_t segs[4] = {192, 168, 133, 1};
    const BitArray& bits = rbf.block_bits();
    for (uint32_t i = 0; i < 4; ++i) {
        size_t idx = size_t((uint64_t(block) * 4 + i) * 256 + segs[i]);
        CHECK(bits.test(idx));
    }
    // exactly one bit per leaf bitmap of the touched block
    CHECK(bits.popcount() == 4);

    CHECK(filter_covering(rbf, 0, 16).contains(0xC0A8));
    CHECK(filter_covering(rbf, 16, 16).contains(0x8501));
    CHECK(filter_covering(rbf, 0, 32).contains(key));
    CHECK(rbf.contains(key));
}

TEST_CASE("insert is idempotent") {
    SegTree tree = SegTree::build(32, 8, 2);
    MemoryPlan plan = plan_memory(100, std::pow(2.0, -12), tree);
    Rbf rbf(tree, plan, 7);

    std::mt19937_64 rng(11);
    std::vector<uint64_t> keys;
    for (int i = 0; i < 50; ++i)
        keys.push_back(rng() & tree.key_mask());
    for (uint64_t k : keys)
        rbf.insert(k);

    BitArray blocks_before = rbf.block_bits();
    std::vector<BitArray> filters_before;
    for (const auto& f : rbf.node_filters())
        filters_before.push_back(f.bits());

    for (uint64_t k : keys)
        rbf.insert(k);

    CHECK(rbf.block_bits() == blocks_before);
    for (size_t i = 0; i < filters_before.size(); ++i)
        CHECK(rbf.node_filters()[i].bits() == filters_before[i]);
}

TEST_CASE("contains has no false negatives and rejects out-of-range keys") {
    SegTree tree = SegTree::build(32, 8, 2);
    MemoryPlan plan = plan_memory(5000, std::pow(2.0, -8), tree);
    Rbf rbf(tree, plan, 99);

    std::mt19937_64 rng(123);
    std::vector<uint64_t> keys;
    for (int i = 0; i < 5000; ++i)
        keys.push_back(rng() & tree.key_mask());
    for (uint64_t k : keys)
        rbf.insert(k);
    for (uint64_t k : keys)
        CHECK(rbf.contains(k));

    CHECK_THROWS_AS(rbf.contains(uint64_t(1) << 32), ConfigError);
    CHECK_THROWS_AS(rbf.insert(uint64_t(1) << 32), ConfigError);
}

TEST_CASE("empty filter answers false everywhere and recovers nothing") {
    SegTree tree = SegTree::build(16, 8, 2);
    MemoryPlan plan = plan_memory(50, std::pow(2.0, -14), tree);
    Rbf rbf(tree, plan, 1);

    std::mt19937_64 rng(5);
    for (int i = 0; i < 1000; ++i)
        CHECK_FALSE(rbf.contains(rng() & tree.key_mask()));
    CHECK(rbf.recover().empty());
}

TEST_CASE("single inserted key recovers exactly") {
    SegTree tree = SegTree::build(32, 8, 2);
    MemoryPlan plan = plan_memory(100, std::pow(2.0, -12), tree);
    Rbf rbf(tree, plan, 3);
    uint64_t key = (uint64_t(192) << 24) | (168 << 16) | (133 << 8) | 1;
    rbf.insert(key);
    CHECK(rbf.recover() == std::vector<uint64_t>{key});
}

TEST_CASE("recover equals an exhaustive membership scan") {
    // 16-bit keyspace: every key can be checked directly, so recover()
    // must reproduce the scan exactly, false positives included.
    SegTree tree = SegTree::build(16, 8, 2);
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        MemoryPlan plan = plan_memory(50, std::pow(2.0, -14), tree);
        Rbf rbf(tree, plan, rng());
        std::set<uint64_t> inserted;
        for (int i = 0; i < 50; ++i) {
            uint64_t k = rng() & tree.key_mask();
            inserted.insert(k);
            rbf.insert(k);
        }
        std::vector<uint64_t> recovered = rbf.recover();
        CHECK(recovered == scan_keyspace(rbf));
        CHECK(std::includes(recovered.begin(), recovered.end(),
                            inserted.begin(), inserted.end()));
    }
}

TEST_CASE("recover handles a single-segment tree") {
    SegTree tree = SegTree::build(8, 8, 2);
    MemoryPlan plan = plan_memory(10, 0.01, tree);
    CHECK(plan.per_node_bits.empty()); // no internal nodes, no filters
    Rbf rbf(tree, plan, 17);
    std::mt19937_64 rng(6);
    std::set<uint64_t> inserted;
    for (int i = 0; i < 10; ++i) {
        uint64_t k = rng() & tree.key_mask();
        inserted.insert(k);
        rbf.insert(k);
    }
    std::vector<uint64_t> recovered = rbf.recover();
    CHECK(recovered == scan_keyspace(rbf));
    CHECK(std::includes(recovered.begin(), recovered.end(), inserted.begin(),
                        inserted.end()));
}

TEST_CASE("bit monotonicity implies recovery monotonicity") {
    SegTree tree = SegTree::build(16, 8, 2);
    MemoryPlan plan = plan_memory(60, std::pow(2.0, -14), tree);
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        uint64_t seed = rng();
        Rbf small(tree, plan, seed);
        Rbf big(tree, plan, seed);
        for (int i = 0; i < 40; ++i) {
            uint64_t k = rng() & tree.key_mask();
            big.insert(k);
            if (i < 20)
                small.insert(k);
        }
        CHECK(small.bit_subset_of(big));
        std::vector<uint64_t> rs = small.recover();
        std::vector<uint64_t> rb = big.recover();
        CHECK(std::includes(rb.begin(), rb.end(), rs.begin(), rs.end()));
    }
}

TEST_CASE("false positive rate stays within the statistical bound") {
    SegTree tree = SegTree::build(32, 8, 2);
    double eps = std::pow(2.0, -8);
    MemoryPlan plan = plan_memory(1000, eps, tree);
    Rbf rbf(tree, plan, 77);

    std::mt19937_64 rng(777);
    std::unordered_set<uint64_t> inserted;
    while (inserted.size() < 1000) {
        uint64_t k = rng() & tree.key_mask();
        if (inserted.insert(k).second)
            rbf.insert(k);
    }

    const size_t R = 1000000;
    size_t false_positives = 0;
    size_t probed = 0;
    while (probed < R) {
        uint64_t k = rng() & tree.key_mask();
        if (inserted.count(k))
            continue;
        ++probed;
        if (rbf.contains(k))
            ++false_positives;
    }
    double rate = double(false_positives) / double(R);
    CHECK(rate <= 3.0 * eps + 3.0 * std::sqrt(eps / double(R)));
}

TEST_CASE("tight plan yields zero observed false positives") {
    SegTree tree = SegTree::build(32, 8, 2);
    MemoryPlan plan = plan_memory(1800, std::pow(2.0, -28), tree);
    Rbf rbf(tree, plan, 4242);

    std::mt19937_64 rng(4242);
    std::unordered_set<uint64_t> inserted;
    while (inserted.size() < 1800) {
        uint64_t k = rng() & tree.key_mask();
        if (inserted.insert(k).second)
            rbf.insert(k);
    }
    size_t false_positives = 0;
    size_t probed = 0;
    while (probed < 100000) {
        uint64_t k = rng() & tree.key_mask();
        if (inserted.count(k))
            continue;
        ++probed;
        if (rbf.contains(k))
            ++false_positives;
    }
    CHECK(false_positives == 0);
}

TEST_CASE("recovery aborts with an explosion error when capped") {
    SegTree tree = SegTree::build(16, 8, 2);
    MemoryPlan plan = plan_memory(50, std::pow(2.0, -14), tree);
    CHECK(plan.block_count == 1); // everything lands in one block
    Rbf rbf(tree, plan, 8);
    rbf.set_explosion_cap(4);
    rbf.insert(0x0101);
    rbf.insert(0x0202);
    rbf.insert(0x0303);
    // leaf candidate sets have 3 entries each: product 9 > 4
    CHECK_THROWS_AS(rbf.recover(), ExplosionError);
    rbf.set_explosion_cap(uint64_t(1) << 22);
    CHECK(rbf.recover().size() >= 3);
}

TEST_CASE("serialization round-trips bit-exactly") {
    SegTree tree = SegTree::build(32, 8, 2);
    MemoryPlan plan = plan_memory(500, std::pow(2.0, -12), tree);
    Rbf rbf(tree, plan, 555);

    std::mt19937_64 rng(555);
    std::vector<uint64_t> keys;
    for (int i = 0; i < 500; ++i)
        keys.push_back(rng() & tree.key_mask());
    for (uint64_t k : keys)
        rbf.insert(k);

    ByteWriter w;
    rbf.save(w);
    ByteReader r(w.buffer());
    Rbf loaded = Rbf::load(r);
    CHECK(r.remaining() == 0);

    for (uint64_t k : keys)
        CHECK(loaded.contains(k));
    CHECK(loaded.block_bits() == rbf.block_bits());
    CHECK(loaded.plan().total_bits == rbf.plan().total_bits);

    ByteWriter w2;
    loaded.save(w2);
    CHECK(w2.buffer() == w.buffer());

    std::vector<uint8_t> corrupt = w.buffer();
    corrupt[0] ^= 0xFF;
    ByteReader bad(corrupt);
    CHECK_THROWS_AS(Rbf::load(bad), IoError);
}

TEST_CASE("clear resets to the empty state") {
    SegTree tree = SegTree::build(16, 8, 2);
    MemoryPlan plan = plan_memory(50, std::pow(2.0, -14), tree);
    Rbf rbf(tree, plan, 9);
    rbf.insert(0x1234);
    CHECK(rbf.contains(0x1234));
    rbf.clear();
    CHECK_FALSE(rbf.contains(0x1234));
    CHECK(rbf.recover().empty());
}
