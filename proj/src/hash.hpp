#ifndef HSK_HASH_HPP
#define HSK_HASH_HPP

#include <cstdint>

namespace hsk {

// 64-bit finalizer with full avalanche (murmur3 fmix64 constants).
inline uint64_t mix64(uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
}

// Seeded mixing hash: independent streams for distinct seeds.
inline uint64_t hash_mix(uint64_t seed, uint64_t value) {
    return mix64(value + 0x9e3779b97f4a7c15ULL + (seed ^ (seed << 7 | seed >> 57)));
}

// splitmix64 stream; used to derive all seeds from one master seed.
class SeedStream {
public:
    explicit SeedStream(uint64_t master) : state_(master) {}

    uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    uint64_t state_;
};

} // namespace hsk

#endif
