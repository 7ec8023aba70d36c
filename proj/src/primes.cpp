#include "primes.hpp"

namespace hsk {

namespace {

bool is_prime(uint64_t v) {
    for (uint64_t d = 3; d * d <= v; d += 2)
        if (v % d == 0) return false;
    return true;
}

std::vector<uint64_t> build_table() {
    std::vector<uint64_t> t;
    t.reserve(256);
    for (uint64_t v = 257; t.size() < 256; v += 2)
        if (is_prime(v)) t.push_back(v);
    return t;
}

} // namespace

const std::vector<uint64_t>& prime_table_256() {
    static const std::vector<uint64_t> table = build_table();
    return table;
}

} // namespace hsk
