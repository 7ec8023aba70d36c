#ifndef HSK_PRIMES_HPP
#define HSK_PRIMES_HPP

#include <cstdint>
#include <vector>

namespace hsk {

// The 256 smallest primes >= 257. Coefficients drawn from here exceed
// any 8-bit counter value, so a prime-scaled column is never mistaken
// for a unit one, while 64-bit counters keep p*f sums comfortably small.
const std::vector<uint64_t>& prime_table_256();

} // namespace hsk

#endif
