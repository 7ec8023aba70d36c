#ifndef HSK_ERRORS_HPP
#define HSK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hsk {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad parameters or an unusable configuration file.
struct ConfigError : Error {
    using Error::Error;
};

// Counter or candidate-set state contradicts the recorded stream
// (e.g. a pure bucket not divisible by its prime, negative remainder).
struct InconsistencyError : Error {
    using Error::Error;
};

// An intermediate candidate set during key recovery exceeded the cap.
struct ExplosionError : Error {
    using Error::Error;
};

// A counter increment would exceed the 2^63-1 ceiling.
struct OverflowError : Error {
    using Error::Error;
};

// A solve stage exceeded its size or node budget.
struct BudgetError : Error {
    using Error::Error;
};

// Full-rank solve produced a non-integer or non-reproducing solution.
struct NumericalError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

} // namespace hsk

#endif
