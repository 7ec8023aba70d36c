#ifndef HSK_EQUATION_HPP
#define HSK_EQUATION_HPP

#include <cstdint>
#include <vector>

namespace hsk {

// Sparse linear system over the sketch counters. Column j belongs to
// candidate key columns[j] and carries the same coefficient coeffs[j]
// (1 in unit mode, the key's prime otherwise) in each of its rows.
struct EquationSystem {
    uint32_t n_rows = 0;
    std::vector<uint64_t> columns;              // candidate keys, ascending
    std::vector<uint64_t> coeffs;               // per-column coefficient
    std::vector<std::vector<uint32_t>> col_rows; // per-column bucket rows
    std::vector<int64_t> rhs;                   // size n_rows

    size_t n_cols() const { return columns.size(); }
    bool empty() const { return columns.empty() && n_rows == 0; }
};

} // namespace hsk

#endif
