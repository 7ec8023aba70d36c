#ifndef HSK_DECODER_HPP
#define HSK_DECODER_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "equation.hpp"

namespace hsk {

class CmSketch;

struct DecoderConfig {
    double rank_tolerance = 1e-9;  // relative singular-value cutoff
    double round_tolerance = 1e-6; // max |x_i - round(x_i)| accepted
    bool svd_enabled = true;
    bool ilp_enabled = true;
    uint64_t ilp_node_budget = 1000000;
    size_t svd_max_dim = 2000; // dense solve size cap, rows and cols
    std::map<uint32_t, double> c_k_table = {{3, 1.222}, {4, 1.295}, {5, 1.425}};
};

struct PureResult {
    std::map<uint64_t, uint64_t> solved;
    EquationSystem residual;
};

// Algorithm: repeatedly take a bucket with exactly one remaining candidate,
// fix that key's frequency from the bucket value, subtract its contribution
// everywhere, and re-queue buckets that became pure.
PureResult pure_extract(const EquationSystem& sys);

struct SvdResult {
    bool multiple = false; // rank-deficient, no unique least-norm integer point
    bool rank_deficient = false;
    std::map<uint64_t, uint64_t> solution;
};

SvdResult svd_solve(const EquationSystem& residual, const DecoderConfig& cfg);

struct IlpResult {
    enum class Outcome { Solved, Multiple, Infeasible, BudgetExceeded };
    Outcome outcome = Outcome::Infeasible;
    bool verified_unique = false; // second-solution search completed
    uint64_t nodes = 0;
    std::map<uint64_t, uint64_t> solution;
};

IlpResult ilp_solve(const EquationSystem& residual, const DecoderConfig& cfg);

enum class DecodeStatus { Full, Partial, Failed };

struct DecodeDiagnostics {
    size_t pure_solved = 0;
    size_t svd_solved = 0;
    size_t ilp_solved = 0;
    bool rank_deficient = false;
    bool ilp_unverified_unique = false;
    uint64_t ilp_nodes = 0;
    std::string note; // budget events, multiplicity
};

struct DecodeResult {
    std::map<uint64_t, uint64_t> frequencies; // zero-frequency keys dropped
    DecodeStatus status = DecodeStatus::Failed;
    std::vector<uint64_t> unresolved; // populated for Partial
    DecodeDiagnostics diagnostics;
};

DecodeResult decode(const std::vector<uint64_t>& candidates, const CmSketch& sk,
                    const DecoderConfig& cfg);

} // namespace hsk

#endif
