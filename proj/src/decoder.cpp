#include "decoder.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <numeric>

#include "cmsketch.hpp"
#include "errors.hpp"

namespace hsk {

namespace {

int64_t checked_contribution(uint64_t coeff, uint64_t value) {
    __int128 p = __int128(coeff) * value;
    if (p > __int128((uint64_t(1) << 63) - 1))
        throw InconsistencyError("contribution overflows counter range");
    return int64_t(p);
}

} // namespace

PureResult pure_extract(const EquationSystem& sys) {
    const size_t ncols = sys.n_cols();
    std::vector<int64_t> rhs = sys.rhs;
    std::vector<std::vector<uint32_t>> row_cols(sys.n_rows);
    for (size_t j = 0; j < ncols; ++j)
        for (uint32_t r : sys.col_rows[j]) row_cols[r].push_back(uint32_t(j));

    std::vector<uint32_t> row_count(sys.n_rows);
    std::vector<char> fixed(ncols, 0);
    std::vector<uint64_t> value(ncols, 0);
    std::deque<uint32_t> queue;
    for (uint32_t r = 0; r < sys.n_rows; ++r) {
        row_count[r] = uint32_t(row_cols[r].size());
        if (row_count[r] == 0 && rhs[r] != 0)
            throw InconsistencyError("bucket " + std::to_string(r) +
                                     " has value " + std::to_string(rhs[r]) +
                                     " but no candidate key");
        if (row_count[r] == 1) queue.push_back(r);
    }

    while (!queue.empty()) {
        uint32_t r = queue.front();
        queue.pop_front();
        if (row_count[r] != 1) continue;
        uint32_t j = 0;
        for (uint32_t cand : row_cols[r])
            if (!fixed[cand]) { j = cand; break; }
        int64_t v = rhs[r];
        uint64_t coeff = sys.coeffs[j];
        if (v < 0)
            throw InconsistencyError("pure bucket " + std::to_string(r) + " is negative");
        if (uint64_t(v) % coeff != 0)
            throw InconsistencyError("pure bucket " + std::to_string(r) + " value " +
                                     std::to_string(v) + " is not divisible by coefficient " +
                                     std::to_string(coeff));
        uint64_t f = uint64_t(v) / coeff;
        fixed[j] = 1;
        value[j] = f;
        for (uint32_t rr : sys.col_rows[j]) {
            rhs[rr] -= checked_contribution(coeff, f);
            if (rhs[rr] < 0)
                throw InconsistencyError("bucket " + std::to_string(rr) +
                                         " went negative while peeling");
            --row_count[rr];
            if (row_count[rr] == 1) queue.push_back(rr);
            if (row_count[rr] == 0 && rhs[rr] != 0)
                throw InconsistencyError("bucket " + std::to_string(rr) +
                                         " drained to non-zero value " +
                                         std::to_string(rhs[rr]));
        }
    }

    PureResult out;
    for (size_t j = 0; j < ncols; ++j)
        if (fixed[j]) out.solved[sys.columns[j]] = value[j];

    std::vector<uint32_t> row_map(sys.n_rows, UINT32_MAX);
    uint32_t next = 0;
    for (uint32_t r = 0; r < sys.n_rows; ++r)
        if (row_count[r] > 0) row_map[r] = next++;
    out.residual.n_rows = next;
    out.residual.rhs.resize(next);
    for (uint32_t r = 0; r < sys.n_rows; ++r)
        if (row_map[r] != UINT32_MAX) out.residual.rhs[row_map[r]] = rhs[r];
    for (size_t j = 0; j < ncols; ++j) {
        if (fixed[j]) continue;
        out.residual.columns.push_back(sys.columns[j]);
        out.residual.coeffs.push_back(sys.coeffs[j]);
        std::vector<uint32_t> rows;
        rows.reserve(sys.col_rows[j].size());
        for (uint32_t r : sys.col_rows[j]) rows.push_back(row_map[r]);
        out.residual.col_rows.push_back(std::move(rows));
    }
    return out;
}

SvdResult svd_solve(const EquationSystem& residual, const DecoderConfig& cfg) {
    if (residual.n_cols() == 0)
        throw ConfigError("svd_solve requires a non-empty residual");
    if (residual.n_rows > cfg.svd_max_dim || residual.n_cols() > cfg.svd_max_dim)
        throw BudgetError("residual " + std::to_string(residual.n_rows) + "x" +
                          std::to_string(residual.n_cols()) +
                          " exceeds the dense solve cap of " +
                          std::to_string(cfg.svd_max_dim));

    const size_t ncols = residual.n_cols();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(residual.n_rows, ncols);
    Eigen::VectorXd y(residual.n_rows);
    for (uint32_t r = 0; r < residual.n_rows; ++r) y(r) = double(residual.rhs[r]);
    for (size_t j = 0; j < ncols; ++j)
        for (uint32_t r : residual.col_rows[j]) a(r, j) = double(residual.coeffs[j]);

    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(cfg.rank_tolerance);
    SvdResult out;
    if (size_t(svd.rank()) < ncols) {
        out.multiple = true;
        out.rank_deficient = true;
        return out;
    }

    Eigen::VectorXd x = svd.solve(y);
    std::vector<uint64_t> rounded(ncols);
    for (size_t j = 0; j < ncols; ++j) {
        double rj = std::round(x(j));
        if (std::abs(x(j) - rj) > cfg.round_tolerance)
            throw NumericalError("solution entry " + std::to_string(x(j)) +
                                 " is not near an integer at full rank");
        if (rj < 0)
            throw NumericalError("negative frequency " + std::to_string(rj) +
                                 " at full rank");
        rounded[j] = uint64_t(rj);
    }
    // exact integer re-substitution, part of the contract
    std::vector<__int128> lhs(residual.n_rows, 0);
    for (size_t j = 0; j < ncols; ++j)
        for (uint32_t r : residual.col_rows[j])
            lhs[r] += __int128(residual.coeffs[j]) * rounded[j];
    for (uint32_t r = 0; r < residual.n_rows; ++r)
        if (lhs[r] != __int128(residual.rhs[r]))
            throw NumericalError("full-rank solution fails exact re-substitution at bucket " +
                                 std::to_string(r));
    for (size_t j = 0; j < ncols; ++j) out.solution[residual.columns[j]] = rounded[j];
    return out;
}

namespace {

struct BudgetHit {};

// euclid inverse of a mod m, both in (0, m), m prime or coprime to a
uint64_t mod_inverse(uint64_t a, uint64_t m) {
    int64_t t = 0, newt = 1;
    int64_t r = int64_t(m), newr = int64_t(a);
    while (newr != 0) {
        int64_t q = r / newr;
        int64_t tmp = t - q * newt;
        t = newt;
        newt = tmp;
        tmp = r - q * newr;
        r = newr;
        newr = tmp;
    }
    if (t < 0) t += int64_t(m);
    return uint64_t(t);
}

// One connected component of the residual, with local row/col indexing.
struct IlpComponent {
    std::vector<uint32_t> cols;           // indices into the residual system
    std::vector<int64_t> rhs0;            // local row values
    std::vector<uint64_t> coeff;          // local col coefficients
    std::vector<std::vector<uint32_t>> col_rows; // local col -> local rows
};

struct IlpState {
    std::vector<int64_t> rhs;
    std::vector<std::vector<uint32_t>> row_cols; // local row -> unfixed local cols
    std::vector<int64_t> fixed;                  // -1 while unfixed
};

struct ComponentRun {
    std::vector<std::vector<uint64_t>> sols; // up to two, per-local-col values
    bool budget_hit = false;
};

class ComponentSolver {
public:
    ComponentSolver(const IlpComponent& comp, uint64_t budget, uint64_t& nodes)
        : comp_(comp), budget_(budget), nodes_(nodes) {}

    ComponentRun run() {
        IlpState st;
        st.rhs = comp_.rhs0;
        st.row_cols.resize(comp_.rhs0.size());
        for (uint32_t j = 0; j < uint32_t(comp_.coeff.size()); ++j)
            for (uint32_t r : comp_.col_rows[j]) st.row_cols[r].push_back(j);
        st.fixed.assign(comp_.coeff.size(), -1);
        ComponentRun out;
        try {
            dfs(std::move(st));
        } catch (const BudgetHit&) {
            out.budget_hit = true;
        }
        out.sols = std::move(solutions_);
        return out;
    }

private:
    // ceiling-free per-column bound from the current right-hand sides
    int64_t upper_bound(const IlpState& st, uint32_t j) const {
        int64_t u = INT64_MAX;
        for (uint32_t r : comp_.col_rows[j]) {
            if (st.rhs[r] < 0) return -1;
            u = std::min(u, st.rhs[r] / int64_t(comp_.coeff[j]));
        }
        return u;
    }

    static void remove_col(std::vector<uint32_t>& cols, uint32_t j) {
        cols.erase(std::find(cols.begin(), cols.end(), j));
    }

    void fix(IlpState& st, uint32_t j, int64_t v, std::deque<uint32_t>& work) const {
        st.fixed[j] = v;
        for (uint32_t r : comp_.col_rows[j]) {
            st.rhs[r] -= int64_t(comp_.coeff[j]) * v;
            remove_col(st.row_cols[r], j);
            work.push_back(r);
        }
    }

    bool propagate(IlpState& st) const {
        std::deque<uint32_t> work;
        for (uint32_t r = 0; r < st.rhs.size(); ++r) work.push_back(r);
        while (!work.empty()) {
            uint32_t r = work.front();
            work.pop_front();
            int64_t v = st.rhs[r];
            if (v < 0) return false;
            auto& cols = st.row_cols[r];
            if (cols.empty()) {
                if (v != 0) return false;
                continue;
            }
            __int128 reach = 0;
            for (uint32_t j : cols) {
                int64_t u = upper_bound(st, j);
                if (u < 0) return false;
                reach += __int128(comp_.coeff[j]) * u;
            }
            if (reach < v) return false;
            if (cols.size() == 1) {
                uint32_t j = cols[0];
                if (v % int64_t(comp_.coeff[j]) != 0) return false;
                fix(st, j, v / int64_t(comp_.coeff[j]), work);
            } else if (cols.size() == 2) {
                uint32_t a = cols[0], c = cols[1];
                int64_t pa = int64_t(comp_.coeff[a]), pc = int64_t(comp_.coeff[c]);
                int64_t ua = upper_bound(st, a), uc = upper_bound(st, c);
                if (ua < 0 || uc < 0) return false;
                if (pa == pc) {
                    if (v % pa != 0) return false;
                    int64_t s = v / pa;
                    int64_t lo = std::max<int64_t>(0, s - uc);
                    int64_t hi = std::min(ua, s);
                    if (lo > hi) return false;
                    if (lo == hi) {
                        fix(st, a, lo, work);
                        fix(st, c, s - lo, work);
                    }
                    continue;
                }
                // pa*x + pc*z = v over non-negative integers with bounds
                int64_t x0 = int64_t((uint64_t(v % pc) *
                                      mod_inverse(uint64_t(pa % pc), uint64_t(pc))) %
                                     uint64_t(pc));
                int64_t first = -1, second = -1;
                for (int64_t x = x0; pa * x <= v; x += pc) {
                    int64_t z = (v - pa * x) / pc;
                    if (x > ua || z > uc) continue;
                    if (first < 0) {
                        first = x;
                    } else {
                        second = x;
                        break;
                    }
                }
                if (first < 0) return false;
                if (second < 0) {
                    fix(st, a, first, work);
                    fix(st, c, (v - pa * first) / pc, work);
                }
            }
        }
        return true;
    }

    void dfs(IlpState st) {
        if (!propagate(st)) return;
        uint32_t branch = UINT32_MAX;
        int64_t best_u = INT64_MAX;
        for (uint32_t j = 0; j < st.fixed.size(); ++j) {
            if (st.fixed[j] >= 0) continue;
            int64_t u = upper_bound(st, j);
            if (u < 0) return;
            if (u < best_u) {
                best_u = u;
                branch = j;
            }
        }
        if (branch == UINT32_MAX) {
            for (int64_t v : st.rhs)
                if (v != 0) return;
            std::vector<uint64_t> sol(st.fixed.size());
            for (size_t j = 0; j < st.fixed.size(); ++j) sol[j] = uint64_t(st.fixed[j]);
            if (std::find(solutions_.begin(), solutions_.end(), sol) == solutions_.end())
                solutions_.push_back(std::move(sol));
            return;
        }
        for (int64_t v = 0; v <= best_u; ++v) {
            if (solutions_.size() >= 2) return;
            if (++nodes_ > budget_) throw BudgetHit{};
            IlpState child = st;
            std::deque<uint32_t> unused;
            fix(child, branch, v, unused);
            dfs(std::move(child));
        }
    }

    const IlpComponent& comp_;
    uint64_t budget_;
    uint64_t& nodes_;
    std::vector<std::vector<uint64_t>> solutions_;
};

} // namespace

IlpResult ilp_solve(const EquationSystem& residual, const DecoderConfig& cfg) {
    if (!cfg.ilp_enabled) throw ConfigError("ilp_solve called while disabled");
    IlpResult out;
    out.outcome = IlpResult::Outcome::Solved;
    out.verified_unique = true;

    // rows with no candidate must already be zero
    std::vector<char> row_used(residual.n_rows, 0);
    for (const auto& rows : residual.col_rows)
        for (uint32_t r : rows) row_used[r] = 1;
    for (uint32_t r = 0; r < residual.n_rows; ++r)
        if (!row_used[r] && residual.rhs[r] != 0) {
            out.outcome = IlpResult::Outcome::Infeasible;
            return out;
        }
    if (residual.n_cols() == 0) return out;

    // connected components over shared buckets
    const size_t ncols = residual.n_cols();
    std::vector<uint32_t> parent(ncols);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<uint32_t(uint32_t)> find = [&](uint32_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<int64_t> row_owner(residual.n_rows, -1);
    for (size_t j = 0; j < ncols; ++j)
        for (uint32_t r : residual.col_rows[j]) {
            if (row_owner[r] < 0)
                row_owner[r] = int64_t(j);
            else
                parent[find(uint32_t(row_owner[r]))] = find(uint32_t(j));
        }
    std::map<uint32_t, std::vector<uint32_t>> groups;
    for (uint32_t j = 0; j < ncols; ++j) groups[find(j)].push_back(j);

    std::vector<IlpComponent> comps;
    for (auto& [root, cols] : groups) {
        IlpComponent comp;
        comp.cols = cols;
        std::map<uint32_t, uint32_t> row_map;
        for (uint32_t j : cols) {
            comp.coeff.push_back(residual.coeffs[j]);
            std::vector<uint32_t> local;
            for (uint32_t r : residual.col_rows[j]) {
                auto [it, inserted] = row_map.emplace(r, uint32_t(row_map.size()));
                if (inserted) comp.rhs0.push_back(residual.rhs[r]);
                local.push_back(it->second);
            }
            comp.col_rows.push_back(std::move(local));
        }
        comps.push_back(std::move(comp));
    }
    std::sort(comps.begin(), comps.end(), [](const IlpComponent& a, const IlpComponent& b) {
        if (a.cols.size() != b.cols.size()) return a.cols.size() < b.cols.size();
        return a.cols[0] < b.cols[0];
    });

    bool multiple = false;
    for (size_t ci = 0; ci < comps.size(); ++ci) {
        const IlpComponent& comp = comps[ci];
        ComponentSolver solver(comp, cfg.ilp_node_budget, out.nodes);
        ComponentRun run = solver.run();
        if (run.budget_hit) {
            bool last = ci + 1 == comps.size();
            if (last && run.sols.size() == 1 && !multiple) {
                // a solution exists but the second-solution search ran out
                for (size_t k = 0; k < comp.cols.size(); ++k)
                    out.solution[residual.columns[comp.cols[k]]] = run.sols[0][k];
                out.outcome = IlpResult::Outcome::Solved;
                out.verified_unique = false;
                return out;
            }
            out.outcome = IlpResult::Outcome::BudgetExceeded;
            out.verified_unique = false;
            out.solution.clear();
            return out;
        }
        if (run.sols.empty()) {
            out.outcome = IlpResult::Outcome::Infeasible;
            out.solution.clear();
            out.verified_unique = false;
            return out;
        }
        if (run.sols.size() >= 2) multiple = true;
        for (size_t k = 0; k < comp.cols.size(); ++k)
            out.solution[residual.columns[comp.cols[k]]] = run.sols[0][k];
    }
    if (multiple) {
        out.outcome = IlpResult::Outcome::Multiple;
        out.verified_unique = false;
        out.solution.clear();
    }
    return out;
}

DecodeResult decode(const std::vector<uint64_t>& candidates, const CmSketch& sk,
                    const DecoderConfig& cfg) {
    DecodeResult out;
    if (candidates.empty()) {
        for (uint64_t c : sk.counters())
            if (c != 0)
                throw InconsistencyError("decode: counters are non-zero but the candidate "
                                         "set is empty");
        out.status = DecodeStatus::Full;
        return out;
    }

    EquationSystem sys = sk.to_equation_system(candidates);
    PureResult pure;
    try {
        pure = pure_extract(sys);
    } catch (const InconsistencyError& e) {
        throw InconsistencyError(std::string("pure extraction: ") + e.what());
    }
    out.diagnostics.pure_solved = pure.solved.size();
    std::map<uint64_t, uint64_t> resolved = pure.solved;

    if (!pure.residual.columns.empty()) {
        bool residual_solved = false;
        if (cfg.svd_enabled) {
            try {
                SvdResult svd = svd_solve(pure.residual, cfg);
                if (!svd.multiple) {
                    out.diagnostics.svd_solved = svd.solution.size();
                    for (const auto& [k, v] : svd.solution) resolved[k] = v;
                    residual_solved = true;
                } else {
                    out.diagnostics.rank_deficient = true;
                }
            } catch (const BudgetError& e) {
                out.diagnostics.note = std::string("svd: ") + e.what();
            } catch (const NumericalError& e) {
                throw NumericalError(std::string("svd: ") + e.what());
            }
        }

        if (!residual_solved && out.diagnostics.rank_deficient && cfg.ilp_enabled) {
            IlpResult ilp;
            try {
                ilp = ilp_solve(pure.residual, cfg);
            } catch (const InconsistencyError& e) {
                throw InconsistencyError(std::string("ilp: ") + e.what());
            }
            out.diagnostics.ilp_nodes = ilp.nodes;
            switch (ilp.outcome) {
                case IlpResult::Outcome::Solved:
                    out.diagnostics.ilp_solved = ilp.solution.size();
                    out.diagnostics.ilp_unverified_unique = !ilp.verified_unique;
                    if (!ilp.verified_unique)
                        out.diagnostics.note = "ilp: unverified-unique (budget hit during "
                                               "second-solution search)";
                    for (const auto& [k, v] : ilp.solution) resolved[k] = v;
                    residual_solved = true;
                    break;
                case IlpResult::Outcome::Multiple:
                    out.diagnostics.note = "ilp: multiple integer solutions";
                    break;
                case IlpResult::Outcome::Infeasible:
                    throw InconsistencyError("ilp: residual system has no non-negative "
                                             "integer solution");
                case IlpResult::Outcome::BudgetExceeded:
                    out.diagnostics.note = "ilp: node budget exceeded";
                    break;
            }
        } else if (!residual_solved && out.diagnostics.rank_deficient) {
            out.diagnostics.note = "rank-deficient residual, ilp disabled";
        }
    }

    size_t total = sys.n_cols();
    for (const auto& [k, v] : resolved)
        if (v > 0) out.frequencies[k] = v;
    if (resolved.size() == total) {
        out.status = DecodeStatus::Full;
    } else if (!resolved.empty()) {
        out.status = DecodeStatus::Partial;
        for (uint64_t key : sys.columns)
            if (resolved.find(key) == resolved.end()) out.unresolved.push_back(key);
    } else {
        out.status = DecodeStatus::Failed;
    }
    return out;
}

} // namespace hsk
