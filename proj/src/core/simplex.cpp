#include "core/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "core/errors.hpp"

namespace bell::lp {

namespace {

constexpr double kPivotTol = 1e-9;

struct Tableau {
    std::size_t rows = 0;       // constraint rows
    std::size_t cols = 0;       // structural + slack + artificial
    std::vector<std::vector<double>> a;  // rows x (cols+1), last column is rhs
    std::vector<double> obj;             // cols+1, reduced costs and objective value
    std::vector<std::size_t> basis;      // basic column per row
    std::vector<bool> allowed;           // columns eligible to enter

    void pivot(std::size_t pr, std::size_t pc) {
        const double pivot_val = a[pr][pc];
        for (std::size_t j = 0; j <= cols; ++j) a[pr][j] /= pivot_val;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == pr) continue;
            const double f = a[i][pc];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= cols; ++j) a[i][j] -= f * a[pr][j];
        }
        const double f = obj[pc];
        if (f != 0.0)
            for (std::size_t j = 0; j <= cols; ++j) obj[j] -= f * a[pr][j];
        basis[pr] = pc;
    }

    // Maximization: enter the lowest-index column with positive reduced
    // cost, leave by the ratio test with lowest-index tie-break.
    bool iterate() {
        for (;;) {
            std::size_t pc = cols;
            for (std::size_t j = 0; j < cols; ++j) {
                if (allowed[j] && obj[j] > kPivotTol) {
                    pc = j;
                    break;
                }
            }
            if (pc == cols) return true;  // optimal
            std::size_t pr = rows;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < rows; ++i) {
                if (a[i][pc] > kPivotTol) {
                    const double ratio = a[i][cols] / a[i][pc];
                    if (ratio < best - 1e-12 ||
                        (ratio < best + 1e-12 && pr != rows && basis[i] < basis[pr])) {
                        best = std::min(best, ratio);
                        pr = i;
                    }
                }
            }
            if (pr == rows) return false;  // unbounded
            pivot(pr, pc);
        }
    }
};

} // namespace

Result solve_max(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                 const std::vector<double>& c) {
    const std::size_t m = A.size();
    const std::size_t n = c.size();

    std::size_t n_art = 0;
    for (double bi : b)
        if (bi < 0.0) ++n_art;

    Tableau t;
    t.rows = m;
    t.cols = n + m + n_art;
    t.a.assign(m, std::vector<double>(t.cols + 1, 0.0));
    t.obj.assign(t.cols + 1, 0.0);
    t.basis.assign(m, 0);
    t.allowed.assign(t.cols, true);

    std::size_t art = n + m;
    for (std::size_t i = 0; i < m; ++i) {
        const double sign = b[i] < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < n; ++j) t.a[i][j] = sign * A[i][j];
        t.a[i][n + i] = sign;  // slack
        t.a[i][t.cols] = sign * b[i];
        if (b[i] < 0.0) {
            t.a[i][art] = 1.0;
            t.basis[i] = art;
            ++art;
        } else {
            t.basis[i] = n + i;
        }
    }

    if (n_art > 0) {
        // Phase 1: maximize -(sum of artificials).
        for (std::size_t j = n + m; j < t.cols; ++j) t.obj[j] = -1.0;
        // Price out the artificial basis.
        for (std::size_t i = 0; i < m; ++i) {
            if (t.basis[i] >= n + m)
                for (std::size_t j = 0; j <= t.cols; ++j) t.obj[j] += t.a[i][j];
        }
        if (!t.iterate()) throw InternalError("simplex: phase 1 unbounded");
        if (t.obj[t.cols] > 1e-7) return {};  // artificials cannot be driven to zero
        // Drive any artificial still in the basis out, or zero its row.
        for (std::size_t i = 0; i < m; ++i) {
            if (t.basis[i] < n + m) continue;
            std::size_t pc = t.cols;
            for (std::size_t j = 0; j < n + m; ++j) {
                if (std::abs(t.a[i][j]) > kPivotTol) {
                    pc = j;
                    break;
                }
            }
            if (pc != t.cols) t.pivot(i, pc);
        }
        for (std::size_t j = n + m; j < t.cols; ++j) t.allowed[j] = false;
    }

    // Phase 2: original objective, priced out against the current basis.
    for (std::size_t j = 0; j <= t.cols; ++j) t.obj[j] = 0.0;
    for (std::size_t j = 0; j < n; ++j) t.obj[j] = c[j];
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t bj = t.basis[i];
        if (bj < n && c[bj] != 0.0)
            for (std::size_t j = 0; j <= t.cols; ++j) t.obj[j] -= c[bj] * t.a[i][j];
    }
    if (!t.iterate()) throw DomainError("simplex: objective unbounded");

    Result r;
    r.optimal = true;
    r.objective = -t.obj[t.cols];
    r.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (t.basis[i] < n) r.x[t.basis[i]] = t.a[i][t.cols];
    return r;
}

} // namespace bell::lp
