#include "tfwave/lp.hpp"

#include <cassert>
#include <stdexcept>

namespace tfwave {

namespace {

// Tableau for  min cost  s.t.  T x = rhs,  x >= 0,  with a known basis.
struct Tableau {
    size_t m, n;  // rows, columns (structural + slack + artificial)
    std::vector<std::vector<Rat>> t;
    std::vector<Rat> rhs;
    std::vector<size_t> basis;  // basis[r] = column basic in row r

    // Price out: reduced costs for objective vector c over all columns.
    std::vector<Rat> reduced_costs(const std::vector<Rat>& c) const {
        std::vector<Rat> y(m, Rat(0));  // multipliers: y_r = c[basis[r]]
        for (size_t r = 0; r < m; ++r) y[r] = c[basis[r]];
        std::vector<Rat> rc(n, Rat(0));
        for (size_t j = 0; j < n; ++j) {
            Rat v = c[j];
            for (size_t r = 0; r < m; ++r)
                if (t[r][j] != 0) v -= y[r] * t[r][j];
            rc[j] = v;
        }
        return rc;
    }

    void pivot(size_t pr, size_t pc) {
        Rat inv = t[pr][pc];
        for (size_t j = 0; j < n; ++j) t[pr][j] /= inv;
        rhs[pr] /= inv;
        for (size_t r = 0; r < m; ++r) {
            if (r == pr || t[r][pc] == 0) continue;
            Rat f = t[r][pc];
            for (size_t j = 0; j < n; ++j)
                if (t[pr][j] != 0) t[r][j] -= f * t[pr][j];
            rhs[r] -= f * rhs[pr];
        }
        basis[pr] = pc;
    }

    // Primal simplex with Bland's rule over columns [0, ncols).
    // Returns false if unbounded.
    bool solve(const std::vector<Rat>& c, size_t ncols) {
        for (;;) {
            std::vector<Rat> rc = reduced_costs(c);
            size_t enter = ncols;
            for (size_t j = 0; j < ncols; ++j) {
                if (rc[j] < 0) {
                    enter = j;
                    break;
                }
            }
            if (enter == ncols) return true;
            size_t leave = m;
            Rat best;
            for (size_t r = 0; r < m; ++r) {
                if (t[r][enter] <= 0) continue;
                Rat ratio = rhs[r] / t[r][enter];
                if (leave == m || ratio < best ||
                    (ratio == best && basis[r] < basis[leave])) {
                    leave = r;
                    best = ratio;
                }
            }
            if (leave == m) return false;
            pivot(leave, enter);
        }
    }

    Rat objective(const std::vector<Rat>& c) const {
        Rat v = 0;
        for (size_t r = 0; r < m; ++r) v += c[basis[r]] * rhs[r];
        return v;
    }
};

}  // namespace

std::optional<Rat> solve_lp_min(const std::vector<std::vector<Rat>>& A,
                                const std::vector<Rat>& b, const std::vector<Rat>& c) {
    const size_t m = A.size();
    const size_t ns = c.size();
    // Columns: structural (ns), slack (m), artificial (m).
    Tableau tab;
    tab.m = m;
    tab.n = ns + 2 * m;
    tab.t.assign(m, std::vector<Rat>(tab.n, Rat(0)));
    tab.rhs.resize(m);
    tab.basis.resize(m);

    size_t n_art = 0;
    for (size_t r = 0; r < m; ++r) {
        assert(A[r].size() == ns);
        int sign = (b[r] < 0) ? -1 : 1;
        for (size_t j = 0; j < ns; ++j) tab.t[r][j] = sign * A[r][j];
        tab.t[r][ns + r] = sign;  // slack
        tab.rhs[r] = sign * b[r];
        if (sign > 0) {
            tab.basis[r] = ns + r;
        } else {
            tab.t[r][ns + m + r] = 1;  // artificial
            tab.basis[r] = ns + m + r;
            ++n_art;
        }
    }

    if (n_art > 0) {
        std::vector<Rat> phase1(tab.n, Rat(0));
        for (size_t r = 0; r < m; ++r)
            if (tab.basis[r] >= ns + m) phase1[tab.basis[r]] = 1;
        for (size_t j = ns + m; j < tab.n; ++j) phase1[j] = 1;
        if (!tab.solve(phase1, tab.n)) throw std::runtime_error("lp: phase 1 unbounded");
        if (tab.objective(phase1) != 0) return std::nullopt;
        // Drive any artificials still basic (at zero) out of the basis.
        for (size_t r = 0; r < m; ++r) {
            if (tab.basis[r] < ns + m) continue;
            size_t pc = ns + m;
            for (size_t j = 0; j < ns + m; ++j) {
                if (tab.t[r][j] != 0) {
                    pc = j;
                    break;
                }
            }
            if (pc < ns + m) tab.pivot(r, pc);
            // If the row is all zeros it is redundant; leave it.
        }
    }

    std::vector<Rat> phase2(tab.n, Rat(0));
    for (size_t j = 0; j < ns; ++j) phase2[j] = c[j];
    if (!tab.solve(phase2, ns + m)) throw std::runtime_error("lp: unbounded");
    return tab.objective(phase2);
}

}  // namespace tfwave
