#include "tfwave/ratmatrix.hpp"

#include <cassert>

namespace tfwave {

size_t RatMatrix::rank() const {
    if (rows_ == 0 || cols_ == 0) return 0;

    // Clear denominators row by row; rank is unchanged.
    std::vector<std::vector<Int>> m(rows_, std::vector<Int>(cols_));
    for (size_t r = 0; r < rows_; ++r) {
        Int lcm = 1;
        for (size_t c = 0; c < cols_; ++c) {
            const Rat& q = at(r, c);
            Int den = q.get_den();
            mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), den.get_mpz_t());
        }
        for (size_t c = 0; c < cols_; ++c) {
            const Rat& q = at(r, c);
            m[r][c] = q.get_num() * (lcm / q.get_den());
        }
    }

    // Bareiss fraction-free elimination with row+column pivot search.
    size_t rank = 0;
    Int prev = 1;
    size_t pr = 0;
    for (size_t pc = 0; pc < cols_ && pr < rows_; ++pc) {
        size_t pivot = pr;
        while (pivot < rows_ && m[pivot][pc] == 0) ++pivot;
        if (pivot == rows_) continue;
        std::swap(m[pr], m[pivot]);
        for (size_t r = pr + 1; r < rows_; ++r) {
            for (size_t c = pc + 1; c < cols_; ++c) {
                Int t = m[pr][pc] * m[r][c] - m[r][pc] * m[pr][c];
                mpz_divexact(m[r][c].get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
            }
            m[r][pc] = 0;
        }
        prev = m[pr][pc];
        ++pr;
        ++rank;
    }
    return rank;
}

std::vector<std::vector<Rat>> RatMatrix::kernel_basis() const {
    // RREF over Q, then read off one kernel vector per free column.
    std::vector<std::vector<Rat>> m(rows_, std::vector<Rat>(cols_));
    for (size_t r = 0; r < rows_; ++r)
        for (size_t c = 0; c < cols_; ++c) m[r][c] = at(r, c);

    std::vector<size_t> pivot_col;
    size_t pr = 0;
    for (size_t pc = 0; pc < cols_ && pr < rows_; ++pc) {
        size_t pivot = pr;
        while (pivot < rows_ && m[pivot][pc] == 0) ++pivot;
        if (pivot == rows_) continue;
        std::swap(m[pr], m[pivot]);
        Rat inv = m[pr][pc];
        for (size_t c = pc; c < cols_; ++c) m[pr][c] /= inv;
        for (size_t r = 0; r < rows_; ++r) {
            if (r == pr || m[r][pc] == 0) continue;
            Rat f = m[r][pc];
            for (size_t c = pc; c < cols_; ++c) m[r][c] -= f * m[pr][c];
        }
        pivot_col.push_back(pc);
        ++pr;
    }

    std::vector<bool> is_pivot(cols_, false);
    for (size_t c : pivot_col) is_pivot[c] = true;

    std::vector<std::vector<Rat>> basis;
    for (size_t fc = 0; fc < cols_; ++fc) {
        if (is_pivot[fc]) continue;
        std::vector<Rat> v(cols_, Rat(0));
        v[fc] = 1;
        for (size_t i = 0; i < pivot_col.size(); ++i) v[pivot_col[i]] = -m[i][fc];
        basis.push_back(std::move(v));
    }
    return basis;
}

std::vector<Rat> RatMatrix::apply(const std::vector<Rat>& x) const {
    assert(x.size() == cols_);
    std::vector<Rat> y(rows_, Rat(0));
    for (size_t r = 0; r < rows_; ++r)
        for (size_t c = 0; c < cols_; ++c)
            if (at(r, c) != 0) y[r] += at(r, c) * x[c];
    return y;
}

}  // namespace tfwave
