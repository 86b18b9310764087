#pragma once

#include "tfwave/rational.hpp"

#include <vector>

namespace tfwave {

// Dense matrix over the rationals. Sized for the desk-scale linear algebra in
// this project (tens of rows/columns), not for anything big.
class RatMatrix {
public:
    RatMatrix() : rows_(0), cols_(0) {}
    RatMatrix(size_t rows, size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, Rat(0)) {}

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }

    Rat& at(size_t r, size_t c) { return data_[r * cols_ + c]; }
    const Rat& at(size_t r, size_t c) const { return data_[r * cols_ + c]; }

    // Exact rank by fraction-free (Bareiss) elimination on the
    // denominator-cleared integer matrix.
    size_t rank() const;

    // Basis of the right kernel {x : Ax = 0}, via reduced row echelon form.
    std::vector<std::vector<Rat>> kernel_basis() const;

    std::vector<Rat> apply(const std::vector<Rat>& x) const;

private:
    size_t rows_, cols_;
    std::vector<Rat> data_;
};

}  // namespace tfwave
