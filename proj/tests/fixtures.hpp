#pragma once

#include "tfwave/subspace.hpp"

// Named model subspaces in the kernel representation: Gamma is the set of
// xi in Gamma_0 with sum_j Lj^T xi_j = 0.
namespace fixtures {

using tfwave::Rat;
using tfwave::RatMatrix;
using tfwave::Subspace;

inline RatMatrix mat(size_t rows, size_t cols, const std::vector<long>& entries) {
    RatMatrix m(rows, cols);
    for (size_t r = 0; r < rows; ++r)
        for (size_t c = 0; c < cols; ++c) m.at(r, c) = Rat(entries[r * cols + c]);
    return m;
}

// Bilinear Hilbert transform: n=3, d=1, maps t -> -t and t -> t.
// Gamma = span{(1, 1, -2)}.
inline Subspace bht() {
    return tfwave::subspace_from_kernel_maps(3, 1, {mat(1, 1, {-1}), mat(1, 1, {1})});
}

// n=4, d=2, m=3, maps t -> (t2,t3), (t3,2t1), (t1,3t2). Non-degenerate of
// both types.
inline Subspace cyclic_dilated() {
    return tfwave::subspace_from_kernel_maps(
        4, 2,
        {mat(2, 3, {0, 1, 0, 0, 0, 1}), mat(2, 3, {0, 0, 1, 2, 0, 0}),
         mat(2, 3, {1, 0, 0, 0, 3, 0})});
}

// n=4, d=2, m=3, maps t -> (t2,t3), (t3,t1), (t1,t2). The mildly degenerate
// cyclic model: Type I holds, Type II fails.
inline Subspace cyclic() {
    return tfwave::subspace_from_kernel_maps(
        4, 2,
        {mat(2, 3, {0, 1, 0, 0, 0, 1}), mat(2, 3, {0, 0, 1, 1, 0, 0}),
         mat(2, 3, {1, 0, 0, 0, 1, 0})});
}

// n=3, d=3, m=4, maps t -> (0,t) and t -> (t,0). Rank 4/3 with n too small:
// the stacked map always kills the all-equal diagonal.
inline Subspace corner_slices() {
    return tfwave::subspace_from_kernel_maps(
        3, 3, {mat(3, 2, {0, 0, 1, 0, 0, 1}), mat(3, 2, {1, 0, 0, 1, 0, 0})});
}

// Triangular Hilbert transform: n=3, d=2, m=3. Rank m/d = n/2, outside the
// range every checker accepts.
inline Subspace triangular() {
    return tfwave::subspace_from_kernel_maps(3, 2, {mat(2, 1, {0, 1}), mat(2, 1, {1, 0})});
}

}  // namespace fixtures
