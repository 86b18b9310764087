#pragma once

#include "tfwave/errors.hpp"
#include "tfwave/ratmatrix.hpp"
#include "tfwave/rational.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tfwave {

// An m-dimensional rational subspace Gamma inside Gamma_0, the hyperplane
// sum_j xi_j = 0 in (R^d)^n. basis[i][j][k] is the k-th coordinate of the
// j-th block of the i-th basis vector.
struct Subspace {
    int n = 0, d = 0, m = 0;
    std::vector<std::vector<std::vector<Rat>>> basis;

    Subspace() = default;
    Subspace(int n_, int d_, int m_, std::vector<std::vector<std::vector<Rat>>> b);

    // Coefficient matrix of the projection onto the coordinates in theta,
    // rows indexed by basis vectors.
    RatMatrix coord_matrix(const std::vector<std::pair<int, int>>& theta) const;
    RatMatrix block_matrix(const std::vector<int>& blocks) const;  // A x [d]

    std::vector<std::vector<Rat>> from_coeffs(const std::vector<Rat>& t) const;
};

// Gamma from the kernel representation: the set of xi in Gamma_0 with
// sum_j Lj^T xi_j = 0, where Lj maps R^Delta -> R^d (columns are images of
// the standard basis). This is how the standard model operators are given.
Subspace subspace_from_kernel_maps(int n, int d, const std::vector<RatMatrix>& maps);

// m = l*d + r with 0 <= r < d, and when l+1-(d-r) >= 0 also
// l+1-(d-r) = a*d + b with 0 <= b < d.
struct RankParams {
    long l = 0, r = 0, a = 0, b = 0;
    bool nonnegative = true;  // l+1-(d-r) >= 0
};
RankParams rank_params(long m, long d);

int projection_image_dim(const Subspace& g, const std::vector<std::pair<int, int>>& theta);

struct Type1Result {
    bool holds = true;
    std::optional<std::vector<int>> failing_A;
};
Type1Result check_type1(const Subspace& g);

// One admissible (A, B^(1..L)) family. For the medium-rank case L = 2 and the
// blocks are free; for the large-rank case L = d and B^(k) is assembled from
// the disjoint sets U_1..U_{2d-1}, W.
struct IndexFamily {
    std::vector<int> A;
    std::vector<std::vector<int>> B;  // L blocks
    int L = 2;
    std::vector<std::vector<int>> U;  // large-rank only
    std::vector<int> W;               // large-rank only

    std::string describe() const;
};

std::vector<IndexFamily> enumerate_families(const Subspace& g);

// Matrix of the stacked map on coefficient coordinates of Gamma^L:
// first the P_{B^(k)} blocks (k = 1..L), then the P_A difference blocks
// (k = 2..L). Trivial kernel iff rank == L*m.
RatMatrix build_type2_map(const Subspace& g, const IndexFamily& fam);

struct KernelWitness {
    std::vector<std::vector<Rat>> t;  // L coefficient vectors, each length m
    std::vector<std::vector<std::vector<Rat>>> ambient;  // L Gamma-vectors
};

struct FamilyResult {
    bool trivial_kernel = true;
    std::optional<KernelWitness> witness;
};
FamilyResult check_family(const Subspace& g, const IndexFamily& fam);

struct Type2Result {
    bool holds = true;
    std::optional<KernelWitness> witness;
    std::optional<IndexFamily> failing_family;
    size_t families_checked = 0;
};
Type2Result check_type2(const Subspace& g);

struct CoordinateKernel {
    std::vector<std::vector<Rat>> coeff_basis;
    std::vector<std::vector<std::vector<Rat>>> ambient_basis;
};
// Kernel of the projection onto the j-th block (1-based j), restricted to Gamma.
CoordinateKernel coordinate_kernel(const Subspace& g, int j);

Subspace sample_generic(int n, int d, int m, uint64_t seed);

// JSON I/O per the documented file formats.
Subspace subspace_from_json(const std::string& text);
std::string subspace_to_json(const Subspace& g);

}  // namespace tfwave
