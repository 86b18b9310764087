#pragma once

#include "tfwave/subspace.hpp"
#include "tfwave/trees.hpp"

#include <string>

namespace tfwave {

// R(lambda): vector tiles whose every component sits in the lambda_j level
// of the per-coordinate decomposition.
struct Stratum {
    std::vector<size_t> level_idx;  // per j, index into decs[j].levels
    std::vector<Rat> lambda;        // per j
    std::vector<int> tiles;         // vector tile ids
};
std::vector<Stratum> build_strata(const Collection& col,
                                  std::span<const Decomposition> decs);

struct VTree {
    std::vector<int> members;  // vector tile ids
    int top = -1;              // the maximal vector tile the tree was grown from
    DyadicCube top_I;
};

struct Organized {
    std::vector<VTree> multi;    // #members >= 2
    std::vector<VTree> singles;  // #members == 1
};

// The organization algorithm: repeatedly grow a tree from the maximal
// vector tile of smallest frequency scale (ties lexicographic).
Organized organize(const Collection& col, const TreeCtx& ctx, const Stratum& stratum);

// sigma_j: the j-tree of F_j(lambda_j) containing the top's j-component.
std::pair<size_t, size_t> sigma(const Decomposition& dec_j, const VTree& tree, int j);

// kappa-stratification of the single-member trees, with the per-coordinate
// maximal-element families F_j(lambda_j, kappa_j).
struct SinglesStratum {
    std::vector<Rat> kappa;                        // per j (0 marks zero coefficient)
    std::vector<int> tiles;                        // vector tile ids
    std::vector<std::vector<TileRef>> maximal;     // per j, the family F_j
};
std::vector<SinglesStratum> kappa_stratify(const Collection& col, const CoefTable& coef,
                                           const Stratum& stratum,
                                           const Organized& org);

// Maximal elements of a tagged tile set under the order <=.
std::vector<TileRef> maximal_elements(const Collection& col,
                                      std::span<const TileRef> tiles);

// sigma'_j: the lexicographically smallest maximal element dominating the
// given single tile's j-component. Throws NoDominatingMaximal if none.
TileRef sigma_prime(const Collection& col, const SinglesStratum& ss, int vt, int j);

struct KatzTaoResult {
    Int count;  // exact chain count
    Rat bound;  // c_L (#Omega)^L / prod #Z_l with c_L = 2^{-L(L-1)/2}
};
KatzTaoResult katz_tao_chains(size_t omega, const std::vector<std::vector<int>>& maps,
                              const std::vector<size_t>& z_sizes);

// Representative points, one per nonempty atom of the laminar arrangement.
std::vector<std::vector<Rat>> atom_representatives(const std::vector<DyadicCube>& cubes);

struct CountingAuditRow {
    std::vector<Rat> x;
    double lhs = 0.0;
    double rhs = 0.0;
    double constant = 1.0;
    std::string family;
    bool pass = true;
};
struct CountingAuditReport {
    std::vector<CountingAuditRow> rows;
    bool all_pass = true;
    double min_separation_ratio = -1.0;  // Lemma-5.4-style separation, measured
    bool injective = true;
};

// Case 1: injectivity of sigma_Upsilon on the multi-tile trees through a
// point, giving the constant-1 product bound. When `singles` is true the
// audit runs on the kappa strata with sigma'.
CountingAuditReport counting_audit_case1(const Collection& col, const TreeCtx& ctx,
                                         const Subspace& g,
                                         std::span<const Decomposition> decs,
                                         const Stratum& stratum, const Organized& org,
                                         bool singles, const CoefTable& coef);

// Cases 2/3: the chain bound via materialized G and the injectivity of the
// product of sigma_{B^(k)}, with the explicit constant (1/c_L)^(1/L).
CountingAuditReport counting_audit_chain(const Collection& col, const TreeCtx& ctx,
                                         const Subspace& g,
                                         std::span<const Decomposition> decs,
                                         const Stratum& stratum, const Organized& org,
                                         bool singles, const CoefTable& coef);

}  // namespace tfwave
