#pragma once

#include "tfwave/geometry.hpp"
#include "tfwave/gridfn.hpp"
#include "tfwave/rational.hpp"

#include <map>
#include <optional>
#include <span>
#include <vector>

namespace tfwave {

// j-component of a vector tile; identity is positional so coincident
// geometry stays distinguishable.
struct TileRef {
    int vt = -1;
    int j = -1;
    auto operator<=>(const TileRef&) const = default;
};

struct Collection {
    std::vector<VectorTile> tiles;

    int arity() const { return tiles.empty() ? 0 : static_cast<int>(tiles[0].arity()); }
    size_t dim() const { return tiles.empty() ? 0 : tiles[0].I.dim(); }
    Tile component(const TileRef& r) const {
        return tiles[static_cast<size_t>(r.vt)].component(static_cast<size_t>(r.j));
    }
};

// Coefficient table |<f_j | phi_{R_j}>|; magnitudes squared are kept both as
// doubles (fast paths) and exact rationals (tie-breaking and oracles). The
// doubles are exact binary rationals, so the two views agree.
struct CoefTable {
    std::vector<std::vector<Complex>> value;  // [vt][j]
    std::vector<std::vector<double>> abs2;
    std::vector<std::vector<Rat>> abs2_rat;

    static CoefTable from_values(const std::vector<std::vector<Complex>>& v);
};

// Per-coordinate centralized frequency map R_j -> C2 o Xi(R_j).
class TreeCtx {
public:
    static TreeCtx build(const Collection& col, const Rat& C2, const Rat& C3,
                         const Rat& centralize_floor = Rat(10000));

    const Rat& C2() const { return c2_; }
    const Box& c2circ(const Collection& col, const TileRef& r) const;

private:
    Rat c2_;
    std::map<std::pair<int, ShiftedDyadicCube>, Box> map_;
};

// Order relations (the displayed clauses).
bool tile_le(const Tile& a, const Tile& b);
bool tile_le_pt(const Tile& a, const DyadicCube& I, const std::vector<Rat>& xi);
bool tile_lesssim(const Collection& col, const TreeCtx& ctx, const TileRef& a,
                  const TileRef& b);
bool tile_lesssim_pt(const Collection& col, const TreeCtx& ctx, const TileRef& a,
                     const DyadicCube& I, const std::vector<Rat>& xi);
bool vt_lesssim(const Collection& col, const TreeCtx& ctx, int a, int b);
bool vt_lesssim_pt(const Collection& col, const TreeCtx& ctx, int a, const DyadicCube& I,
                   const std::vector<std::vector<Rat>>& xi);

struct JTree {
    int j = -1;
    std::vector<TileRef> tiles;
    DyadicCube top_I;
    std::vector<Rat> top_xi;
    std::optional<std::pair<int, int>> lacunary;  // axis (0-based), sign (+1/-1)
};

// Candidate tops: spatial cubes are the member intervals and their dyadic
// ancestors, frequency points one representative per cell of the coordinate
// arrangement of all C2 o Xi / 10 Xi endpoints and centers.
struct CandidateTops {
    std::vector<DyadicCube> spatial;
    std::vector<std::vector<Rat>> frequency;  // per-axis candidate values
};
CandidateTops candidate_tops(const Collection& col, const TreeCtx& ctx,
                             std::span<const TileRef> tiles);

struct MassResult {
    Rat mass2;  // exact square of the mass
    std::optional<DyadicCube> arg_I;
    std::vector<Rat> arg_xi;
};
MassResult mass(const Collection& col, const TreeCtx& ctx, std::span<const TileRef> tiles,
                const CoefTable& coef);

struct SelectionResult {
    std::vector<JTree> selected;    // the (k,sign)-lacunary trees, in order
    std::vector<JTree> companions;  // parallel to selected
    std::vector<TileRef> residual;
};
SelectionResult select_trees(const Collection& col, const TreeCtx& ctx,
                             std::span<const TileRef> tiles, const CoefTable& coef,
                             const Rat& lambda, int axis, int sign, const Rat& c_d);

struct Forest {
    std::vector<JTree> trees;     // selected trees merged with companions
    std::vector<JTree> lacunary;  // the strongly disjoint lacunary parts
};

struct MassPartition {
    Forest forest;                 // P'
    std::vector<TileRef> residual; // P''
};
MassPartition mass_partition(const Collection& col, const TreeCtx& ctx,
                             std::span<const TileRef> tiles, const CoefTable& coef,
                             const Rat& lambda, const Rat& c_d);

struct LevelForest {
    Rat lambda;  // dyadic level; 0 marks the zero-coefficient remainder
    Forest forest;
};
struct Decomposition {
    std::vector<LevelForest> levels;
    std::map<TileRef, std::pair<size_t, size_t>> assignment;  // tile -> (level, tree)
};
Decomposition forest_decompose(const Collection& col, const TreeCtx& ctx,
                               std::span<const TileRef> tiles, const CoefTable& coef,
                               const Rat& c_d);

bool strongly_disjoint_check(const Collection& col, std::span<const JTree> trees);

// Exact L^p norm of the counting function N_F = sum 1_{I_T}.
double counting_lp(std::span<const JTree> trees, double p);
GridFunction counting_function(std::span<const JTree> trees, const Box& domain, int n);

// Sum over a vector tree of |I|^{1-n/2} prod_j |coef|, and the tree-estimate
// comparison value |I_T| prod_j M_j.
struct TreeSumResult {
    double sum = 0.0;
    double bound = 0.0;  // |I_T| prod_j mass_j
};
TreeSumResult tree_sum(const Collection& col, const TreeCtx& ctx, std::span<const int> vts,
                       const CoefTable& coef);

struct BesselResult {
    double ratio = 0.0;           // sum of |coef|^2 over the forest / ||f||_2^2
    double hypothesis_ratio = 0.0;  // sup/inf in the regularity hypothesis
};
// Throws HypothesisViolated when the regularity hypothesis exceeds hyp_bound.
BesselResult bessel_ratio(const Collection& col, std::span<const JTree> lacunary_trees,
                          const CoefTable& coef, double f_l2_sq, double hyp_bound);

}  // namespace tfwave
