#pragma once

#include "tfwave/errors.hpp"
#include "tfwave/ratmatrix.hpp"
#include "tfwave/rational.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

namespace tfwave {

// Axis-aligned half-open box, one interval per coordinate. All arithmetic on
// boxes is exact. The metric is the sup-metric throughout.
struct Box {
    std::vector<Interval> sides;

    Box() = default;
    explicit Box(std::vector<Interval> s) : sides(std::move(s)) {}

    size_t dim() const { return sides.size(); }
    bool is_cube() const;
    Rat side() const;  // requires is_cube()
    std::vector<Rat> center() const;
    Rat volume() const;

    bool contains(const std::vector<Rat>& p) const;
    bool contains(const Box& o) const;
    bool strictly_contains(const Box& o) const;
    bool intersects(const Box& o) const;

    // C*Q: same center, side lengths scaled by c.
    Box dilate(const Rat& c) const;

    bool operator==(const Box& o) const { return sides == o.sides; }
};

// Sup-metric distance between the closures of two boxes.
Rat distance(const Box& a, const Box& b);

// 2^level * ([0,1)^d + corner)
struct DyadicCube {
    long level = 0;
    std::vector<long long> corner;

    DyadicCube() = default;
    DyadicCube(long lvl, std::vector<long long> z) : level(lvl), corner(std::move(z)) {}

    size_t dim() const { return corner.size(); }
    Rat side() const { return pow2(level); }
    Box to_box() const;
    std::vector<Rat> center() const;
    Rat volume() const { return pow2(level * static_cast<long>(dim())); }

    bool contains(const DyadicCube& o) const;
    bool contains_point(const std::vector<Rat>& p) const;
    DyadicCube parent() const;
    DyadicCube ancestor_at(long lvl) const;
    std::vector<DyadicCube> children() const;

    auto operator<=>(const DyadicCube& o) const = default;
};

// 2^level * ([0,1)^d + corner + shift/3), shift components in {0,1,2}.
struct ShiftedDyadicCube {
    long level = 0;
    std::vector<long long> corner;
    std::vector<int> shift;  // thirds: 0 -> 0, 1 -> 1/3, 2 -> 2/3

    ShiftedDyadicCube() = default;
    ShiftedDyadicCube(long lvl, std::vector<long long> z, std::vector<int> sh);

    size_t dim() const { return corner.size(); }
    Rat side() const { return pow2(level); }
    Box to_box() const;
    std::vector<Rat> center() const;

    // A shifted dyadic cube of twice the side containing this one; exists for
    // every cube, chosen deterministically by the covering construction.
    ShiftedDyadicCube parent() const;

    auto operator<=>(const ShiftedDyadicCube& o) const = default;
};

// The smallest shifted dyadic cube produced by the per-coordinate covering
// construction: rescale so the side lies in [1/4, 1/2), then take the largest
// z with z/3 <= left endpoint. The result contains q and has side in
// (2 s(q), 4 s(q)].
ShiftedDyadicCube shifted_cover(const Box& q);

// Per-coordinate three-group classification of shifted dyadic cubes; cubes
// with equal keys form a grid. Key entries are in {0,1,2}.
std::vector<int> grid_class(const ShiftedDyadicCube& c);

// Groups the cubes so that each group is a grid (at most 3^d groups).
std::vector<std::vector<ShiftedDyadicCube>> split_into_grids(
    const std::vector<ShiftedDyadicCube>& cubes);

bool is_grid(const std::vector<Box>& cubes);
bool is_central_grid(const std::vector<Box>& cubes, const Rat& W);
bool is_sparse(const std::vector<Box>& cubes, const Rat& L);

// Greedy centralization of an L-sparse finite collection: returns G(A) per
// input cube with A subset G(A) subset 2A, forming an L^(1/2)-central grid.
// min_L is the configurable floor on L (default 10^4).
std::vector<Box> centralize(const std::vector<Box>& cubes, const Rat& L,
                            const Rat& min_L = Rat(10000));

struct Enclosure {
    Rat lower, upper;
};

// Sup-metric distance from the closure of box a to the linear span of the
// rows of `basis` (in R^dim). Exact: the enclosure has zero width.
Enclosure distance_to_subspace(const Box& a, const RatMatrix& basis);

struct WhitneyCube {
    DyadicCube cube;
    Rat dist_lower, dist_upper;  // enclosure of d(Q, subspace)
    bool top_level = false;      // no parent inside the window (far field)
};

struct WhitneyResult {
    std::vector<WhitneyCube> cubes;
    Rat dropped_volume;      // volume near the subspace cut off below l_min
    double ratio_min = 0.0;  // measured min/max of dist/(C1*s(Q))
    double ratio_max = 0.0;
};

// Whitney decomposition of `window` away from the row span of `basis`:
// a cube is kept once d(Q, span) >= C1 * s(Q), splitting down to l_min.
// The window must be tileable by dyadic cubes of level l_max.
WhitneyResult whitney_decompose(const RatMatrix& basis, const Box& window, long l_min,
                                long l_max, const Rat& C1);

// Tile: spatial dyadic cube x frequency shifted dyadic cube, dual scales.
struct Tile {
    DyadicCube I;
    ShiftedDyadicCube Xi;

    Tile() = default;
    Tile(DyadicCube i, ShiftedDyadicCube xi);

    auto operator<=>(const Tile& o) const = default;
};

// n tiles sharing one spatial cube (so all frequency levels agree).
struct VectorTile {
    DyadicCube I;
    std::vector<ShiftedDyadicCube> Xi;  // one per coordinate index j

    VectorTile() = default;
    VectorTile(DyadicCube i, std::vector<ShiftedDyadicCube> xi);

    size_t arity() const { return Xi.size(); }
    Tile component(size_t j) const { return Tile(I, Xi[j]); }
    // Frequency box of the full vector tile, as a box in R^(d*n).
    Box frequency_box() const;

    auto operator<=>(const VectorTile& o) const = default;
};

// Splits vector tiles into groups such that within each group every
// per-coordinate frequency family is a C3-sparse grid. The number of groups
// depends only on (n, d, C3).
std::vector<std::vector<VectorTile>> sparsify(const std::vector<VectorTile>& tiles,
                                              const Rat& C3);

}  // namespace tfwave
