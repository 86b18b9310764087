#include "tfwave/geometry.hpp"

#include "tfwave/lp.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <omp.h>

namespace tfwave {

bool Box::is_cube() const {
    if (sides.empty()) return false;
    Rat s = sides[0].length();
    for (const auto& iv : sides)
        if (iv.length() != s) return false;
    return true;
}

Rat Box::side() const {
    assert(is_cube());
    return sides[0].length();
}

std::vector<Rat> Box::center() const {
    std::vector<Rat> c;
    c.reserve(sides.size());
    for (const auto& iv : sides) c.push_back(iv.center());
    return c;
}

Rat Box::volume() const {
    Rat v = 1;
    for (const auto& iv : sides) v *= iv.length();
    return v;
}

bool Box::contains(const std::vector<Rat>& p) const {
    assert(p.size() == sides.size());
    for (size_t i = 0; i < sides.size(); ++i)
        if (!sides[i].contains(p[i])) return false;
    return true;
}

bool Box::contains(const Box& o) const {
    assert(o.dim() == dim());
    for (size_t i = 0; i < sides.size(); ++i)
        if (!sides[i].contains(o.sides[i])) return false;
    return true;
}

bool Box::strictly_contains(const Box& o) const { return contains(o) && !(*this == o); }

bool Box::intersects(const Box& o) const {
    assert(o.dim() == dim());
    for (size_t i = 0; i < sides.size(); ++i)
        if (!sides[i].intersects(o.sides[i])) return false;
    return true;
}

Box Box::dilate(const Rat& c) const {
    std::vector<Interval> s;
    s.reserve(sides.size());
    for (const auto& iv : sides) s.push_back(iv.dilate(c));
    return Box(std::move(s));
}

Rat distance(const Box& a, const Box& b) {
    assert(a.dim() == b.dim());
    Rat d = 0;
    for (size_t i = 0; i < a.dim(); ++i) {
        Rat g = a.sides[i].gap(b.sides[i]);
        if (g > d) d = g;
    }
    return d;
}

Box DyadicCube::to_box() const {
    Rat s = side();
    std::vector<Interval> iv;
    iv.reserve(corner.size());
    for (long long z : corner) iv.emplace_back(s * to_rat(z), s * to_rat(z + 1));
    return Box(std::move(iv));
}

std::vector<Rat> DyadicCube::center() const {
    Rat s = side();
    std::vector<Rat> c;
    c.reserve(corner.size());
    for (long long z : corner) c.push_back(s * (to_rat(z) + Rat(1, 2)));
    return c;
}

namespace {
inline long long floor_shift(long long z, long k) {
    // floor(z / 2^k) for k >= 0; arithmetic shift handles negatives.
    return z >> k;
}
}  // namespace

bool DyadicCube::contains(const DyadicCube& o) const {
    assert(o.dim() == dim());
    if (o.level > level) return false;
    long k = level - o.level;
    for (size_t i = 0; i < corner.size(); ++i)
        if (floor_shift(o.corner[i], k) != corner[i]) return false;
    return true;
}

bool DyadicCube::contains_point(const std::vector<Rat>& p) const {
    return to_box().contains(p);
}

DyadicCube DyadicCube::parent() const { return ancestor_at(level + 1); }

DyadicCube DyadicCube::ancestor_at(long lvl) const {
    assert(lvl >= level);
    long k = lvl - level;
    std::vector<long long> z(corner.size());
    for (size_t i = 0; i < corner.size(); ++i) z[i] = floor_shift(corner[i], k);
    return DyadicCube(lvl, std::move(z));
}

std::vector<DyadicCube> DyadicCube::children() const {
    size_t d = dim();
    std::vector<DyadicCube> out;
    out.reserve(size_t(1) << d);
    for (size_t mask = 0; mask < (size_t(1) << d); ++mask) {
        std::vector<long long> z(d);
        for (size_t i = 0; i < d; ++i) z[i] = 2 * corner[i] + ((mask >> i) & 1);
        out.emplace_back(level - 1, std::move(z));
    }
    return out;
}

ShiftedDyadicCube::ShiftedDyadicCube(long lvl, std::vector<long long> z, std::vector<int> sh)
    : level(lvl), corner(std::move(z)), shift(std::move(sh)) {
    if (corner.size() != shift.size()) throw std::invalid_argument("shifted cube: dim mismatch");
    for (int s : shift)
        if (s < 0 || s > 2) throw std::invalid_argument("shifted cube: shift not in {0,1/3,2/3}");
}

Box ShiftedDyadicCube::to_box() const {
    Rat s = side();
    std::vector<Interval> iv;
    iv.reserve(corner.size());
    for (size_t i = 0; i < corner.size(); ++i) {
        Rat lo = s * (to_rat(corner[i]) + Rat(shift[i], 3));
        iv.emplace_back(lo, lo + s);
    }
    return Box(std::move(iv));
}

std::vector<Rat> ShiftedDyadicCube::center() const {
    Rat s = side();
    std::vector<Rat> c;
    c.reserve(corner.size());
    for (size_t i = 0; i < corner.size(); ++i)
        c.push_back(s * (to_rat(corner[i]) + Rat(shift[i], 3) + Rat(1, 2)));
    return c;
}

ShiftedDyadicCube ShiftedDyadicCube::parent() const { return shifted_cover(to_box()); }

ShiftedDyadicCube shifted_cover(const Box& q) {
    if (!q.is_cube() || q.side() <= 0)
        throw std::invalid_argument("shifted_cover: input must be a cube with positive side");
    // Rescale so the side lands in (1/4, 1/2]: smallest k with 2^k >= 2 s(q).
    Rat s = q.side();
    long k = dyadic_ceil_log2(2 * s);
    Rat scale = pow2(k);
    size_t d = q.dim();
    std::vector<long long> corner(d);
    std::vector<int> shift(d);
    for (size_t i = 0; i < d; ++i) {
        // Largest z with z/3 <= a, where a is the rescaled left endpoint.
        Rat a3 = 3 * q.sides[i].lo / scale;
        Int zf;
        mpz_fdiv_q(zf.get_mpz_t(), a3.get_num().get_mpz_t(), a3.get_den().get_mpz_t());
        if (!zf.fits_slong_p()) throw std::invalid_argument("shifted_cover: corner overflow");
        long long z = zf.get_si();
        long long zq = (z >= 0) ? z / 3 : -((-z + 2) / 3);
        int r = static_cast<int>(z - 3 * zq);
        corner[i] = zq;
        shift[i] = r;
    }
    ShiftedDyadicCube out(k, std::move(corner), std::move(shift));
    assert(out.to_box().contains(q));
    return out;
}

std::vector<int> grid_class(const ShiftedDyadicCube& c) {
    int parity = static_cast<int>(((c.level % 2) + 2) % 2);
    std::vector<int> key(c.dim());
    for (size_t i = 0; i < c.dim(); ++i) {
        int s = c.shift[i];
        if (s == 0)
            key[i] = 0;
        else if (s == 1)
            key[i] = (parity == 1) ? 1 : 2;
        else
            key[i] = (parity == 1) ? 2 : 1;
    }
    return key;
}

std::vector<std::vector<ShiftedDyadicCube>> split_into_grids(
    const std::vector<ShiftedDyadicCube>& cubes) {
    std::map<std::vector<int>, std::vector<ShiftedDyadicCube>> groups;
    for (const auto& c : cubes) groups[grid_class(c)].push_back(c);
    std::vector<std::vector<ShiftedDyadicCube>> out;
    out.reserve(groups.size());
    for (auto& [k, v] : groups) out.push_back(std::move(v));
    return out;
}

bool is_grid(const std::vector<Box>& cubes) {
    for (size_t i = 0; i < cubes.size(); ++i)
        for (size_t j = i + 1; j < cubes.size(); ++j) {
            if (!cubes[i].intersects(cubes[j])) continue;
            if (!cubes[i].contains(cubes[j]) && !cubes[j].contains(cubes[i])) return false;
        }
    return true;
}

bool is_central_grid(const std::vector<Box>& cubes, const Rat& W) {
    if (!is_grid(cubes)) return false;
    for (size_t i = 0; i < cubes.size(); ++i)
        for (size_t j = 0; j < cubes.size(); ++j) {
            if (i == j) continue;
            if (cubes[j].strictly_contains(cubes[i]) &&
                !cubes[j].contains(cubes[i].dilate(W)))
                return false;
        }
    return true;
}

bool is_sparse(const std::vector<Box>& cubes, const Rat& L) {
    for (size_t i = 0; i < cubes.size(); ++i)
        for (size_t j = 0; j < cubes.size(); ++j) {
            if (i == j) continue;
            Rat si = cubes[i].side(), sj = cubes[j].side();
            if (si > sj && si <= L * sj) return false;
            if (si == sj && !(cubes[i] == cubes[j]) && distance(cubes[i], cubes[j]) <= L * si)
                return false;
        }
    return true;
}

namespace {

// Exact square root when L is a square of a rational, otherwise the smallest
// power of two at or above sqrt(L).
Rat sqrt_at_least(const Rat& L) {
    Int num = L.get_num(), den = L.get_den();
    if (mpz_perfect_square_p(num.get_mpz_t()) && mpz_perfect_square_p(den.get_mpz_t())) {
        Int rn, rd;
        mpz_sqrt(rn.get_mpz_t(), num.get_mpz_t());
        mpz_sqrt(rd.get_mpz_t(), den.get_mpz_t());
        return Rat(rn, rd);
    }
    long k = 0;
    while (pow2(2 * k) < L) ++k;
    return pow2(k);
}

// Smallest cube containing a set of boxes (bounding box expanded about its
// center so all sides equal the longest one).
Box bounding_cube(const std::vector<const Box*>& parts) {
    assert(!parts.empty());
    size_t d = parts[0]->dim();
    std::vector<Rat> lo(d), hi(d);
    for (size_t i = 0; i < d; ++i) {
        lo[i] = parts[0]->sides[i].lo;
        hi[i] = parts[0]->sides[i].hi;
    }
    for (const Box* b : parts)
        for (size_t i = 0; i < d; ++i) {
            if (b->sides[i].lo < lo[i]) lo[i] = b->sides[i].lo;
            if (b->sides[i].hi > hi[i]) hi[i] = b->sides[i].hi;
        }
    Rat maxside = 0;
    for (size_t i = 0; i < d; ++i)
        if (hi[i] - lo[i] > maxside) maxside = hi[i] - lo[i];
    std::vector<Interval> iv;
    iv.reserve(d);
    for (size_t i = 0; i < d; ++i) {
        Rat pad = (maxside - (hi[i] - lo[i])) / 2;
        iv.emplace_back(lo[i] - pad, lo[i] - pad + maxside);
    }
    return Box(std::move(iv));
}

void centralize_rec(const std::vector<Box>& cubes, std::vector<size_t> idx, const Rat& W,
                    std::vector<Box>& out) {
    if (idx.empty()) return;
    // Peel one largest cube (ties by position, lexicographically smallest).
    size_t pick = 0;
    for (size_t i = 1; i < idx.size(); ++i) {
        const Box& a = cubes[idx[i]];
        const Box& b = cubes[idx[pick]];
        int c = cmp(a.side(), b.side());
        if (c > 0) pick = i;
        else if (c == 0) {
            std::vector<Rat> ca = a.center(), cb = b.center();
            if (lex_less(ca, cb)) pick = i;
        }
    }
    size_t a1 = idx[pick];
    idx.erase(idx.begin() + static_cast<long>(pick));
    centralize_rec(cubes, idx, W, out);

    // Grow G(A1) scale by scale: absorb W-dilates of already-centralized
    // cubes that come within 10 of their own scale.
    std::vector<Rat> scales;
    for (size_t i : idx) {
        Rat s = cubes[i].side();
        if (std::find(scales.begin(), scales.end(), s) == scales.end()) scales.push_back(s);
    }
    std::sort(scales.begin(), scales.end(), [](const Rat& a, const Rat& b) { return a > b; });

    Box g = cubes[a1];
    for (const Rat& sk : scales) {
        std::vector<const Box*> parts;
        parts.push_back(&g);
        std::vector<Box> dilated;
        for (size_t i : idx) {
            if (cubes[i].side() != sk) continue;
            if (distance(out[i], g) <= 10 * sk) dilated.push_back(out[i].dilate(W));
        }
        for (const Box& b : dilated) parts.push_back(&b);
        if (parts.size() > 1) g = bounding_cube(parts);
    }
    out[a1] = g;
}

}  // namespace

std::vector<Box> centralize(const std::vector<Box>& cubes, const Rat& L, const Rat& min_L) {
    if (L < min_L) throw NotSparse("centralize: L below configured floor");
    if (!is_sparse(cubes, L)) throw NotSparse("centralize: input is not L-sparse");
    Rat W = sqrt_at_least(L);

    // Identical cubes share one hull; run on the distinct cubes.
    std::vector<Box> uniq;
    std::vector<size_t> where(cubes.size());
    for (size_t i = 0; i < cubes.size(); ++i) {
        size_t pos = uniq.size();
        for (size_t u = 0; u < uniq.size(); ++u)
            if (uniq[u] == cubes[i]) {
                pos = u;
                break;
            }
        if (pos == uniq.size()) uniq.push_back(cubes[i]);
        where[i] = pos;
    }

    std::vector<Box> uout(uniq.size());
    std::vector<size_t> idx(uniq.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    centralize_rec(uniq, idx, W, uout);

    std::vector<Box> out(cubes.size());
    for (size_t i = 0; i < cubes.size(); ++i) out[i] = uout[where[i]];

    for (size_t i = 0; i < cubes.size(); ++i) {
        if (!(out[i].contains(cubes[i]) && cubes[i].dilate(Rat(2)).contains(out[i])))
            throw InvariantViolation("centralize: A subset G(A) subset 2A failed");
    }
    if (!is_central_grid(out, W))
        throw InvariantViolation("centralize: output is not a central grid");
    return out;
}

Enclosure distance_to_subspace(const Box& a, const RatMatrix& basis) {
    const size_t D = a.dim();
    const size_t m = basis.rows();
    assert(basis.cols() == D || m == 0);

    // Variables (all >= 0): u_i = x_i - lo_i (box offset, i < D),
    // cp_k, cm_k (subspace coefficients split), t (the distance).
    const size_t nu = D, nc = m, nvars = nu + 2 * nc + 1;
    const size_t tcol = nu + 2 * nc;
    std::vector<std::vector<Rat>> A;
    std::vector<Rat> b;

    for (size_t i = 0; i < D; ++i) {
        // x_i - v_i <= t  and  v_i - x_i <= t
        std::vector<Rat> row1(nvars, Rat(0)), row2(nvars, Rat(0));
        row1[i] = 1;
        row2[i] = -1;
        for (size_t k = 0; k < m; ++k) {
            row1[nu + k] = -basis.at(k, i);
            row1[nu + nc + k] = basis.at(k, i);
            row2[nu + k] = basis.at(k, i);
            row2[nu + nc + k] = -basis.at(k, i);
        }
        row1[tcol] = -1;
        row2[tcol] = -1;
        A.push_back(std::move(row1));
        b.push_back(-a.sides[i].lo);
        A.push_back(std::move(row2));
        b.push_back(a.sides[i].lo);
        // u_i <= hi_i - lo_i
        std::vector<Rat> row3(nvars, Rat(0));
        row3[i] = 1;
        A.push_back(std::move(row3));
        b.push_back(a.sides[i].length());
    }

    std::vector<Rat> cost(nvars, Rat(0));
    cost[tcol] = 1;
    auto opt = solve_lp_min(A, b, cost);
    assert(opt.has_value());
    return Enclosure{*opt, *opt};
}

namespace {

void whitney_visit(const DyadicCube& q, const RatMatrix& basis, long l_min, const Rat& C1,
                   bool top, std::vector<WhitneyCube>& kept, Rat& dropped) {
    Enclosure e = distance_to_subspace(q.to_box(), basis);
    if (e.lower >= C1 * q.side()) {
        kept.push_back(WhitneyCube{q, e.lower, e.upper, top});
        return;
    }
    if (q.level > l_min) {
        for (const DyadicCube& c : q.children())
            whitney_visit(c, basis, l_min, C1, false, kept, dropped);
    } else {
        dropped += q.volume();
    }
}

}  // namespace

WhitneyResult whitney_decompose(const RatMatrix& basis, const Box& window, long l_min,
                                long l_max, const Rat& C1) {
    const size_t D = window.dim();
    if (C1 < 4) throw std::invalid_argument("whitney_decompose: C1 must be >= 4");
    if (basis.rows() > 0 && basis.rank() == D)
        throw DegenerateProjection("whitney_decompose: subspace fills the window");

    // Tile the window by level-l_max cubes; window must be aligned.
    Rat s = pow2(l_max);
    std::vector<long long> lo(D), cnt(D);
    for (size_t i = 0; i < D; ++i) {
        Rat q0 = window.sides[i].lo / s, q1 = window.sides[i].hi / s;
        if (q0.get_den() != 1 || q1.get_den() != 1)
            throw std::invalid_argument("whitney_decompose: window not aligned at l_max");
        lo[i] = static_cast<long long>(q0.get_num().get_si());
        cnt[i] = static_cast<long long>(q1.get_num().get_si()) - lo[i];
        if (cnt[i] <= 0) throw std::invalid_argument("whitney_decompose: empty window");
    }
    long long total = 1;
    for (size_t i = 0; i < D; ++i) total *= cnt[i];

    std::vector<DyadicCube> tops;
    tops.reserve(static_cast<size_t>(total));
    for (long long t = 0; t < total; ++t) {
        long long rem = t;
        std::vector<long long> z(D);
        for (size_t i = 0; i < D; ++i) {
            z[i] = lo[i] + rem % cnt[i];
            rem /= cnt[i];
        }
        tops.emplace_back(l_max, std::move(z));
    }

    std::vector<std::vector<WhitneyCube>> kept_per(tops.size());
    std::vector<Rat> dropped_per(tops.size(), Rat(0));
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(tops.size()); ++i)
        whitney_visit(tops[static_cast<size_t>(i)], basis, l_min, C1, true,
                      kept_per[static_cast<size_t>(i)], dropped_per[static_cast<size_t>(i)]);

    WhitneyResult res;
    res.dropped_volume = 0;
    for (size_t i = 0; i < tops.size(); ++i) {
        res.dropped_volume += dropped_per[i];
        for (auto& w : kept_per[i]) res.cubes.push_back(std::move(w));
    }
    std::sort(res.cubes.begin(), res.cubes.end(),
              [](const WhitneyCube& a, const WhitneyCube& b) { return a.cube < b.cube; });

    bool first = true;
    for (const auto& w : res.cubes) {
        double r = rat_to_double(w.dist_lower / (C1 * w.cube.side()));
        if (first || r < res.ratio_min) res.ratio_min = r;
        if (first || r > res.ratio_max) res.ratio_max = r;
        first = false;
    }
    return res;
}

Tile::Tile(DyadicCube i, ShiftedDyadicCube xi) : I(std::move(i)), Xi(std::move(xi)) {
    if (I.dim() != Xi.dim()) throw std::invalid_argument("Tile: dimension mismatch");
    if (I.level + Xi.level != 0) throw std::invalid_argument("Tile: s(I)*s(Xi) != 1");
}

VectorTile::VectorTile(DyadicCube i, std::vector<ShiftedDyadicCube> xi)
    : I(std::move(i)), Xi(std::move(xi)) {
    if (Xi.empty()) throw std::invalid_argument("VectorTile: empty");
    for (const auto& x : Xi) {
        if (x.dim() != I.dim()) throw std::invalid_argument("VectorTile: dimension mismatch");
        if (I.level + x.level != 0) throw std::invalid_argument("VectorTile: scale mismatch");
    }
}

Box VectorTile::frequency_box() const {
    std::vector<Interval> iv;
    iv.reserve(Xi.size() * I.dim());
    for (const auto& x : Xi) {
        Box b = x.to_box();
        for (auto& s : b.sides) iv.push_back(std::move(s));
    }
    return Box(std::move(iv));
}

namespace {

bool group_is_valid(const std::vector<VectorTile>& g, const Rat& C3) {
    if (g.empty()) return true;
    size_t n = g[0].arity();
    for (size_t j = 0; j < n; ++j) {
        std::vector<Box> freqs;
        freqs.reserve(g.size());
        for (const auto& t : g) freqs.push_back(t.Xi[j].to_box());
        if (!is_sparse(freqs, C3) || !is_grid(freqs)) return false;
    }
    return true;
}

}  // namespace

std::vector<std::vector<VectorTile>> sparsify(const std::vector<VectorTile>& tiles,
                                              const Rat& C3) {
    if (C3 >= pow2(60)) throw std::invalid_argument("sparsify: C3 too large");
    long K = dyadic_ceil_log2(C3);
    if (pow2(K) == C3) ++K;
    Int mfloor;
    mpz_fdiv_q(mfloor.get_mpz_t(), C3.get_num().get_mpz_t(), C3.get_den().get_mpz_t());
    long long M = mfloor.get_si() + 2;

    // Pigeonhole key per coordinate index: grid class, level mod K, corner
    // mod M. Tiles sharing a key always form a sparse grid in every j.
    std::map<std::vector<long long>, std::vector<VectorTile>> groups;
    for (const auto& t : tiles) {
        std::vector<long long> key;
        for (const auto& xi : t.Xi) {
            for (int g : grid_class(xi)) key.push_back(g);
            key.push_back(((xi.level % K) + K) % K);
            for (long long z : xi.corner) key.push_back(((z % M) + M) % M);
        }
        groups[key].push_back(t);
    }
    std::vector<std::vector<VectorTile>> out;
    out.reserve(groups.size());
    for (auto& [k, v] : groups) out.push_back(std::move(v));

    // Greedy merge in key order: fewer groups when the input is already
    // sparse, still bounded by the pigeonhole count.
    std::vector<std::vector<VectorTile>> merged;
    for (auto& g : out) {
        bool placed = false;
        for (auto& mg : merged) {
            std::vector<VectorTile> candidate = mg;
            candidate.insert(candidate.end(), g.begin(), g.end());
            if (group_is_valid(candidate, C3)) {
                mg = std::move(candidate);
                placed = true;
                break;
            }
        }
        if (!placed) merged.push_back(std::move(g));
    }
    return merged;
}

}  // namespace tfwave
