#include "tfwave/trees.hpp"

#include "tfwave/errors.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <set>
#include <omp.h>

namespace tfwave {

CoefTable CoefTable::from_values(const std::vector<std::vector<Complex>>& v) {
    CoefTable t;
    t.value = v;
    t.abs2.resize(v.size());
    t.abs2_rat.resize(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        t.abs2[i].resize(v[i].size());
        t.abs2_rat[i].resize(v[i].size());
        for (size_t j = 0; j < v[i].size(); ++j) {
            double a2 = std::norm(v[i][j]);
            t.abs2[i][j] = a2;
            t.abs2_rat[i][j] = rat_from_double(a2);
        }
    }
    return t;
}

TreeCtx TreeCtx::build(const Collection& col, const Rat& C2, const Rat& C3,
                       const Rat& centralize_floor) {
    TreeCtx ctx;
    ctx.c2_ = C2;
    int n = col.arity();
    Rat L;
    {
        // L = C3^(2/3) when C3 is a power of two with exponent divisible by
        // three, otherwise the nearest power of two at or below that.
        long k = dyadic_ceil_log2(C3);
        if (pow2(k) != C3) --k;
        L = pow2(2 * k / 3);
    }
    for (int j = 0; j < n; ++j) {
        std::set<ShiftedDyadicCube> distinct;
        for (const auto& vt : col.tiles) distinct.insert(vt.Xi[static_cast<size_t>(j)]);
        std::vector<ShiftedDyadicCube> cubes(distinct.begin(), distinct.end());
        std::vector<Box> dilated;
        dilated.reserve(cubes.size());
        for (const auto& c : cubes) dilated.push_back(c.to_box().dilate(C2));
        auto central = centralize(dilated, L, centralize_floor);
        for (size_t i = 0; i < cubes.size(); ++i)
            ctx.map_.emplace(std::make_pair(j, cubes[i]), central[i]);
    }
    return ctx;
}

const Box& TreeCtx::c2circ(const Collection& col, const TileRef& r) const {
    auto it =
        map_.find({r.j, col.tiles[static_cast<size_t>(r.vt)].Xi[static_cast<size_t>(r.j)]});
    assert(it != map_.end());
    return it->second;
}

bool tile_le(const Tile& a, const Tile& b) {
    return b.I.contains(a.I) && a.Xi.to_box().contains(b.Xi.to_box());
}

bool tile_le_pt(const Tile& a, const DyadicCube& I, const std::vector<Rat>& xi) {
    return I.contains(a.I) && a.Xi.to_box().contains(xi);
}

bool tile_lesssim(const Collection& col, const TreeCtx& ctx, const TileRef& a,
                  const TileRef& b) {
    assert(a.j == b.j);
    const auto& ta = col.tiles[static_cast<size_t>(a.vt)];
    const auto& tb = col.tiles[static_cast<size_t>(b.vt)];
    if (!tb.I.contains(ta.I)) return false;
    return ctx.c2circ(col, a).contains(ctx.c2circ(col, b));
}

bool tile_lesssim_pt(const Collection& col, const TreeCtx& ctx, const TileRef& a,
                     const DyadicCube& I, const std::vector<Rat>& xi) {
    const auto& ta = col.tiles[static_cast<size_t>(a.vt)];
    if (!I.contains(ta.I)) return false;
    return ctx.c2circ(col, a).contains(xi);
}

bool vt_lesssim(const Collection& col, const TreeCtx& ctx, int a, int b) {
    int n = col.arity();
    for (int j = 0; j < n; ++j)
        if (!tile_lesssim(col, ctx, TileRef{a, j}, TileRef{b, j})) return false;
    return true;
}

bool vt_lesssim_pt(const Collection& col, const TreeCtx& ctx, int a, const DyadicCube& I,
                   const std::vector<std::vector<Rat>>& xi) {
    int n = col.arity();
    for (int j = 0; j < n; ++j)
        if (!tile_lesssim_pt(col, ctx, TileRef{a, j}, I, xi[static_cast<size_t>(j)]))
            return false;
    return true;
}

namespace {

using Bits = std::vector<uint64_t>;

Bits make_bits(size_t n) { return Bits((n + 63) / 64, 0); }
void set_bit(Bits& b, size_t i) { b[i / 64] |= (uint64_t(1) << (i % 64)); }
bool get_bit(const Bits& b, size_t i) { return (b[i / 64] >> (i % 64)) & 1; }
Bits and_bits(const Bits& a, const Bits& b) {
    Bits r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] & b[i];
    return r;
}
bool any_bits(const Bits& b) {
    for (uint64_t w : b)
        if (w) return true;
    return false;
}

std::optional<DyadicCube> common_ancestor(const std::vector<DyadicCube>& cubes, long cap) {
    if (cubes.empty()) return std::nullopt;
    DyadicCube a = cubes[0];
    for (;;) {
        bool all = true;
        for (const auto& c : cubes)
            if (!a.contains(c)) {
                all = false;
                break;
            }
        if (all) return a;
        if (a.level >= cap) return std::nullopt;
        a = a.parent();
    }
}

struct TileGeom {
    DyadicCube I;
    Box c2x;  // C2 o Xi
    Box ten;  // 10 Xi
    std::vector<Rat> cxi;
    double energy = 0.0;
    Rat energy_rat;
};

struct Scratch {
    std::vector<TileRef> tiles;
    std::vector<TileGeom> geom;
    size_t d = 0;

    void build(const Collection& col, const TreeCtx& ctx, std::span<const TileRef> refs,
               const CoefTable& coef) {
        tiles.assign(refs.begin(), refs.end());
        d = col.dim();
        geom.clear();
        geom.reserve(tiles.size());
        for (const auto& r : tiles) {
            Tile t = col.component(r);
            TileGeom g;
            g.I = t.I;
            g.c2x = ctx.c2circ(col, r);
            g.ten = t.Xi.to_box().dilate(Rat(10));
            g.cxi = t.Xi.center();
            if (!coef.abs2.empty()) {
                g.energy = coef.abs2[static_cast<size_t>(r.vt)][static_cast<size_t>(r.j)];
                g.energy_rat =
                    coef.abs2_rat[static_cast<size_t>(r.vt)][static_cast<size_t>(r.j)];
            }
            geom.push_back(std::move(g));
        }
    }

    // Lacunary compatibility of a frequency point with tile i; axis < 0 is
    // the plain lacunary clause without the (k, sign) refinement.
    bool compat(size_t i, const std::vector<Rat>& xi, int axis, int sign) const {
        const TileGeom& g = geom[i];
        if (!g.c2x.contains(xi)) return false;
        bool outside = false;
        for (size_t k = 0; k < d; ++k)
            if (!g.ten.sides[k].contains(xi[k])) outside = true;
        if (!outside) return false;
        if (axis >= 0) {
            size_t k = static_cast<size_t>(axis);
            if (g.ten.sides[k].contains(xi[k])) return false;
            if (sign > 0 ? !(xi[k] < g.cxi[k]) : !(xi[k] > g.cxi[k])) return false;
        }
        return true;
    }
};

std::vector<DyadicCube> spatial_candidates(const Scratch& s) {
    long maxlvl = s.geom[0].I.level;
    for (const auto& g : s.geom) maxlvl = std::max(maxlvl, g.I.level);
    long cap = maxlvl + 80;

    std::set<DyadicCube> out;
    for (const auto& g : s.geom) {
        DyadicCube a = g.I;
        for (;;) {
            out.insert(a);
            bool contains_all = true;
            for (const auto& h : s.geom)
                if (!a.contains(h.I)) {
                    contains_all = false;
                    break;
                }
            if (contains_all || a.level >= cap) break;
            a = a.parent();
        }
    }
    return std::vector<DyadicCube>(out.begin(), out.end());
}

std::vector<std::vector<Rat>> frequency_candidates(const Scratch& s) {
    std::vector<std::vector<Rat>> axes(s.d);
    for (size_t k = 0; k < s.d; ++k) {
        std::set<Rat> vals;
        for (const auto& g : s.geom) {
            vals.insert(g.c2x.sides[k].lo);
            vals.insert(g.c2x.sides[k].hi);
            vals.insert(g.ten.sides[k].lo);
            vals.insert(g.ten.sides[k].hi);
            vals.insert(g.cxi[k]);
        }
        std::vector<Rat> sorted(vals.begin(), vals.end());
        std::vector<Rat> cand;
        cand.push_back(sorted.front() - 1);
        for (size_t i = 0; i < sorted.size(); ++i) {
            cand.push_back(sorted[i]);
            if (i + 1 < sorted.size()) cand.push_back((sorted[i] + sorted[i + 1]) / 2);
        }
        cand.push_back(sorted.back() + 1);
        axes[k] = std::move(cand);
    }
    return axes;
}

struct CubeEnergy {
    DyadicCube cube;
    double energy;
    Rat energy_rat;
};

std::vector<CubeEnergy> cube_energies(const Scratch& s, const Bits& members) {
    std::map<DyadicCube, std::pair<double, Rat>> acc;
    for (size_t i = 0; i < s.tiles.size(); ++i) {
        if (!get_bit(members, i)) continue;
        auto& slot = acc[s.geom[i].I];
        slot.first += s.geom[i].energy;
        slot.second += s.geom[i].energy_rat;
    }
    std::vector<CubeEnergy> out;
    out.reserve(acc.size());
    for (auto& [c, e] : acc) out.push_back(CubeEnergy{c, e.first, e.second});
    return out;
}

// Weak-L1inf quasinorm squared of the tree square function; exact laminar
// level sets, generic numeric type for the double fast path and the exact
// rational fallback.
template <typename Num>
Num weak1inf_sq(const std::vector<CubeEnergy>& cubes, Num (*vol)(const DyadicCube&),
                Num (*en)(const CubeEnergy&)) {
    size_t n = cubes.size();
    std::vector<Num> value(n, Num(0)), measure(n, Num(0));
    for (size_t i = 0; i < n; ++i) {
        measure[i] = vol(cubes[i].cube);
        for (size_t a = 0; a < n; ++a)
            if (cubes[a].cube.contains(cubes[i].cube)) value[i] += en(cubes[a]) / vol(cubes[a].cube);
        for (size_t b = 0; b < n; ++b) {
            if (b == i || !cubes[i].cube.contains(cubes[b].cube)) continue;
            bool maximal = true;
            for (size_t m = 0; m < n; ++m) {
                if (m == i || m == b) continue;
                if (cubes[i].cube.contains(cubes[m].cube) &&
                    cubes[m].cube.contains(cubes[b].cube) &&
                    !(cubes[m].cube == cubes[i].cube) && !(cubes[m].cube == cubes[b].cube)) {
                    maximal = false;
                    break;
                }
            }
            if (maximal) measure[i] -= vol(cubes[b].cube);
        }
    }
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return value[a] > value[b]; });
    Num best(0), cum(0);
    for (size_t oi = 0; oi < n; ++oi) {
        size_t i = order[oi];
        if (measure[i] > Num(0)) cum += measure[i];
        if (oi + 1 < n && value[order[oi + 1]] == value[i]) continue;
        Num cand = value[i] * cum * cum;
        if (cand > best) best = cand;
    }
    return best;
}

double vol_d(const DyadicCube& c) { return rat_to_double(c.volume()); }
double en_d(const CubeEnergy& c) { return c.energy; }
Rat vol_r(const DyadicCube& c) { return c.volume(); }
Rat en_r(const CubeEnergy& c) { return c.energy_rat; }

template <typename F>
void for_each_xi(const std::vector<std::vector<Rat>>& axes, F&& fn) {
    size_t d = axes.size();
    std::vector<size_t> idx(d, 0);
    std::vector<Rat> xi(d);
    for (;;) {
        for (size_t k = 0; k < d; ++k) xi[k] = axes[k][idx[k]];
        fn(xi);
        size_t k = d;
        bool done = true;
        while (k-- > 0) {
            if (++idx[k] < axes[k].size()) {
                done = false;
                break;
            }
            idx[k] = 0;
        }
        if (done) break;
    }
}

}  // namespace

CandidateTops candidate_tops(const Collection& col, const TreeCtx& ctx,
                             std::span<const TileRef> tiles) {
    CandidateTops out;
    if (tiles.empty()) return out;
    Scratch s;
    CoefTable none;
    s.build(col, ctx, tiles, none);
    out.spatial = spatial_candidates(s);
    out.frequency = frequency_candidates(s);
    return out;
}

MassResult mass(const Collection& col, const TreeCtx& ctx, std::span<const TileRef> tiles,
                const CoefTable& coef) {
    MassResult res;
    res.mass2 = 0;
    if (tiles.empty()) return res;

    Scratch s;
    s.build(col, ctx, tiles, coef);
    auto spatial = spatial_candidates(s);
    auto axes = frequency_candidates(s);

    std::vector<Bits> inside(spatial.size());
    std::vector<double> inv_vol(spatial.size());
    for (size_t c = 0; c < spatial.size(); ++c) {
        inside[c] = make_bits(s.tiles.size());
        for (size_t i = 0; i < s.tiles.size(); ++i)
            if (spatial[c].contains(s.geom[i].I)) set_bit(inside[c], i);
        inv_vol[c] = 1.0 / rat_to_double(spatial[c].volume());
    }

    struct Tie {
        size_t cand;
        std::vector<Rat> xi;
    };
    double best = 0.0;
    std::vector<Tie> ties;

    for_each_xi(axes, [&](const std::vector<Rat>& xi) {
        Bits compat = make_bits(s.tiles.size());
        bool nonempty = false;
        for (size_t i = 0; i < s.tiles.size(); ++i)
            if (s.compat(i, xi, -1, 0)) {
                set_bit(compat, i);
                nonempty = true;
            }
        if (!nonempty) return;
        for (size_t c = 0; c < spatial.size(); ++c) {
            double e = 0.0;
            bool any = false;
            for (size_t i = 0; i < s.tiles.size(); ++i)
                if (get_bit(compat, i) && get_bit(inside[c], i)) {
                    e += s.geom[i].energy;
                    any = true;
                }
            if (!any) continue;
            double score = e * inv_vol[c];
            if (score > best * (1.0 + 1e-9)) {
                best = score;
                ties.clear();
                ties.push_back(Tie{c, xi});
            } else if (score > best * (1.0 - 1e-9)) {
                ties.push_back(Tie{c, xi});
            }
        }
    });

    for (const auto& t : ties) {
        Rat e = 0;
        for (size_t i = 0; i < s.tiles.size(); ++i)
            if (get_bit(inside[t.cand], i) && s.compat(i, t.xi, -1, 0))
                e += s.geom[i].energy_rat;
        Rat m2 = e / spatial[t.cand].volume();
        if (m2 > res.mass2) {
            res.mass2 = m2;
            res.arg_I = spatial[t.cand];
            res.arg_xi = t.xi;
        }
    }
    return res;
}

namespace {

struct TreeCand {
    Bits members;
    DyadicCube i_top;
    std::vector<Rat> xi;
    std::vector<CubeEnergy> cubes;
    double w2 = 0.0;
};

}  // namespace

SelectionResult select_trees(const Collection& col, const TreeCtx& ctx,
                             std::span<const TileRef> tiles, const CoefTable& coef,
                             const Rat& lambda, int axis, int sign, const Rat& c_d) {
    SelectionResult out;
    out.residual.assign(tiles.begin(), tiles.end());
    if (tiles.empty()) return out;
    int j = tiles[0].j;

    for (;;) {
        if (out.residual.empty()) break;
        Scratch s;
        s.build(col, ctx, out.residual, coef);
        auto spatial = spatial_candidates(s);
        auto axes = frequency_candidates(s);

        std::vector<Bits> inside(spatial.size());
        for (size_t c = 0; c < spatial.size(); ++c) {
            inside[c] = make_bits(s.tiles.size());
            for (size_t i = 0; i < s.tiles.size(); ++i)
                if (spatial[c].contains(s.geom[i].I)) set_bit(inside[c], i);
        }

        std::map<Bits, TreeCand> trees;
        for_each_xi(axes, [&](const std::vector<Rat>& xi) {
            Bits compat = make_bits(s.tiles.size());
            bool nonempty = false;
            for (size_t i = 0; i < s.tiles.size(); ++i)
                if (s.compat(i, xi, axis, sign)) {
                    set_bit(compat, i);
                    nonempty = true;
                }
            if (!nonempty) return;
            for (size_t c = 0; c < spatial.size(); ++c) {
                Bits members = and_bits(compat, inside[c]);
                if (!any_bits(members)) continue;
                auto it = trees.find(members);
                if (it == trees.end()) {
                    TreeCand tc;
                    tc.members = members;
                    std::vector<DyadicCube> mc;
                    for (size_t i = 0; i < s.tiles.size(); ++i)
                        if (get_bit(members, i)) mc.push_back(s.geom[i].I);
                    auto top = common_ancestor(mc, mc[0].level + 100);
                    if (!top) continue;
                    tc.i_top = *top;
                    tc.xi = xi;
                    trees.emplace(members, std::move(tc));
                } else if (lex_less(xi, it->second.xi)) {
                    it->second.xi = xi;
                }
            }
        });

        const Rat thr = c_d * lambda;
        std::vector<TreeCand*> qualifying;
        for (auto& [key, tc] : trees) {
            tc.cubes = cube_energies(s, tc.members);
            tc.w2 = weak1inf_sq<double>(tc.cubes, vol_d, en_d);
            Rat thr_full = thr * tc.i_top.volume();
            double thr2 = rat_to_double(thr_full * thr_full);
            bool qualifies;
            if (tc.w2 > thr2 * (1.0 + 1e-9)) {
                qualifies = true;
            } else if (tc.w2 < thr2 * (1.0 - 1e-9)) {
                qualifies = false;
            } else {
                qualifies = weak1inf_sq<Rat>(tc.cubes, vol_r, en_r) > thr_full * thr_full;
            }
            if (qualifies) qualifying.push_back(&tc);
        }
        if (qualifying.empty()) break;

        TreeCand* pick = qualifying[0];
        for (TreeCand* tc : qualifying) {
            if (tc == pick) continue;
            int c = cmp(tc->xi[static_cast<size_t>(axis)], pick->xi[static_cast<size_t>(axis)]);
            bool better = (sign > 0) ? c > 0 : c < 0;
            if (!better && c == 0) {
                if (tc->i_top < pick->i_top)
                    better = true;
                else if (tc->i_top == pick->i_top && lex_less(tc->xi, pick->xi))
                    better = true;
            }
            if (better) pick = tc;
        }

        JTree tree;
        tree.j = j;
        tree.top_I = pick->i_top;
        tree.top_xi = pick->xi;
        tree.lacunary = std::make_pair(axis, sign);
        std::vector<size_t> rest_idx;
        for (size_t i = 0; i < s.tiles.size(); ++i) {
            if (get_bit(pick->members, i))
                tree.tiles.push_back(s.tiles[i]);
            else
                rest_idx.push_back(i);
        }

        JTree comp;
        comp.j = j;
        comp.top_I = pick->i_top;
        comp.top_xi = pick->xi;
        std::vector<TileRef> next_residual;
        for (size_t i : rest_idx) {
            if (tile_lesssim_pt(col, ctx, s.tiles[i], pick->i_top, pick->xi))
                comp.tiles.push_back(s.tiles[i]);
            else
                next_residual.push_back(s.tiles[i]);
        }

        out.selected.push_back(std::move(tree));
        out.companions.push_back(std::move(comp));
        out.residual = std::move(next_residual);
    }
    return out;
}

MassPartition mass_partition(const Collection& col, const TreeCtx& ctx,
                             std::span<const TileRef> tiles, const CoefTable& coef,
                             const Rat& lambda, const Rat& c_d) {
    {
        auto m = mass(col, ctx, tiles, coef);
        if (m.mass2 > lambda * lambda)
            throw std::invalid_argument("mass_partition: mass exceeds lambda");
    }
    MassPartition out;
    std::vector<TileRef> cur(tiles.begin(), tiles.end());
    size_t d = col.dim();
    for (size_t k = 0; k < d; ++k) {
        for (int sign : {+1, -1}) {
            auto sel =
                select_trees(col, ctx, cur, coef, lambda, static_cast<int>(k), sign, c_d);
            for (size_t t = 0; t < sel.selected.size(); ++t) {
                out.forest.lacunary.push_back(sel.selected[t]);
                JTree merged = sel.selected[t];
                merged.lacunary.reset();
                for (const auto& r : sel.companions[t].tiles) merged.tiles.push_back(r);
                out.forest.trees.push_back(std::move(merged));
            }
            cur = std::move(sel.residual);
        }
    }
    auto m = mass(col, ctx, cur, coef);
    if (m.mass2 * 4 > lambda * lambda)
        throw MassResidueViolation("mass_partition: residual mass above lambda/2");
    out.residual = std::move(cur);
    return out;
}

Decomposition forest_decompose(const Collection& col, const TreeCtx& ctx,
                               std::span<const TileRef> tiles, const CoefTable& coef,
                               const Rat& c_d) {
    Decomposition out;
    if (tiles.empty()) return out;
    std::vector<TileRef> cur(tiles.begin(), tiles.end());

    auto m = mass(col, ctx, cur, coef);
    Rat lambda = 1;
    if (m.mass2 > 0) {
        long k2 = dyadic_ceil_log2(m.mass2);
        long k = (k2 >= 0) ? (k2 + 1) / 2 : -((-k2) / 2);
        lambda = pow2(k);
    }

    int guard = 0;
    while (!cur.empty()) {
        if (++guard > 300)
            throw InvariantViolation("forest_decompose: level cascade failed to terminate");
        auto m2 = mass(col, ctx, cur, coef);
        if (m2.mass2 == 0) {
            LevelForest zero;
            zero.lambda = 0;
            for (const auto& r : cur) {
                JTree t;
                t.j = r.j;
                t.tiles = {r};
                t.top_I = col.component(r).I;
                t.top_xi = ctx.c2circ(col, r).center();
                zero.forest.trees.push_back(std::move(t));
            }
            out.levels.push_back(std::move(zero));
            break;
        }
        auto part = mass_partition(col, ctx, cur, coef, lambda, c_d);
        if (!part.forest.trees.empty())
            out.levels.push_back(LevelForest{lambda, std::move(part.forest)});
        cur = std::move(part.residual);
        lambda /= 2;
    }

    for (size_t lv = 0; lv < out.levels.size(); ++lv)
        for (size_t t = 0; t < out.levels[lv].forest.trees.size(); ++t)
            for (const auto& r : out.levels[lv].forest.trees[t].tiles)
                out.assignment[r] = {lv, t};
    return out;
}

bool strongly_disjoint_check(const Collection& col, std::span<const JTree> trees) {
    for (size_t a = 0; a < trees.size(); ++a) {
        for (size_t b = 0; b < trees.size(); ++b) {
            if (a == b) continue;
            for (const auto& ra : trees[a].tiles) {
                Tile ta = col.component(ra);
                for (const auto& rb : trees[b].tiles) {
                    Tile tb = col.component(rb);
                    if (!(ta.Xi.level < tb.Xi.level)) continue;
                    if (!ta.Xi.to_box().intersects(tb.Xi.to_box())) continue;
                    if (tb.I.to_box().intersects(trees[a].top_I.to_box())) return false;
                }
            }
        }
    }
    return true;
}

double counting_lp(std::span<const JTree> trees, double p) {
    std::map<DyadicCube, long> mult;
    for (const auto& t : trees) ++mult[t.top_I];
    std::vector<const DyadicCube*> cubes;
    for (const auto& [c, m] : mult) cubes.push_back(&c);
    double total = 0.0;
    for (size_t i = 0; i < cubes.size(); ++i) {
        long value = 0;
        for (size_t a = 0; a < cubes.size(); ++a)
            if (cubes[a]->contains(*cubes[i])) value += mult[*cubes[a]];
        Rat mu = cubes[i]->volume();
        for (size_t b = 0; b < cubes.size(); ++b) {
            if (b == i || !cubes[i]->contains(*cubes[b])) continue;
            bool maximal = true;
            for (size_t m = 0; m < cubes.size(); ++m) {
                if (m == i || m == b) continue;
                if (cubes[i]->contains(*cubes[m]) && cubes[m]->contains(*cubes[b]) &&
                    !(*cubes[m] == *cubes[i]) && !(*cubes[m] == *cubes[b])) {
                    maximal = false;
                    break;
                }
            }
            if (maximal) mu -= cubes[b]->volume();
        }
        if (mu > 0) total += rat_to_double(mu) * std::pow(static_cast<double>(value), p);
    }
    return std::pow(total, 1.0 / p);
}

GridFunction counting_function(std::span<const JTree> trees, const Box& domain, int n) {
    GridFunction out(domain, n);
    for (const auto& t : trees) {
        Box tb = t.top_I.to_box();
        for (size_t flat = 0; flat < out.size(); ++flat) {
            auto p = out.sample_point(out.unflatten(flat));
            if (tb.contains(p)) out.values[flat] += Complex(1.0, 0.0);
        }
    }
    return out;
}

TreeSumResult tree_sum(const Collection& col, const TreeCtx& ctx, std::span<const int> vts,
                       const CoefTable& coef) {
    TreeSumResult res;
    if (vts.empty()) return res;
    int n = col.arity();
    for (int vt : vts) {
        double term = std::pow(rat_to_double(col.tiles[static_cast<size_t>(vt)].I.volume()),
                               1.0 - n / 2.0);
        for (int j = 0; j < n; ++j)
            term *= std::abs(coef.value[static_cast<size_t>(vt)][static_cast<size_t>(j)]);
        res.sum += term;
    }
    std::vector<DyadicCube> cubes;
    for (int vt : vts) cubes.push_back(col.tiles[static_cast<size_t>(vt)].I);
    auto top = common_ancestor(cubes, cubes[0].level + 100);
    double bound = top ? rat_to_double(top->volume()) : 0.0;
    for (int j = 0; j < n; ++j) {
        std::vector<TileRef> refs;
        for (int vt : vts) refs.push_back(TileRef{vt, j});
        auto m = mass(col, ctx, refs, coef);
        bound *= std::sqrt(rat_to_double(m.mass2));
    }
    res.bound = bound;
    return res;
}

BesselResult bessel_ratio(const Collection& col, std::span<const JTree> lacunary_trees,
                          const CoefTable& coef, double f_l2_sq, double hyp_bound) {
    BesselResult res;
    double sup_sq = 0.0, inf_sq = std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (const auto& t : lacunary_trees) {
        double tree_e = 0.0;
        for (const auto& r : t.tiles) {
            double e = coef.abs2[static_cast<size_t>(r.vt)][static_cast<size_t>(r.j)];
            total += e;
            double vol = rat_to_double(col.component(r).I.volume());
            sup_sq = std::max(sup_sq, e / vol);
            tree_e += e;
        }
        inf_sq = std::min(inf_sq, tree_e / rat_to_double(t.top_I.volume()));
    }
    res.ratio = (f_l2_sq > 0) ? total / f_l2_sq : 0.0;
    res.hypothesis_ratio =
        (inf_sq > 0) ? std::sqrt(sup_sq / inf_sq)
                     : (sup_sq > 0 ? std::numeric_limits<double>::infinity() : 0.0);
    if (res.hypothesis_ratio > hyp_bound)
        throw HypothesisViolated("bessel_ratio: regularity hypothesis violated");
    return res;
}

}  // namespace tfwave
