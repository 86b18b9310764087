#include "tfwave/harness.hpp"

#include "tfwave/errors.hpp"
#include "tfwave/lp.hpp"

#include <algorithm>
#include <cassert>
#include <climits>
#include <cmath>
#include <map>
#include <random>
#include <set>

namespace tfwave {

void ModelConfig::validate() const {
    if (!(Rat(1) < C1 && C1 < C2 && C2 < C3))
        throw std::invalid_argument("ModelConfig: need 1 < C1 < C2 < C3");
    if (p.size() + 1 != static_cast<size_t>(gamma.n))
        throw std::invalid_argument("ModelConfig: need n-1 exponents");
    double inv = 0.0;
    for (double pj : p) {
        if (!(pj > 1.0)) throw std::invalid_argument("ModelConfig: p_j > 1");
        inv += 1.0 / pj;
    }
    if (std::abs(inv - 1.0 / q) > 1e-12)
        throw std::invalid_argument("ModelConfig: sum 1/p_j must equal 1/q");
}

namespace {

RatMatrix projected_basis(const Subspace& g) {
    // P_{[n-1]} Gamma as rows in R^{d(n-1)}.
    RatMatrix m(static_cast<size_t>(g.m), static_cast<size_t>((g.n - 1) * g.d));
    for (int i = 0; i < g.m; ++i)
        for (int j = 0; j + 1 < g.n; ++j)
            for (int k = 0; k < g.d; ++k)
                m.at(static_cast<size_t>(i), static_cast<size_t>(j * g.d + k)) =
                    g.basis[static_cast<size_t>(i)][static_cast<size_t>(j)]
                           [static_cast<size_t>(k)];
    return m;
}

RatMatrix full_basis(const Subspace& g) {
    RatMatrix m(static_cast<size_t>(g.m), static_cast<size_t>(g.n * g.d));
    for (int i = 0; i < g.m; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.d; ++k)
                m.at(static_cast<size_t>(i), static_cast<size_t>(j * g.d + k)) =
                    g.basis[static_cast<size_t>(i)][static_cast<size_t>(j)]
                           [static_cast<size_t>(k)];
    return m;
}

long ceil_div_l(long a, long b) { return (a + b - 1) / b; }

}  // namespace

BuildResult build_collection(const ModelConfig& cfg) {
    cfg.validate();
    const Subspace& g = cfg.gamma;
    const int n = g.n, d = g.d;

    if (!check_type1(g).holds) throw Type1Required("build_collection: Gamma fails Type I");

    BuildResult out;
    auto whitney = whitney_decompose(projected_basis(g), cfg.whitney_window, cfg.l_min,
                                     cfg.l_max, cfg.C1);
    out.report.add("whitney_cubes", static_cast<double>(whitney.cubes.size()), 0.0);
    out.report.add("whitney_dropped_volume", rat_to_double(whitney.dropped_volume), 0.0);

    // Frequency tuples: shifted covers of the block cubes plus the closing
    // cube, equalized in scale.
    std::vector<std::vector<ShiftedDyadicCube>> tuples;
    for (const auto& w : whitney.cubes) {
        Box qp = w.cube.to_box();
        std::vector<Box> blocks;
        for (int j = 0; j + 1 < n; ++j) {
            std::vector<Interval> iv(qp.sides.begin() + j * d, qp.sides.begin() + (j + 1) * d);
            blocks.emplace_back(iv);
        }
        // Q_n contains -4 (Q_1 + ... + Q_{n-1}).
        std::vector<Interval> qn(static_cast<size_t>(d), Interval(Rat(0), Rat(0)));
        for (int k = 0; k < d; ++k) {
            Rat lo = 0, hi = 0;
            for (int j = 0; j + 1 < n; ++j) {
                lo += blocks[static_cast<size_t>(j)].sides[static_cast<size_t>(k)].lo;
                hi += blocks[static_cast<size_t>(j)].sides[static_cast<size_t>(k)].hi;
            }
            qn[static_cast<size_t>(k)] = Interval(-4 * hi, -4 * lo);
        }
        blocks.emplace_back(qn);

        std::vector<ShiftedDyadicCube> xis;
        long maxlvl = LONG_MIN;
        for (const auto& b : blocks) {
            auto c = shifted_cover(b);
            maxlvl = std::max(maxlvl, c.level);
            xis.push_back(std::move(c));
        }
        for (auto& x : xis)
            while (x.level < maxlvl) x = x.parent();
        tuples.push_back(std::move(xis));
    }

    // Keep one tile per identical tuple, then enforce the determination
    // hypothesis: any ceil(m/d) components identify the tuple.
    {
        std::set<std::vector<ShiftedDyadicCube>> seen;
        std::vector<std::vector<ShiftedDyadicCube>> uniq;
        for (auto& t : tuples)
            if (seen.insert(t).second) uniq.push_back(std::move(t));
        tuples = std::move(uniq);

        size_t need = static_cast<size_t>(ceil_div_l(g.m, g.d));
        std::vector<std::vector<int>> subsets;
        {
            std::vector<int> cur;
            std::function<void(int)> rec = [&](int start) {
                if (cur.size() == need) {
                    subsets.push_back(cur);
                    return;
                }
                for (int j = start; j <= n; ++j) {
                    cur.push_back(j);
                    rec(j + 1);
                    cur.pop_back();
                }
            };
            rec(1);
        }
        size_t dropped = 0;
        std::vector<std::vector<ShiftedDyadicCube>> kept;
        std::vector<std::map<std::vector<ShiftedDyadicCube>, size_t>> proj(subsets.size());
        for (auto& t : tuples) {
            bool ok = true;
            for (size_t s = 0; s < subsets.size(); ++s) {
                std::vector<ShiftedDyadicCube> key;
                for (int j : subsets[s]) key.push_back(t[static_cast<size_t>(j - 1)]);
                auto it = proj[s].find(key);
                if (it != proj[s].end()) {
                    ok = false;
                    break;
                }
            }
            if (!ok) {
                ++dropped;
                continue;
            }
            for (size_t s = 0; s < subsets.size(); ++s) {
                std::vector<ShiftedDyadicCube> key;
                for (int j : subsets[s]) key.push_back(t[static_cast<size_t>(j - 1)]);
                proj[s].emplace(std::move(key), kept.size());
            }
            kept.push_back(std::move(t));
        }
        out.report.add("dedup_dropped_tuples", static_cast<double>(dropped), 0.0);
        tuples = std::move(kept);
    }

    // Hypothesis 1 and 2 per tuple.
    RatMatrix gb = full_basis(g);
    std::vector<std::vector<ShiftedDyadicCube>> admissible;
    double rmin = 0.0, rmax = 0.0;
    bool first = true;
    for (auto& t : tuples) {
        // Xi intersects Gamma_0: 0 in the Minkowski sum per coordinate.
        bool meets = true;
        for (int k = 0; k < d; ++k) {
            Rat lo = 0, hi = 0;
            for (int j = 0; j < n; ++j) {
                Box b = t[static_cast<size_t>(j)].to_box();
                lo += b.sides[static_cast<size_t>(k)].lo;
                hi += b.sides[static_cast<size_t>(k)].hi;
            }
            if (!(lo <= 0 && 0 < hi)) meets = false;
        }
        if (!meets) continue;

        std::vector<Interval> iv;
        for (const auto& x : t) {
            Box b = x.to_box();
            for (auto& s : b.sides) iv.push_back(s);
        }
        auto enc = distance_to_subspace(Box(iv), gb);
        Rat scale = t[0].side();
        if (enc.lower <= 0) continue;  // degenerate spacing, drop
        double ratio = rat_to_double(enc.lower / (cfg.C1 * scale));
        if (first || ratio < rmin) rmin = ratio;
        if (first || ratio > rmax) rmax = ratio;
        first = false;
        admissible.push_back(std::move(t));
    }
    out.hyp2_ratio_min = rmin;
    out.hyp2_ratio_max = rmax;
    out.report.add("hyp2_ratio_min", rmin, 1.0);
    out.report.add("hyp2_ratio_max", rmax, 1.0);
    if (admissible.empty()) throw EmptyCollection("build_collection: no admissible tuples");

    // Spatial tilings at the dual scale, kept inside the margin.
    std::vector<VectorTile> tiles;
    for (const auto& t : admissible) {
        long flevel = t[0].level;
        Rat side = pow2(-flevel);
        // Corner ranges per axis.
        std::vector<long long> zlo(static_cast<size_t>(d)), zhi(static_cast<size_t>(d));
        bool any = true;
        for (int k = 0; k < d; ++k) {
            Rat lo = cfg.spatial_domain.sides[static_cast<size_t>(k)].lo +
                     cfg.spatial_margin * side;
            Rat hi = cfg.spatial_domain.sides[static_cast<size_t>(k)].hi -
                     cfg.spatial_margin * side;
            Rat zl = lo / side, zh = hi / side;
            Int fl, ce;
            mpz_cdiv_q(fl.get_mpz_t(), zl.get_num().get_mpz_t(), zl.get_den().get_mpz_t());
            mpz_fdiv_q(ce.get_mpz_t(), zh.get_num().get_mpz_t(), zh.get_den().get_mpz_t());
            zlo[static_cast<size_t>(k)] = fl.get_si();
            zhi[static_cast<size_t>(k)] = ce.get_si() - 1;
            if (zlo[static_cast<size_t>(k)] > zhi[static_cast<size_t>(k)]) any = false;
        }
        if (!any) continue;
        std::vector<long long> it(zlo);
        for (;;) {
            tiles.emplace_back(DyadicCube(-flevel, it), t);
            size_t ax = static_cast<size_t>(d);
            bool done = true;
            while (ax-- > 0) {
                if (++it[ax] <= zhi[ax]) {
                    done = false;
                    break;
                }
                it[ax] = zlo[ax];
            }
            if (done) break;
        }
    }
    if (tiles.empty()) throw EmptyCollection("build_collection: window too small");

    // Sparsification: keep the largest group.
    auto groups = sparsify(tiles, cfg.C3);
    out.groups = groups.size();
    size_t best = 0;
    for (size_t i = 1; i < groups.size(); ++i)
        if (groups[i].size() > groups[best].size()) best = i;
    out.collection.tiles = std::move(groups[best]);
    out.report.add("sparsify_groups", static_cast<double>(out.groups), 0.0);
    out.report.add("collection_tiles", static_cast<double>(out.collection.tiles.size()), 0.0);

    // Hypothesis 4 recheck on the kept group.
    for (int j = 0; j < n; ++j) {
        std::vector<Box> freqs;
        for (const auto& vt : out.collection.tiles)
            freqs.push_back(vt.Xi[static_cast<size_t>(j)].to_box());
        if (!is_sparse(freqs, cfg.C3) || !is_grid(freqs))
            throw InvariantViolation("build_collection: sparsified group check failed");
    }
    return out;
}

double discrete_form(const Collection& col, const CoefTable& coef) {
    int n = col.arity();
    double total = 0.0;
    for (size_t vt = 0; vt < col.tiles.size(); ++vt) {
        double term = std::pow(rat_to_double(col.tiles[vt].I.volume()), 1.0 - n / 2.0);
        for (int j = 0; j < n; ++j)
            term *= std::abs(coef.value[vt][static_cast<size_t>(j)]);
        total += term;
    }
    return total;
}

GridFunction discrete_operator(const Collection& col, const CoefTable& coef,
                               const std::vector<Complex>& c_r, const Profile& prof,
                               const GridFunction& ref) {
    int n = col.arity();
    GridFunction out(ref.domain, ref.samples_per_axis);
    for (size_t vt = 0; vt < col.tiles.size(); ++vt) {
        if (std::abs(c_r[vt]) == 0.0) continue;
        Complex w = c_r[vt] *
                    std::pow(rat_to_double(col.tiles[vt].I.volume()), 1.0 - n / 2.0);
        for (int j = 0; j + 1 < n; ++j) w *= coef.value[vt][static_cast<size_t>(j)];
        if (std::abs(w) == 0.0) continue;
        Tile last = col.tiles[vt].component(static_cast<size_t>(n - 1));
        auto phi = make_wave_packet(last, prof, ref, 1.0);
        for (size_t i = 0; i < out.size(); ++i) out.values[i] += w * phi.values[i];
    }
    return out;
}

ExceptionalSet exceptional_set(const std::vector<GridFunction>& indicators, double C) {
    size_t n = indicators.size();
    assert(n >= 2);
    std::vector<double> measures(n);
    for (size_t j = 0; j < n; ++j) {
        double l1 = lp_norm(indicators[j], 1.0);
        if (!(l1 > 0)) throw std::invalid_argument("exceptional_set: |E_j| must be positive");
        measures[j] = l1;
    }
    std::vector<GridFunction> maximal;
    for (size_t j = 0; j + 1 < n; ++j) {
        GridFunction scaled = indicators[j];
        for (auto& v : scaled.values) v /= measures[j];
        maximal.push_back(maximal_function(scaled));
    }

    const GridFunction& ref = indicators[0];
    double cell = rat_to_double(ref.cell_volume());
    for (;; C *= 2.0) {
        GridFunction omega(ref.domain, ref.samples_per_axis);
        double meas = 0.0;
        double thr = C / measures[n - 1];
        for (size_t i = 0; i < omega.size(); ++i) {
            bool inside = false;
            for (const auto& m : maximal)
                if (m.values[i].real() > thr) inside = true;
            if (inside) {
                omega.values[i] = 1.0;
                meas += cell;
            }
        }
        if (meas <= measures[n - 1] / 2.0) {
            ExceptionalSet out;
            out.indicator = std::move(omega);
            out.achieved_C = C;
            out.measure = meas;
            out.en_measure = measures[n - 1];
            return out;
        }
    }
}

namespace {

// Sup-distance from a spatial cube to the complement of Omega (cells not in
// Omega, plus everything outside the domain).
double dist_to_omega_complement(const DyadicCube& I, const GridFunction& omega) {
    Box ib = I.to_box();
    // The complement contains the exterior of the domain: the sup distance
    // from the cube to the nearest domain face.
    double best = 1e300;
    for (size_t k = 0; k < omega.dim(); ++k) {
        double lo = rat_to_double(omega.domain.sides[k].lo);
        double hi = rat_to_double(omega.domain.sides[k].hi);
        double a = rat_to_double(ib.sides[k].lo), b = rat_to_double(ib.sides[k].hi);
        best = std::min(best, std::max(a - lo, 0.0));
        best = std::min(best, std::max(hi - b, 0.0));
    }
    // Distance to non-Omega cells.
    for (size_t i = 0; i < omega.size(); ++i) {
        if (omega.values[i].real() != 0.0) continue;
        auto p = omega.sample_point_d(i);
        double dist = 0.0;
        for (size_t k = 0; k < omega.dim(); ++k) {
            double a = rat_to_double(ib.sides[k].lo), b = rat_to_double(ib.sides[k].hi);
            double g = 0.0;
            if (p[k] < a) g = a - p[k];
            else if (p[k] > b) g = p[k] - b;
            dist = std::max(dist, g);
        }
        best = std::min(best, dist);
        if (best == 0.0) break;
    }
    return best;
}

}  // namespace

RwtResult restricted_weak_experiment(const ModelConfig& cfg, const Collection& col,
                                     const Profile& prof,
                                     const std::vector<GridFunction>& e_sets,
                                     const std::vector<size_t>& sizes) {
    RwtResult out;
    const int n = col.arity();
    assert(e_sets.size() == static_cast<size_t>(n));

    auto exc = exceptional_set(e_sets, cfg.C_exceptional);
    out.report.add("exceptional_C", exc.achieved_C, 0.0);
    out.report.add("exceptional_measure", exc.measure, exc.en_measure / 2.0);

    // f_j = 1_{E_j} for j < n, f_n = 1_{E_n \ Omega}.
    std::vector<GridFunction> fs(e_sets.begin(), e_sets.end());
    for (size_t i = 0; i < fs.back().size(); ++i)
        if (exc.indicator.values[i].real() != 0.0) fs.back().values[i] = 0.0;

    // Coefficients for the full collection, one coordinate at a time.
    std::vector<std::vector<Complex>> values(col.tiles.size(),
                                             std::vector<Complex>(static_cast<size_t>(n)));
    for (int j = 0; j < n; ++j) {
        std::vector<Tile> tiles;
        tiles.reserve(col.tiles.size());
        for (const auto& vt : col.tiles) tiles.push_back(vt.component(static_cast<size_t>(j)));
        auto coefs = packet_coefficients(fs[static_cast<size_t>(j)], tiles, prof);
        for (size_t vt = 0; vt < col.tiles.size(); ++vt)
            values[vt][static_cast<size_t>(j)] = coefs[vt];
    }
    auto coef = CoefTable::from_values(values);

    double rhs = 1.0;
    for (int j = 0; j + 1 < n; ++j)
        rhs *= std::pow(lp_norm(e_sets[static_cast<size_t>(j)], 1.0),
                        1.0 / cfg.p[static_cast<size_t>(j)]);
    double qprime_exp = 1.0 - 1.0 / cfg.q;  // 1/q' = 1 - 1/q
    rhs *= std::pow(exc.en_measure, qprime_exp);

    // Nested sub-collections of the requested sizes (deterministic shuffle).
    std::vector<size_t> order(col.tiles.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(cfg.seed);
    std::shuffle(order.begin(), order.end(), rng);

    for (size_t sz : sizes) {
        size_t take = std::min(sz, order.size());
        Collection sub;
        std::vector<std::vector<Complex>> subvals;
        for (size_t i = 0; i < take; ++i) {
            sub.tiles.push_back(col.tiles[order[i]]);
            subvals.push_back(values[order[i]]);
        }
        auto subcoef = CoefTable::from_values(subvals);
        double lhs = discrete_form(sub, subcoef);
        out.report.add("rwt_ratio_n" + std::to_string(take), lhs, rhs,
                       "tiles=" + std::to_string(take));
        out.ratios_by_size.push_back((rhs > 0) ? lhs / rhs : 0.0);
    }

    // Shell decomposition relative to the exceptional set, with the
    // per-shell mass bounds.
    std::map<long, std::vector<size_t>> shells;
    for (size_t vt = 0; vt < col.tiles.size(); ++vt) {
        double s = rat_to_double(col.tiles[vt].I.side());
        double dist = dist_to_omega_complement(col.tiles[vt].I, exc.indicator);
        double v = 1.0 + dist / s;
        long l = static_cast<long>(std::floor(std::log2(v)));
        shells[l].push_back(vt);
    }
    const long l_cap = 20;
    TreeCtx ctx = TreeCtx::build(col, cfg.C2, cfg.C3, cfg.centralize_floor);
    for (const auto& [l, vts] : shells) {
        if (l > l_cap) {
            out.report.add("shell_truncated_l" + std::to_string(l),
                           static_cast<double>(vts.size()), 0.0);
            continue;
        }
        for (int j = 0; j + 1 < n; ++j) {
            std::vector<TileRef> refs;
            for (size_t vt : vts) refs.push_back(TileRef{static_cast<int>(vt), j});
            auto m = mass(col, ctx, refs, coef);
            double mj = std::sqrt(rat_to_double(m.mass2));
            double bound = std::pow(2.0, static_cast<double>(l) * col.dim()) *
                           lp_norm(e_sets[static_cast<size_t>(j)], 1.0) / exc.en_measure;
            out.report.add("shell_mass_l" + std::to_string(l) + "_j" + std::to_string(j + 1),
                           mj, bound);
        }
    }
    return out;
}

DualityCheck weak_norm_duality_check(const GridFunction& f, double q, int trials,
                                     uint64_t seed) {
    DualityCheck out;
    out.lhs = weak_lp_norm(f, q);

    std::mt19937_64 rng(seed);
    double cell = rat_to_double(f.cell_volume());
    double best = 0.0;
    for (int t = 0; t < trials; ++t) {
        // Random union of cells.
        std::vector<size_t> cells;
        double frac = 0.05 + 0.9 * static_cast<double>(rng() % 1000) / 1000.0;
        for (size_t i = 0; i < f.size(); ++i)
            if (static_cast<double>(rng() % 1000) / 1000.0 < frac) cells.push_back(i);
        if (cells.empty()) continue;
        double emeas = cell * static_cast<double>(cells.size());

        // E' = E minus the peaks; C doubled until |E'| >= |E|/2.
        double C = 1.0;
        std::vector<size_t> kept;
        for (;; C *= 2.0) {
            kept.clear();
            double thr = C * std::pow(emeas, -1.0 / q);
            for (size_t i : cells)
                if (std::abs(f.values[i]) <= thr) kept.push_back(i);
            if (cell * static_cast<double>(kept.size()) >= emeas / 2.0) break;
        }
        Complex integral(0.0, 0.0);
        for (size_t i : kept) integral += f.values[i];
        integral *= cell;
        double qprime_exp = 1.0 - 1.0 / q;
        double val = std::abs(integral) / std::pow(emeas, qprime_exp);
        best = std::max(best, val);
    }
    out.rhs = best;
    out.ratio = (out.rhs > 0) ? out.lhs / out.rhs : 0.0;
    return out;
}

}  // namespace tfwave
