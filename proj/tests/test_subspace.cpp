#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "tfwave/subspace.hpp"

#include <algorithm>
#include <random>

using namespace tfwave;

namespace {

// Models as explicit bases, for invariance checks.
Subspace span1(int n, int d, const std::vector<std::vector<std::vector<long>>>& vecs) {
    std::vector<std::vector<std::vector<Rat>>> basis;
    for (const auto& v : vecs) {
        std::vector<std::vector<Rat>> w;
        for (const auto& blk : v) {
            std::vector<Rat> b;
            for (long e : blk) b.push_back(Rat(e));
            w.push_back(std::move(b));
        }
        basis.push_back(std::move(w));
    }
    return Subspace(n, d, static_cast<int>(vecs.size()), std::move(basis));
}

bool in_span(const Subspace& g, const std::vector<std::vector<Rat>>& v) {
    RatMatrix M(static_cast<size_t>(g.m) + 1, static_cast<size_t>(g.n * g.d));
    for (int i = 0; i < g.m; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.d; ++k)
                M.at(static_cast<size_t>(i), static_cast<size_t>(j * g.d + k)) = g.basis[i][j][k];
    for (int j = 0; j < g.n; ++j)
        for (int k = 0; k < g.d; ++k)
            M.at(static_cast<size_t>(g.m), static_cast<size_t>(j * g.d + k)) = v[j][k];
    return M.rank() == static_cast<size_t>(g.m);
}

std::vector<std::vector<Rat>> gvec(const std::vector<std::vector<long>>& blocks,
                                   const Rat& scale = Rat(1)) {
    std::vector<std::vector<Rat>> v;
    for (const auto& b : blocks) {
        std::vector<Rat> blk;
        for (long e : b) blk.push_back(Rat(e) * scale);
        v.push_back(std::move(blk));
    }
    return v;
}

}  // namespace

TEST_CASE("rank parameters") {
    auto p = rank_params(3, 2);
    CHECK(p.l == 1);
    CHECK(p.r == 1);
    CHECK(p.nonnegative);
    CHECK(p.a == 0);
    CHECK(p.b == 1);

    auto q = rank_params(4, 3);
    CHECK(q.l == 1);
    CHECK(q.r == 1);
    CHECK(q.nonnegative);  // l+1-(d-r) = 0
    CHECK(q.a == 0);
    CHECK(q.b == 0);

    auto s = rank_params(2, 2);  // m = d
    CHECK(s.l == 1);
    CHECK(s.r == 0);

    auto t = rank_params(9, 5);  // l=1, r=4: 1+1-(5-4) = 1 = 0*5+1
    CHECK(t.nonnegative);
    CHECK(t.a == 0);
    CHECK(t.b == 1);
    auto u = rank_params(2, 5);  // l=0, r=2: 0+1-(5-2) = -2
    CHECK(!u.nonnegative);
}

TEST_CASE("kernel-map constructions have the expected spans") {
    auto bht = fixtures::bht();
    CHECK(bht.n == 3);
    CHECK(bht.d == 1);
    CHECK(bht.m == 1);
    CHECK(in_span(bht, gvec({{1}, {1}, {-2}})));

    auto nd = fixtures::cyclic_dilated();
    CHECK(nd.m == 3);
    // tau, tau', tau'' directions of the displayed parametrization.
    CHECK(in_span(nd, gvec({{3, 0}, {0, 0}, {0, -1}, {-3, 1}})));
    CHECK(in_span(nd, gvec({{0, 1}, {-1, 0}, {0, 0}, {1, -1}})));
    CHECK(in_span(nd, gvec({{0, 0}, {0, 1}, {-2, 0}, {2, -1}})));

    auto md = fixtures::cyclic();
    CHECK(md.m == 3);
    CHECK(in_span(md, gvec({{1, 0}, {0, 0}, {0, -1}, {-1, 1}})));
    CHECK(in_span(md, gvec({{0, 1}, {-1, 0}, {0, 0}, {1, -1}})));
    CHECK(in_span(md, gvec({{0, 0}, {0, 1}, {-1, 0}, {1, -1}})));

    auto cs = fixtures::corner_slices();
    CHECK(cs.n == 3);
    CHECK(cs.d == 3);
    CHECK(cs.m == 4);
}

TEST_CASE("projection image dimensions") {
    auto bht = fixtures::bht();
    std::vector<std::pair<int, int>> full;
    for (int j = 1; j <= 3; ++j) full.emplace_back(j, 1);
    CHECK(projection_image_dim(bht, full) == 1);
    CHECK(projection_image_dim(bht, {{3, 1}}) == 1);

    auto degen = span1(3, 1, {{{1}, {-1}, {0}}});
    CHECK(projection_image_dim(degen, {{3, 1}}) == 0);
}

TEST_CASE("golden table: Type I") {
    CHECK(check_type1(fixtures::bht()).holds);
    CHECK(check_type1(fixtures::cyclic_dilated()).holds);
    CHECK(check_type1(fixtures::cyclic()).holds);
    CHECK(check_type1(fixtures::corner_slices()).holds);

    auto bad = span1(3, 1, {{{1}, {-1}, {0}}});
    auto r = check_type1(bad);
    CHECK(!r.holds);
    REQUIRE(r.failing_A.has_value());
    CHECK(*r.failing_A == std::vector<int>{3});

    // Precondition: m/d < n/2 (the triangular model sits exactly on n/2).
    CHECK_THROWS_AS(check_type1(fixtures::triangular()), RankOutOfRange);
}

TEST_CASE("golden table: Type II verdicts") {
    // BHT is below the fractional-rank window entirely.
    CHECK_THROWS_AS(check_type2(fixtures::bht()), RankOutOfRange);

    auto nd = check_type2(fixtures::cyclic_dilated());
    CHECK(nd.holds);
    CHECK(nd.families_checked == 24);

    auto md = check_type2(fixtures::cyclic());
    CHECK(!md.holds);
    REQUIRE(md.witness.has_value());
    // Witness annihilated exactly by the failing family's map, and nonzero.
    auto M = build_type2_map(fixtures::cyclic(), *md.failing_family);
    std::vector<Rat> flat;
    for (const auto& t : md.witness->t) flat.insert(flat.end(), t.begin(), t.end());
    bool nonzero = false;
    for (const auto& e : flat) nonzero |= (e != 0);
    CHECK(nonzero);
    for (const auto& y : M.apply(flat)) CHECK(y == 0);

    auto cs = check_type2(fixtures::corner_slices());
    CHECK(!cs.holds);
    REQUIRE(cs.witness.has_value());
    // All-equal witness (v, v, v).
    REQUIRE(cs.witness->t.size() == 3);
    CHECK(cs.witness->t[0] == cs.witness->t[1]);
    CHECK(cs.witness->t[1] == cs.witness->t[2]);
    bool nz = false;
    for (const auto& e : cs.witness->t[0]) nz |= (e != 0);
    CHECK(nz);
}

TEST_CASE("single-family check on the cyclic model") {
    auto md = fixtures::cyclic();
    IndexFamily fam;
    fam.A = {3};
    fam.B = {{1}, {2}};
    fam.L = 2;
    auto r = check_family(md, fam);
    CHECK(r.trivial_kernel);

    // At least one family fails overall (Type II fails).
    size_t failing = 0;
    for (const auto& f : enumerate_families(md))
        if (!check_family(md, f).trivial_kernel) ++failing;
    CHECK(failing > 0);

    // Families with overlapping blocks are rejected.
    IndexFamily bad;
    bad.A = {1};
    bad.B = {{1}, {2}};
    bad.L = 2;
    CHECK_THROWS_AS(check_family(md, bad), InvalidFamily);
    IndexFamily bad2;
    bad2.A = {};
    bad2.B = {{1}, {2}};
    bad2.L = 2;
    CHECK_THROWS_AS(check_family(md, bad2), InvalidFamily);
}

TEST_CASE("coordinate kernels of the cyclic model match the table") {
    auto md = fixtures::cyclic();
    std::vector<size_t> dims;
    for (int j = 1; j <= 4; ++j) dims.push_back(coordinate_kernel(md, j).coeff_basis.size());
    CHECK(dims == std::vector<size_t>{1, 1, 1, 2});

    // The one-dimensional kernels are the displayed lines.
    auto k1 = coordinate_kernel(md, 1);
    CHECK(in_span(span1(4, 2, {{{0, 0}, {0, 1}, {-1, 0}, {1, -1}}}), k1.ambient_basis[0]));
    auto k2 = coordinate_kernel(md, 2);
    CHECK(in_span(span1(4, 2, {{{1, 0}, {0, 0}, {0, -1}, {-1, 1}}}), k2.ambient_basis[0]));
    auto k3 = coordinate_kernel(md, 3);
    CHECK(in_span(span1(4, 2, {{{0, 1}, {-1, 0}, {0, 0}, {1, -1}}}), k3.ambient_basis[0]));
    // Two-dimensional kernel at j=4 contains both displayed generators.
    auto k4 = coordinate_kernel(md, 4);
    auto span4 = span1(4, 2,
                       {{{1, 1}, {-1, 0}, {0, -1}, {0, 0}}, {{1, 0}, {0, 1}, {-1, -1}, {0, 0}}});
    for (const auto& v : k4.ambient_basis) CHECK(in_span(span4, v));

    // Every kernel vector is annihilated in the j-th block.
    for (int j = 1; j <= 4; ++j)
        for (const auto& v : coordinate_kernel(md, j).ambient_basis)
            for (const auto& e : v[static_cast<size_t>(j - 1)]) CHECK(e == 0);

    // Full-rank coordinate projection on BHT: trivial kernel.
    CHECK(coordinate_kernel(fixtures::bht(), 3).coeff_basis.empty());
}

TEST_CASE("verdicts depend only on the span") {
    auto base = fixtures::cyclic_dilated();
    auto t2 = check_type2(base);

    // Permute and rescale the basis.
    std::vector<std::vector<std::vector<Rat>>> b = base.basis;
    std::swap(b[0], b[2]);
    for (auto& blk : b[1])
        for (auto& e : blk) e *= Rat(-7, 3);
    Subspace variant(base.n, base.d, base.m, std::move(b));

    CHECK(check_type1(variant).holds == check_type1(base).holds);
    auto t2v = check_type2(variant);
    CHECK(t2v.holds == t2.holds);
    CHECK(t2v.families_checked == t2.families_checked);
}

TEST_CASE("generic samples satisfy the applicable conditions") {
    // Small smoke version; the acceptance suite runs the full matrix.
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        auto g1 = sample_generic(3, 1, 1, seed);
        CHECK(check_type1(g1).holds);
        auto g2 = sample_generic(4, 2, 3, seed);
        CHECK(check_type1(g2).holds);
        CHECK(check_type2(g2).holds);
        auto g3 = sample_generic(6, 2, 5, seed);
        CHECK(check_type1(g3).holds);
        CHECK(check_type2(g3).holds);
    }
    CHECK_THROWS_AS(sample_generic(3, 1, 2, 1), RankOutOfRange);
}

TEST_CASE("subspace json round trip") {
    auto g = fixtures::cyclic_dilated();
    auto j = subspace_to_json(g);
    auto g2 = subspace_from_json(j);
    CHECK(g2.n == g.n);
    CHECK(g2.d == g.d);
    CHECK(g2.m == g.m);
    CHECK(g2.basis == g.basis);
}
