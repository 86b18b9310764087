#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tfwave/gridfn.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace tfwave;

namespace {

Box unit_box1() { return Box({Interval(Rat(0), Rat(1))}); }
Box sym_box1() { return Box({Interval(Rat(-1), Rat(1))}); }

GridFunction random_fn(const Box& dom, int n, uint64_t seed) {
    GridFunction f(dom, n);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& v : f.values) v = Complex(u(rng), u(rng));
    return f;
}

// Independent reference: naive left-to-right accumulation.
double lp_norm_naive(const GridFunction& f, double p) {
    double s = 0.0;
    for (const auto& v : f.values) s += std::pow(std::abs(v), p);
    return std::pow(s * rat_to_double(f.cell_volume()), 1.0 / p);
}

// Brute-force dyadic maximal oracle: direct scan per level per sample.
double maximal_oracle_at(const GridFunction& f, size_t flat, long max_rel) {
    auto idx = f.unflatten(flat);
    Rat w = f.cell_width(0);
    const size_t d = f.dim();
    std::vector<long long> cell(d);
    for (size_t i = 0; i < d; ++i) {
        Rat q = f.domain.sides[i].lo / w;
        cell[i] = q.get_num().get_si() + idx[i];
    }
    double best = 0.0;
    for (long rel = 0; rel <= max_rel; ++rel) {
        double sum = 0.0;
        long long count = 0;
        for (size_t g = 0; g < f.size(); ++g) {
            auto gi = f.unflatten(g);
            bool inside = true;
            for (size_t i = 0; i < d; ++i) {
                Rat q = f.domain.sides[i].lo / w;
                long long gcell = q.get_num().get_si() + gi[i];
                if ((gcell >> rel) != (cell[i] >> rel)) inside = false;
            }
            if (inside) {
                sum += std::abs(f.values[g]);
                ++count;
            }
        }
        if (count > 0) best = std::max(best, sum / static_cast<double>(count));
    }
    return best;
}

}  // namespace

TEST_CASE("lp_norm basics") {
    GridFunction f(unit_box1(), 64);
    for (int i = 0; i < 32; ++i) f.values[static_cast<size_t>(i)] = 1.0;
    CHECK(lp_norm(f, 1.0) == doctest::Approx(0.5).epsilon(1e-12));

    GridFunction g(Box({Interval(Rat(0), Rat(2))}), 64);
    for (auto& v : g.values) v = 3.0;
    CHECK(lp_norm(g, 2.0) == doctest::Approx(3.0 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(lp_norm(g, std::numeric_limits<double>::infinity()) == doctest::Approx(3.0));

    auto r = random_fn(unit_box1(), 256, 3);
    for (double p : {1.0, 2.0, 3.5}) {
        double a = lp_norm(r, p), b = lp_norm_naive(r, p);
        CHECK(std::abs(a - b) <= 1e-12 * std::max(a, b));
    }
}

TEST_CASE("lp_norm refinement invariance is exact") {
    // Piecewise constant on coarse cells, refined by doubling.
    for (size_t d : {size_t(1), size_t(2)}) {
        std::vector<Interval> iv(d, Interval(Rat(0), Rat(1)));
        Box dom{iv};
        int n = 16;
        GridFunction coarse(dom, n);
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        for (auto& v : coarse.values) v = Complex(u(rng), u(rng));

        GridFunction fine(dom, 2 * n);
        for (size_t flat = 0; flat < fine.size(); ++flat) {
            auto fi = fine.unflatten(flat);
            std::vector<int> ci(d);
            for (size_t i = 0; i < d; ++i) ci[i] = fi[i] / 2;
            fine.values[flat] = coarse.values[coarse.flat_index(ci)];
        }
        for (double p : {1.0, 2.0, 4.0}) CHECK(lp_norm(coarse, p) == lp_norm(fine, p));
    }
}

TEST_CASE("weak lp norm") {
    GridFunction f(unit_box1(), 64);
    for (int i = 0; i < 16; ++i) f.values[static_cast<size_t>(i)] = 1.0;
    CHECK(weak_lp_norm(f, 2.0) == doctest::Approx(0.5).epsilon(1e-12));  // |E|^(1/2)

    // Two level sets: max of the two candidate products.
    GridFunction g(unit_box1(), 64);
    for (int i = 0; i < 4; ++i) g.values[static_cast<size_t>(i)] = 4.0;
    for (int i = 4; i < 36; ++i) g.values[static_cast<size_t>(i)] = 1.0;
    double c1 = 4.0 * std::sqrt(4.0 / 64.0), c2 = 1.0 * std::sqrt(36.0 / 64.0);
    CHECK(weak_lp_norm(g, 2.0) == doctest::Approx(std::max(c1, c2)).epsilon(1e-12));

    // Chebyshev: weak <= strong always.
    for (uint64_t s = 0; s < 20; ++s) {
        auto r = random_fn(unit_box1(), 128, 100 + s);
        for (double p : {1.0, 2.0, 3.0})
            CHECK(weak_lp_norm(r, p) <= lp_norm(r, p) * (1 + 1e-12));
    }
}

TEST_CASE("maximal function") {
    GridFunction c(sym_box1(), 32);
    for (auto& v : c.values) v = Complex(0.0, 2.5);  // modulus 2.5
    auto mc = maximal_function(c);
    for (const auto& v : mc.values) CHECK(v.real() == doctest::Approx(2.5).epsilon(1e-12));

    auto f = random_fn(sym_box1(), 32, 5);
    auto mf = maximal_function(f);
    // M(f) >= |f| at every sample.
    for (size_t i = 0; i < f.size(); ++i)
        CHECK(mf.values[i].real() >= std::abs(f.values[i]) - 1e-12);

    // Agreement with the brute-force oracle.
    for (size_t i = 0; i < f.size(); i += 7)
        CHECK(mf.values[i].real() == doctest::Approx(maximal_oracle_at(f, i, 7)).epsilon(1e-12));

    // Serial reference is bit-identical.
    auto ms = maximal_function_serial(f);
    for (size_t i = 0; i < f.size(); ++i) CHECK(mf.values[i] == ms.values[i]);

    // Sublinearity at samples.
    auto g = random_fn(sym_box1(), 32, 6);
    GridFunction fg(sym_box1(), 32);
    for (size_t i = 0; i < fg.size(); ++i) fg.values[i] = f.values[i] + g.values[i];
    auto mg = maximal_function(g), mfg = maximal_function(fg);
    for (size_t i = 0; i < fg.size(); ++i)
        CHECK(mfg.values[i].real() <= mf.values[i].real() + mg.values[i].real() + 1e-12);

    // Monotone under pointwise domination of moduli.
    GridFunction h(sym_box1(), 32);
    for (size_t i = 0; i < h.size(); ++i) h.values[i] = std::abs(f.values[i]) * 2.0;
    auto mh = maximal_function(h);
    for (size_t i = 0; i < h.size(); ++i) CHECK(mh.values[i].real() >= mf.values[i].real() - 1e-12);

    // Indicator of [0,1)^d on a larger box: positive lower bound away from
    // the support, from the containing dyadic cube.
    GridFunction ind(Box({Interval(Rat(-4), Rat(4))}), 64);
    for (size_t i = 0; i < ind.size(); ++i) {
        double x = ind.sample_point_d(i)[0];
        if (x > 0 && x < 1) ind.values[i] = 1.0;
    }
    auto mi = maximal_function(ind);
    for (size_t i = 0; i < ind.size(); i += 5) {
        double expect = maximal_oracle_at(ind, i, 8);
        CHECK(mi.values[i].real() == doctest::Approx(expect).epsilon(1e-12));
        // On the support's dyadic side, the containing cube [0, 2^k) gives a
        // 1/dist-type lower bound; cubes never cross the origin.
        double x = ind.sample_point_d(i)[0];
        if (x > 1.0) CHECK(mi.values[i].real() >= 1.0 / (4.0 * x));
        if (x < 0.0) CHECK(mi.values[i].real() == 0.0);
    }
}

TEST_CASE("square function and sequence norms") {
    // Single cube with a_I = |I|^(1/2): S = 1_I.
    DyadicCube I(-1, {0});  // [0, 1/2)
    DyadicCoefficients coeffs;
    coeffs[I] = std::sqrt(rat_to_double(I.volume()));
    auto S = square_function(coeffs, unit_box1(), 64);
    for (size_t i = 0; i < S.size(); ++i) {
        double x = S.sample_point_d(i)[0];
        CHECK(S.values[i].real() == doctest::Approx(x < 0.5 ? 1.0 : 0.0));
    }
    CHECK(seq_lp(coeffs, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(lp_norm(S, 1.0) == doctest::Approx(seq_lp(coeffs, 1.0)).epsilon(1e-12));

    // Pythagorean additivity over disjoint cubes for the 2-norm.
    DyadicCoefficients two;
    two[DyadicCube(-2, {0})] = Complex(0.7, 0.1);
    two[DyadicCube(-2, {2})] = Complex(-0.3, 0.4);
    double l2 = seq_lp(two, 2.0);
    CHECK(l2 * l2 ==
          doctest::Approx(std::norm(Complex(0.7, 0.1)) + std::norm(Complex(-0.3, 0.4)))
              .epsilon(1e-12));

    // Square function of a union of disjoint-support families adds in squares.
    auto S2 = square_function(two, unit_box1(), 64);
    DyadicCoefficients first, second;
    first[DyadicCube(-2, {0})] = Complex(0.7, 0.1);
    second[DyadicCube(-2, {2})] = Complex(-0.3, 0.4);
    auto Sa = square_function(first, unit_box1(), 64);
    auto Sb = square_function(second, unit_box1(), 64);
    for (size_t i = 0; i < S2.size(); ++i) {
        double rss = std::sqrt(std::norm(Sa.values[i]) + std::norm(Sb.values[i]));
        CHECK(S2.values[i].real() == doctest::Approx(rss).epsilon(1e-12));
    }

    // Grid norm equals the exact laminar norm once the grid resolves cubes.
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        DyadicCoefficients fam;
        int cnt = 1 + static_cast<int>(rng() % 6);
        for (int c = 0; c < cnt; ++c) {
            long lvl = -1 - static_cast<long>(rng() % 4);
            long long maxz = (1LL << (-lvl)) - 1;
            fam[DyadicCube(lvl, {static_cast<long long>(rng() % (maxz + 1))})] =
                Complex(std::cos(static_cast<double>(rng() % 100)),
                        std::sin(static_cast<double>(rng() % 100)));
        }
        auto Sg = square_function(fam, unit_box1(), 64);
        for (double p : {1.0, 2.0, 3.0})
            CHECK(lp_norm(Sg, p) == doctest::Approx(seq_lp(fam, p)).epsilon(1e-10));
    }
}

TEST_CASE("john-nirenberg and interpolation envelopes") {
    // Single-cube family: both sides reduce to the same local quantity.
    DyadicCoefficients one;
    one[DyadicCube(0, {0})] = Complex(2.0, 0.0);
    auto jn = john_nirenberg_ratio(one, 2.0, 2.0);
    CHECK(jn.ratio == doctest::Approx(1.0).epsilon(1e-12));

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto random_family = [&](int cnt) {
        DyadicCoefficients fam;
        for (int c = 0; c < cnt; ++c) {
            long lvl = -static_cast<long>(rng() % 5);
            long long range = 1LL << (-lvl);
            fam[DyadicCube(lvl, {static_cast<long long>(rng() % range)})] =
                Complex(u(rng), u(rng));
        }
        return fam;
    };

    // p = q: strong dominates weak (Chebyshev), ratio >= 1 up to fp.
    for (int t = 0; t < 50; ++t) {
        auto fam = random_family(2 + static_cast<int>(rng() % 8));
        auto r = john_nirenberg_ratio(fam, 2.0, 2.0);
        CHECK(r.ratio >= 1.0 - 1e-9);
    }

    // (p, q) = (1, 2): two-sided boundedness envelope over many families.
    double lo = 1e300, hi = 0.0;
    for (int t = 0; t < 1000; ++t) {
        auto fam = random_family(1 + static_cast<int>(rng() % 10));
        auto r = john_nirenberg_ratio(fam, 1.0, 2.0);
        if (r.ratio > 0) {
            lo = std::min(lo, r.ratio);
            hi = std::max(hi, r.ratio);
        }
    }
    CHECK(lo > 0.05);
    CHECK(hi < 20.0);
    MESSAGE("JN (1,2) ratio envelope: [", lo, ", ", hi, "]");

    // Interpolation: p = 2 collapses to equality; single cube to equality.
    auto famx = random_family(6);
    auto c2 = interpolation_check(famx, 2.0);
    CHECK(c2.lhs == doctest::Approx(c2.rhs).epsilon(1e-12));
    auto c1 = interpolation_check(one, 4.0);
    CHECK(c1.lhs == doctest::Approx(c1.rhs).epsilon(1e-12));

    // Random families: lhs <= C rhs with a modest envelope.
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        auto fam = random_family(1 + static_cast<int>(rng() % 10));
        auto c = interpolation_check(fam, 4.0);
        if (c.rhs > 0) worst = std::max(worst, c.lhs / c.rhs);
    }
    CHECK(worst < 10.0);
    MESSAGE("interpolation p=4 envelope: ", worst);
}

TEST_CASE("serialization round trips") {
    auto f = random_fn(Box({Interval(Rat(-1), Rat(3))}), 32, 77);
    std::stringstream ss;
    write_binary(f, ss);
    auto g = read_binary(ss);
    CHECK(g.samples_per_axis == f.samples_per_axis);
    CHECK(g.domain == f.domain);
    CHECK(g.values == f.values);

    std::stringstream csv;
    write_csv(f, csv);
    CHECK(csv.str().substr(0, 7) == "x,re,im");
}
