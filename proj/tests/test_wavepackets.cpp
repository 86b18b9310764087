#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tfwave/wavepackets.hpp"

#include <cmath>
#include <random>

using namespace tfwave;

namespace {

Box box1(long lo, long hi) { return Box({Interval(Rat(lo), Rat(hi))}); }

GridFunction bump_fn(const Box& dom, int n, const Profile& prof, double width,
                     double freq) {
    GridFunction g(dom, n);
    for (size_t i = 0; i < g.size(); ++i) {
        auto p = g.sample_point_d(i);
        double v = 1.0;
        for (double x : p) v *= prof.rho1(x / width);
        double ph = 2.0 * 3.14159265358979323846 * freq * p[0];
        g.values[i] = v * Complex(std::cos(ph), std::sin(ph));
    }
    return g;
}

}  // namespace

TEST_CASE("partition of unity residual") {
    const Profile& prof = frame_profile(1);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t)
        worst = std::max(worst, std::abs(prof.partition_sum1(u(rng)) - 1.0));
    CHECK(worst < 1e-10);
    MESSAGE("partition residual (poly): ", worst);

    // The exponential bump construction also satisfies it.
    Profile pexp = make_frame_profile(1, BumpKind::Exp, 10);
    worst = 0.0;
    for (int t = 0; t < 200; ++t)
        worst = std::max(worst, std::abs(pexp.partition_sum1(u(rng)) - 1.0));
    CHECK(worst < 1e-10);

    // Frequency support inside (-1/2, 1/2).
    CHECK(prof.rho_hat1(0.5) == 0.0);
    CHECK(prof.rho_hat1(-0.26) == 0.0);
    CHECK(prof.rho_hat1(0.0) == 1.0);
}

TEST_CASE("decay envelope at the declared order") {
    const Profile& prof = frame_profile(1);
    const double n1 = prof.decay_order();
    double envelope = 0.0, envelope_deriv = 0.0, at_x = 0.0;
    for (double x = 0.25; x < 400.0; x *= 1.3) {
        double e = std::abs(prof.rho1(x)) * std::pow(1.0 + x, n1);
        if (e > envelope) {
            envelope = e;
            at_x = x;
        }
        envelope_deriv =
            std::max(envelope_deriv, std::abs(prof.rho1_deriv(x)) * std::pow(1.0 + x, n1));
    }
    // The envelope must be attained inside the sweep (the rate is real, not
    // an artifact of stopping early) and stay bounded.
    CHECK(at_x < 200.0);
    CHECK(envelope < 1e6);
    CHECK(envelope_deriv < 1e7);
    MESSAGE("decay envelopes (N1=", n1, "): ", envelope, " at x=", at_x, ", deriv ",
            envelope_deriv);
}

TEST_CASE("wave packet normalization is tile independent") {
    const Profile& prof = frame_profile(1);
    GridFunction ref(Box({Interval(Rat(-256), Rat(256))}), 1 << 13);
    double expect = prof.l2_norm();

    std::vector<Tile> tiles;
    for (long lvl = -2; lvl <= 2; ++lvl) {
        tiles.emplace_back(DyadicCube(lvl, {0}), ShiftedDyadicCube(-lvl, {0}, {0}));
        tiles.emplace_back(DyadicCube(lvl, {1}), ShiftedDyadicCube(-lvl, {0}, {1}));
    }
    for (const auto& t : tiles) {
        auto phi = make_wave_packet(t, prof, ref);
        CHECK(lp_norm(phi, 2.0) == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("packet structure: modulation and translation") {
    const Profile& prof = frame_profile(1);
    GridFunction ref(box1(-32, 32), 1 << 11);

    // Centered tile at unit scale: phi equals rho up to modulation.
    Tile t0(DyadicCube(0, {0}), ShiftedDyadicCube(0, {0}, {0}));
    auto phi = make_wave_packet(t0, prof, ref);
    for (size_t i = 0; i < phi.size(); i += 37) {
        double x = ref.sample_point_d(i)[0];
        CHECK(std::abs(phi.values[i]) == doctest::Approx(std::abs(prof.rho1(x - 0.5))).epsilon(1e-9));
    }

    // Frequency shift leaves the modulus unchanged pointwise.
    Tile t1(DyadicCube(0, {0}), ShiftedDyadicCube(0, {2}, {1}));
    auto phi1 = make_wave_packet(t1, prof, ref);
    for (size_t i = 0; i < phi.size(); i += 13)
        CHECK(std::abs(phi1.values[i]) == doctest::Approx(std::abs(phi.values[i])).epsilon(1e-10));

    // Translating the spatial cube by whole cells shifts |phi| exactly.
    Tile t2(DyadicCube(0, {4}), ShiftedDyadicCube(0, {0}, {0}));
    auto phi2 = make_wave_packet(t2, prof, ref);
    int shift = static_cast<int>(4.0 / rat_to_double(ref.cell_width(0)));
    for (size_t i = 0; i + static_cast<size_t>(shift) < phi.size(); i += 29)
        CHECK(std::abs(phi2.values[i + static_cast<size_t>(shift)]) ==
              doctest::Approx(std::abs(phi.values[i])).epsilon(1e-10));

    // Boundary tiles are rejected.
    Tile bad(DyadicCube(0, {-32}), ShiftedDyadicCube(0, {0}, {0}));
    CHECK_THROWS_AS(make_wave_packet(bad, prof, ref), TileOutsideDomain);
}

TEST_CASE("inner products") {
    const Profile& prof = frame_profile(1);
    GridFunction ref(box1(-32, 32), 1 << 11);
    Tile t0(DyadicCube(0, {0}), ShiftedDyadicCube(0, {0}, {0}));
    auto phi = make_wave_packet(t0, prof, ref);

    auto self = inner_product(phi, phi);
    double n2 = lp_norm(phi, 2.0);
    CHECK(self.real() == doctest::Approx(n2 * n2).epsilon(1e-12));
    CHECK(std::abs(self.imag()) < 1e-14);

    // Conjugate symmetry.
    Tile t1(DyadicCube(0, {1}), ShiftedDyadicCube(0, {0}, {0}));
    auto psi = make_wave_packet(t1, prof, ref);
    auto ab = inner_product(phi, psi), ba = inner_product(psi, phi);
    CHECK(ab.real() == doctest::Approx(ba.real()).epsilon(1e-12));
    CHECK(ab.imag() == doctest::Approx(-ba.imag()).epsilon(1e-12));

    // Far-separated frequency cubes at the same scale: orthogonal.
    Tile t2(DyadicCube(0, {0}), ShiftedDyadicCube(0, {1}, {0}));
    auto chi = make_wave_packet(t2, prof, ref);
    CHECK(std::abs(inner_product(phi, chi)) < 1e-8);

    // Batch coefficients: parallel kernel matches the serial reference.
    GridFunction f(box1(-32, 32), 1 << 11);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& v : f.values) v = Complex(u(rng), u(rng));
    std::vector<Tile> tiles = {t0, t1, t2};
    auto a = packet_coefficients(f, tiles, prof);
    auto b = packet_coefficients_serial(f, tiles, prof);
    for (size_t i = 0; i < tiles.size(); ++i) CHECK(a[i] == b[i]);
    CHECK(a[0] == packet_coefficient(f, t0, prof));

    GridFunction other(box1(-16, 16), 1 << 11);
    CHECK_THROWS_AS(inner_product(phi, other), GridMismatch);
}

TEST_CASE("frame reconstruction") {
    const Profile& prof = frame_profile(1);

    // Zero input reconstructs to zero.
    GridFunction zero(box1(-64, 64), 512);
    auto rz = frame_reconstruct(zero, 0, prof);
    CHECK(lp_norm(rz.reconstruction, 2.0) == 0.0);

    // A single frame packet reproduces itself.
    GridFunction ref(box1(-64, 64), 512);
    Tile t(DyadicCube(0, {2}), ShiftedDyadicCube(0, {0}, {0}));
    auto phi = make_wave_packet(t, prof, ref);
    auto rp = frame_reconstruct(phi, 0, prof);
    CHECK(rp.rel_l2_error < 1e-6);

    // Band-limited modulated bump at d=1, N=512, scale 0.
    auto g = bump_fn(box1(-64, 64), 512, prof, 2.0, 0.2);
    auto rg = frame_reconstruct(g, 0, prof);
    CHECK(rg.rel_l2_error < 1e-3);
    MESSAGE("d=1 reconstruction error at N=512: ", rg.rel_l2_error, " (", rg.terms,
            " terms, dropped ", rg.dropped_mass, ")");

    // Error decreases (within 10% slack) as N doubles.
    auto g2 = bump_fn(box1(-64, 64), 1024, prof, 2.0, 0.2);
    auto rg2 = frame_reconstruct(g2, 0, prof);
    CHECK(rg2.rel_l2_error <= rg.rel_l2_error * 1.1);
}

TEST_CASE("overlap decay table") {
    const Profile& prof = frame_profile(1);
    auto rows = overlap_decay_check(prof, {0, 2, 4, 6, 8, 10, 14, 18, 24, 30});
    // Coincident tiles: the squared norm.
    CHECK(rows[0].inner_abs == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
    double envelope = 0.0;
    for (const auto& r : rows) envelope = std::max(envelope, r.normalized);
    CHECK(envelope < 1e4);
    MESSAGE("overlap envelope |<phi,phi'>|(1+d/s)^{5d}: ", envelope);
    // Far separations are genuinely small (the raw autocorrelation
    // oscillates, so only the envelope is monotone).
    CHECK(rows.back().inner_abs < 1e-4);

    // Independent Riemann oracle at separation 4.
    double oracle = 0.0;
    {
        const double step = 1.0 / 512.0;
        double acc = 0.0;
        for (double u = -200.0; u < 200.0; u += step)
            acc += prof.rho1(u) * prof.rho1(u - 4.0) * step;
        oracle = std::abs(acc);
    }
    for (const auto& r : rows)
        if (r.separation == 3.0)  // z = 4 -> d(I,I')/s = 3
            CHECK(r.inner_abs == doctest::Approx(oracle).epsilon(1e-6));
}
