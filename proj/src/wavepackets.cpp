#include "tfwave/wavepackets.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <mutex>
#include <array>
#include <numbers>
#include <omp.h>

namespace tfwave {

namespace {

constexpr double kPi = std::numbers::pi;

// Gauss-Legendre nodes/weights on [0,1] by Newton iteration on P_n.
void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(static_cast<size_t>(n));
    weights.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = n * (x * p1 - p0) / (x * x - 1.0);
        nodes[static_cast<size_t>(i)] = 0.5 * (x + 1.0);
        weights[static_cast<size_t>(i)] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
}

double exp_psi(double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; }

}  // namespace

Profile::Profile(int dim, BumpKind kind, int decay_order)
    : dim_(dim), kind_(kind), decay_order_(decay_order > 0 ? decay_order : 5) {
    if (dim < 1) throw std::invalid_argument("Profile: dim >= 1");
    // Edge exponent of the transition polynomial: q ~ t^(poly_order_+1) at 0,
    // so rho decays like |x|^{-(poly_order_+3)/2}, one order past N1. Higher
    // orders sharpen the transition and inflate the constants long before
    // the asymptotic rate kicks in, so N1 stays modest by default.
    poly_order_ = std::max(2 * decay_order_ - 1, 3);

    if (kind_ == BumpKind::Poly) {
        // (u(1-u))^poly_order_ has degree 2*poly_order_: exact with
        // poly_order_+1 nodes.
        gauss_legendre_01(poly_order_ + 1, beta_nodes_, beta_weights_);
        beta_norm_ = 0.0;
        for (size_t i = 0; i < beta_nodes_.size(); ++i)
            beta_norm_ += beta_weights_[i] *
                          std::pow(beta_nodes_[i] * (1.0 - beta_nodes_[i]), poly_order_);
    }

    const int osc_n = 384;
    gauss_legendre_01(osc_n, osc_nodes_, osc_weights_);
    osc_ghat_.resize(osc_nodes_.size());
    for (size_t i = 0; i < osc_nodes_.size(); ++i)
        osc_ghat_[i] = std::sqrt(transition(osc_nodes_[i]));

    // Cumulative tail of rho^2 on a coarse scan.
    const double R = 512.0;
    size_t steps = static_cast<size_t>(R / tail_step_);
    std::vector<double> sq(steps);
    for (size_t i = 0; i < steps; ++i) {
        double x = (static_cast<double>(i) + 0.5) * tail_step_;
        double v = rho1(x);
        sq[i] = 2.0 * v * v * tail_step_;  // both signs
    }
    tail_cum_.assign(steps + 1, 0.0);
    amp_max_.assign(steps + 1, 0.0);
    for (size_t i = steps; i-- > 0;) {
        tail_cum_[i] = tail_cum_[i + 1] + sq[i];
        amp_max_[i] = std::max(amp_max_[i + 1], std::sqrt(sq[i] / (2.0 * tail_step_)));
    }
}

double Profile::window_radius(double eps) const {
    for (size_t i = 0; i < amp_max_.size(); ++i)
        if (amp_max_[i] <= eps) return static_cast<double>(i) * tail_step_;
    return static_cast<double>(amp_max_.size()) * tail_step_;
}

double Profile::transition(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    if (kind_ == BumpKind::Exp) {
        double a = exp_psi(t), b = exp_psi(1.0 - t);
        return a / (a + b);
    }
    // Normalized incomplete beta, evaluated as an exact polynomial
    // quadrature; the t > 1/2 branch enforces T(t)+T(1-t) = 1 identically.
    if (t > 0.5) return 1.0 - transition(1.0 - t);
    double s = 0.0;
    for (size_t i = 0; i < beta_nodes_.size(); ++i) {
        double u = t * beta_nodes_[i];
        s += beta_weights_[i] * std::pow(u * (1.0 - u), poly_order_);
    }
    return s * t / beta_norm_;
}

double Profile::rho_hat1(double xi) const {
    double a = std::abs(xi);
    if (a >= 0.25) return 0.0;
    if (a <= 1.0 / 12.0) return 1.0;
    return std::sqrt(transition(6.0 * (0.25 - a)));
}

double Profile::rho1(double x) const {
    double main;
    if (std::abs(x) < 1e-10) {
        main = 1.0 / 6.0;
    } else {
        main = std::sin(kPi * x / 6.0) / (kPi * x);
    }
    double tail = 0.0;
    for (size_t i = 0; i < osc_nodes_.size(); ++i)
        tail += osc_weights_[i] * osc_ghat_[i] *
                std::cos(2.0 * kPi * x * (0.25 - osc_nodes_[i] / 6.0));
    return main + tail / 3.0;
}

double Profile::rho1_deriv(double x) const {
    double main;
    if (std::abs(x) < 1e-6) {
        main = -(kPi * kPi / 108.0) * x;  // series of d/dx [sin(pi x/6)/(pi x)]
    } else {
        main = ((kPi * x / 6.0) * std::cos(kPi * x / 6.0) - std::sin(kPi * x / 6.0)) /
               (kPi * x * x);
    }
    double tail = 0.0;
    for (size_t i = 0; i < osc_nodes_.size(); ++i) {
        double freq = 2.0 * kPi * (0.25 - osc_nodes_[i] / 6.0);
        tail -= osc_weights_[i] * osc_ghat_[i] * freq * std::sin(freq * x);
    }
    return main + tail / 3.0;
}

double Profile::partition_sum1(double xi) const {
    long z0 = static_cast<long>(std::floor(3.0 * xi));
    double s = 0.0;
    for (long z = z0 - 2; z <= z0 + 2; ++z) {
        double v = rho_hat1(xi - static_cast<double>(z) / 3.0);
        s += v * v;
    }
    return s;
}

double Profile::l2_norm() const { return std::pow(3.0, -0.5 * dim_); }

double Profile::tail_mass_fraction(double r) const {
    if (r <= 0.0) return 1.0;
    size_t i = static_cast<size_t>(r / tail_step_);
    if (i >= tail_cum_.size()) return 0.0;
    return tail_cum_[i] / (1.0 / 3.0);
}

const Profile& frame_profile(int dim) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<Profile>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(dim);
    if (it == cache.end())
        it = cache.emplace(dim, std::make_unique<Profile>(dim, BumpKind::Poly, 0)).first;
    return *it->second;
}

Profile make_frame_profile(int dim, BumpKind kind, int decay_order) {
    return Profile(dim, kind, decay_order);
}

namespace {

struct AxisFactors {
    int lo = 0, hi = 0;         // cell index range [lo, hi)
    std::vector<Complex> vals;  // per-cell axis factor
};

// Per-axis factors s^{-1/2} rho((x-c)/s) e^{2 pi i xi (x-c)} over the grid.
std::vector<AxisFactors> axis_factors(const Tile& tile, const Profile& prof,
                                      const GridFunction& ref) {
    const size_t d = ref.dim();
    if (tile.I.dim() != d) throw GridMismatch("packet: tile dimension mismatch");
    double s = rat_to_double(tile.I.side());
    auto ci = tile.I.center();
    auto cxi = tile.Xi.center();

    std::vector<AxisFactors> out(d);
    for (size_t k = 0; k < d; ++k) {
        double h = rat_to_double(ref.cell_width(k));
        double band = std::abs(rat_to_double(cxi[k])) + 0.5 * rat_to_double(tile.Xi.side());
        if (band >= 0.5 / h)
            throw GridMismatch("packet: frequency cube exceeds the grid band");

        double lo_d = rat_to_double(ref.domain.sides[k].lo);
        double c = rat_to_double(ci[k]);
        double xi = rat_to_double(cxi[k]);
        int n = ref.samples_per_axis;
        double radius = prof.window_radius(1e-14) * s;
        AxisFactors f;
        f.lo = std::max(0, static_cast<int>(std::floor((c - radius - lo_d) / h)));
        f.hi = std::min(n, static_cast<int>(std::ceil((c + radius - lo_d) / h)) + 1);
        if (f.hi < f.lo) f.hi = f.lo;
        f.vals.resize(static_cast<size_t>(f.hi - f.lo));
        double amp = 1.0 / std::sqrt(s);
        for (int i = f.lo; i < f.hi; ++i) {
            double x = lo_d + h * (i + 0.5);
            double u = (x - c) / s;
            double r = prof.rho1(u) * amp;
            double ph = 2.0 * kPi * xi * (x - c);
            f.vals[static_cast<size_t>(i - f.lo)] = Complex(r * std::cos(ph), r * std::sin(ph));
        }
        out[k] = std::move(f);
    }
    return out;
}

double clipped_tail_fraction(const Tile& tile, const Profile& prof, const GridFunction& ref) {
    double s = rat_to_double(tile.I.side());
    auto ci = tile.I.center();
    double frac = 0.0;
    for (size_t k = 0; k < ref.dim(); ++k) {
        double c = rat_to_double(ci[k]);
        double m = std::min(c - rat_to_double(ref.domain.sides[k].lo),
                            rat_to_double(ref.domain.sides[k].hi) - c);
        if (m <= 0.0) {
            frac += 1.0;
        } else {
            frac += prof.tail_mass_fraction(m / s);
        }
    }
    return frac;
}

}  // namespace

GridFunction make_wave_packet(const Tile& tile, const Profile& prof, const GridFunction& ref,
                              double tail_tolerance) {
    if (clipped_tail_fraction(tile, prof, ref) > tail_tolerance)
        throw TileOutsideDomain("make_wave_packet: tile too close to the domain boundary");
    auto ax = axis_factors(tile, prof, ref);
    GridFunction out(ref.domain, ref.samples_per_axis);
    const size_t d = ref.dim();
    std::vector<int> idx(d);
    for (size_t k = 0; k < d; ++k) idx[k] = ax[k].lo;
    bool empty = false;
    for (size_t k = 0; k < d; ++k)
        if (ax[k].lo >= ax[k].hi) empty = true;
    while (!empty) {
        Complex v(1.0, 0.0);
        for (size_t k = 0; k < d; ++k)
            v *= ax[k].vals[static_cast<size_t>(idx[k] - ax[k].lo)];
        out.values[out.flat_index(idx)] = v;
        size_t k = d;
        bool done = true;
        while (k-- > 0) {
            if (++idx[k] < ax[k].hi) {
                done = false;
                break;
            }
            idx[k] = ax[k].lo;
        }
        if (done) break;
    }
    return out;
}

Complex inner_product(const GridFunction& f, const GridFunction& g) {
    if (!f.compatible(g)) throw GridMismatch("inner_product: grids differ");
    std::vector<double> re(f.size()), im(f.size());
    for (size_t i = 0; i < f.size(); ++i) {
        Complex t = f.values[i] * std::conj(g.values[i]);
        re[i] = t.real();
        im[i] = t.imag();
    }
    double vol = rat_to_double(f.cell_volume());
    return Complex(pairwise_sum(re.data(), re.size()) * vol,
                   pairwise_sum(im.data(), im.size()) * vol);
}

Complex packet_coefficient(const GridFunction& f, const Tile& tile, const Profile& prof) {
    auto ax = axis_factors(tile, prof, f);
    const size_t d = f.dim();
    size_t total = 1;
    for (size_t k = 0; k < d; ++k) total *= static_cast<size_t>(ax[k].hi - ax[k].lo);
    std::vector<double> re(total), im(total);
    std::vector<int> idx(d);
    for (size_t k = 0; k < d; ++k) idx[k] = ax[k].lo;
    for (size_t t = 0; t < total; ++t) {
        Complex phi(1.0, 0.0);
        for (size_t k = 0; k < d; ++k)
            phi *= ax[k].vals[static_cast<size_t>(idx[k] - ax[k].lo)];
        Complex term = f.values[f.flat_index(idx)] * std::conj(phi);
        re[t] = term.real();
        im[t] = term.imag();
        for (size_t k = d; k-- > 0;) {
            if (++idx[k] < ax[k].hi) break;
            idx[k] = ax[k].lo;
        }
    }
    double vol = rat_to_double(f.cell_volume());
    return Complex(pairwise_sum_serial(re.data(), total) * vol,
                   pairwise_sum_serial(im.data(), total) * vol);
}

namespace {

// Aligned tiles of one scale and frequency cube share their axis samples up
// to integer cell shifts, so the batch evaluates each distinct axis profile
// once on an extended index range and the per-tile work is a windowed dot.
struct AxisBase {
    long long r_lo = 0;          // first virtual cell index covered
    long long cells_per_side = 1;
    long long z0 = 0;            // reference spatial corner
    std::vector<Complex> vals;   // conj taken at use site
};

struct BatchPlan {
    // per axis: key = (I level, Xi level, Xi corner, Xi shift) -> base
    std::vector<std::map<std::array<long long, 4>, AxisBase>> axes;
    long long window_cells = 0;
};

BatchPlan build_batch_plan(const GridFunction& f, std::span<const Tile> tiles,
                           const Profile& prof, double window_eps) {
    const size_t d = f.dim();
    BatchPlan plan;
    plan.axes.resize(d);
    double radius_u = prof.window_radius(window_eps);

    for (size_t k = 0; k < d; ++k) {
        // Collect corner ranges per key.
        std::map<std::array<long long, 4>, std::pair<long long, long long>> ranges;
        for (const auto& t : tiles) {
            if (t.I.dim() != d) throw GridMismatch("packet batch: dimension mismatch");
            std::array<long long, 4> key = {t.I.level, t.Xi.level, t.Xi.corner[k],
                                            t.Xi.shift[k]};
            long long z = t.I.corner[k];
            auto it = ranges.find(key);
            if (it == ranges.end())
                ranges.emplace(key, std::make_pair(z, z));
            else {
                it->second.first = std::min(it->second.first, z);
                it->second.second = std::max(it->second.second, z);
            }
        }
        for (const auto& [key, zr] : ranges) {
            long ilevel = static_cast<long>(key[0]);
            Rat side = pow2(ilevel);
            Rat h = f.cell_width(k);
            Rat m = side / h;
            if (m.get_den() != 1 || m < 1)
                throw GridMismatch("packet batch: tile finer than the grid cells");
            long long cells = static_cast<long long>(m.get_num().get_si());

            ShiftedDyadicCube xi(static_cast<long>(key[1]), {key[2]},
                                 {static_cast<int>(key[3])});
            double band = std::abs(rat_to_double(xi.center()[0])) +
                          0.5 * rat_to_double(xi.side());
            if (band >= 0.5 / rat_to_double(h))
                throw GridMismatch("packet: frequency cube exceeds the grid band");

            AxisBase base;
            base.cells_per_side = cells;
            base.z0 = zr.first;
            long long shift_span = (zr.second - zr.first) * cells;
            base.r_lo = -shift_span;
            long long r_hi = f.samples_per_axis;  // exclusive

            double s = rat_to_double(side);
            double hd = rat_to_double(h);
            double lo_d = rat_to_double(f.domain.sides[k].lo);
            double c = lo_d * 0 + rat_to_double(side * (to_rat(zr.first) + Rat(1, 2)));
            double xival = rat_to_double(xi.center()[0]);
            double amp = 1.0 / std::sqrt(s);
            base.vals.assign(static_cast<size_t>(r_hi - base.r_lo), Complex(0.0, 0.0));
            for (long long r = base.r_lo; r < r_hi; ++r) {
                double x = lo_d + hd * (static_cast<double>(r) + 0.5);
                double u = (x - c) / s;
                if (std::abs(u) > radius_u) continue;
                double rv = prof.rho1(u) * amp;
                double ph = 2.0 * kPi * xival * (x - c);
                base.vals[static_cast<size_t>(r - base.r_lo)] =
                    Complex(rv * std::cos(ph), rv * std::sin(ph));
            }
            plan.axes[k].emplace(key, std::move(base));
        }
    }
    return plan;
}

Complex batch_coefficient(const GridFunction& f, const Tile& t, const BatchPlan& plan) {
    const size_t d = f.dim();
    // Per-axis value spans with per-axis index offsets.
    std::vector<const AxisBase*> bases(d);
    std::vector<long long> delta(d);
    for (size_t k = 0; k < d; ++k) {
        std::array<long long, 4> key = {t.I.level, t.Xi.level, t.Xi.corner[k],
                                        t.Xi.shift[k]};
        const AxisBase& b = plan.axes[k].at(key);
        bases[k] = &b;
        delta[k] = (t.I.corner[k] - b.z0) * b.cells_per_side;
    }
    // Nonzero window per axis.
    std::vector<int> lo(d), hi(d);
    for (size_t k = 0; k < d; ++k) {
        const AxisBase& b = *bases[k];
        long long first = b.r_lo + delta[k];
        long long last = first + static_cast<long long>(b.vals.size());
        lo[k] = static_cast<int>(std::max<long long>(0, first));
        hi[k] = static_cast<int>(std::min<long long>(f.samples_per_axis, last));
        if (hi[k] < lo[k]) hi[k] = lo[k];
    }
    size_t total = 1;
    for (size_t k = 0; k < d; ++k) total *= static_cast<size_t>(hi[k] - lo[k]);
    if (total == 0) return Complex(0.0, 0.0);

    std::vector<double> re(total), im(total);
    std::vector<int> idx(d);
    for (size_t k = 0; k < d; ++k) idx[k] = lo[k];
    for (size_t tpos = 0; tpos < total; ++tpos) {
        Complex phi(1.0, 0.0);
        for (size_t k = 0; k < d; ++k) {
            const AxisBase& b = *bases[k];
            phi *= b.vals[static_cast<size_t>(idx[k] - delta[k] - b.r_lo)];
        }
        Complex term = f.values[f.flat_index(idx)] * std::conj(phi);
        re[tpos] = term.real();
        im[tpos] = term.imag();
        for (size_t k = d; k-- > 0;) {
            if (++idx[k] < hi[k]) break;
            idx[k] = lo[k];
        }
    }
    double vol = rat_to_double(f.cell_volume());
    return Complex(pairwise_sum_serial(re.data(), total) * vol,
                   pairwise_sum_serial(im.data(), total) * vol);
}

}  // namespace

std::vector<Complex> packet_coefficients_serial(const GridFunction& f,
                                                std::span<const Tile> tiles,
                                                const Profile& prof, double window_eps) {
    auto plan = build_batch_plan(f, tiles, prof, window_eps);
    std::vector<Complex> out(tiles.size());
    for (size_t i = 0; i < tiles.size(); ++i) out[i] = batch_coefficient(f, tiles[i], plan);
    return out;
}

std::vector<Complex> packet_coefficients(const GridFunction& f, std::span<const Tile> tiles,
                                         const Profile& prof, double window_eps) {
    auto plan = build_batch_plan(f, tiles, prof, window_eps);
    std::vector<Complex> out(tiles.size());
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(tiles.size()); ++i)
        out[static_cast<size_t>(i)] =
            batch_coefficient(f, tiles[static_cast<size_t>(i)], plan);
    return out;
}

ReconstructionResult frame_reconstruct(const GridFunction& g, long scale, const Profile& prof,
                                       double coeff_threshold, double center_limit) {
    const size_t d = g.dim();
    double s = rat_to_double(pow2(scale));
    double norm_g = lp_norm(g, 2.0);
    double thresh = coeff_threshold * norm_g;

    // Frequency cube centers per axis: 2^scale (k/3 + 1/2), within the band.
    std::vector<long long> kmin(d), kmax(d);
    for (size_t ax = 0; ax < d; ++ax) {
        double hk = rat_to_double(g.cell_width(ax));
        double lim = (0.5 / hk / s - 0.5) * 3.0;
        kmin[ax] = static_cast<long long>(std::floor(-lim - 2));
        kmax[ax] = static_cast<long long>(std::ceil(lim + 2));
    }

    // Spatial cube corners per axis: cover the domain.
    Rat side = pow2(-scale);
    std::vector<long long> zmin(d), zmax(d);
    for (size_t ax = 0; ax < d; ++ax) {
        Rat lo = g.domain.sides[ax].lo / side, hi = g.domain.sides[ax].hi / side;
        Int fl, ce;
        mpz_fdiv_q(fl.get_mpz_t(), lo.get_num().get_mpz_t(), lo.get_den().get_mpz_t());
        mpz_cdiv_q(ce.get_mpz_t(), hi.get_num().get_mpz_t(), hi.get_den().get_mpz_t());
        zmin[ax] = fl.get_si() - 1;
        zmax[ax] = ce.get_si();
    }

    auto for_each_lattice = [&](const std::vector<long long>& lo,
                                const std::vector<long long>& hi, auto&& fn) {
        std::vector<long long> it(lo);
        for (size_t ax = 0; ax < d; ++ax)
            if (lo[ax] > hi[ax]) return;
        for (;;) {
            fn(it);
            size_t ax = d;
            bool done = true;
            while (ax-- > 0) {
                if (++it[ax] <= hi[ax]) {
                    done = false;
                    break;
                }
                it[ax] = lo[ax];
            }
            if (done) break;
        }
    };

    std::vector<Tile> tiles;
    for_each_lattice(kmin, kmax, [&](const std::vector<long long>& kk) {
        std::vector<long long> corner(d);
        std::vector<int> shift(d);
        for (size_t ax = 0; ax < d; ++ax) {
            long long k = kk[ax];
            long long z = (k >= 0) ? k / 3 : -((-k + 2) / 3);
            corner[ax] = z;
            shift[ax] = static_cast<int>(k - 3 * z);
        }
        ShiftedDyadicCube xi(scale, corner, shift);
        auto cx = xi.center();
        for (size_t ax = 0; ax < d; ++ax) {
            double hk = rat_to_double(g.cell_width(ax));
            double cc = std::abs(rat_to_double(cx[ax]));
            if (cc + 0.5 * s >= 0.5 / hk) return;
            if (center_limit >= 0.0 && cc > center_limit) return;
        }
        for_each_lattice(zmin, zmax, [&](const std::vector<long long>& zz) {
            tiles.emplace_back(DyadicCube(-scale, zz), xi);
        });
    });

    auto coefs = packet_coefficients(g, tiles, prof);

    ReconstructionResult res;
    res.reconstruction = GridFunction(g.domain, g.samples_per_axis);
    double dropped2 = 0.0;
    for (size_t i = 0; i < tiles.size(); ++i) {
        if (std::abs(coefs[i]) < thresh) {
            dropped2 += std::norm(coefs[i]);
            continue;
        }
        ++res.terms;
        auto ax = axis_factors(tiles[i], prof, g);
        std::vector<int> idx(d);
        bool empty = false;
        for (size_t k = 0; k < d; ++k) {
            idx[k] = ax[k].lo;
            if (ax[k].lo >= ax[k].hi) empty = true;
        }
        while (!empty) {
            Complex v(1.0, 0.0);
            for (size_t k = 0; k < d; ++k)
                v *= ax[k].vals[static_cast<size_t>(idx[k] - ax[k].lo)];
            res.reconstruction.values[res.reconstruction.flat_index(idx)] += coefs[i] * v;
            size_t k = d;
            bool done = true;
            while (k-- > 0) {
                if (++idx[k] < ax[k].hi) {
                    done = false;
                    break;
                }
                idx[k] = ax[k].lo;
            }
            if (done) break;
        }
    }
    res.dropped_mass = std::sqrt(dropped2);

    GridFunction diff(g.domain, g.samples_per_axis);
    for (size_t i = 0; i < diff.size(); ++i)
        diff.values[i] = g.values[i] - res.reconstruction.values[i];
    res.rel_l2_error = (norm_g > 0) ? lp_norm(diff, 2.0) / norm_g : lp_norm(diff, 2.0);
    return res;
}

std::vector<OverlapRow> overlap_decay_check(const Profile& prof,
                                            const std::vector<long long>& separations) {
    const size_t d = static_cast<size_t>(prof.dim());
    long long maxsep = 0;
    for (long long z : separations) maxsep = std::max(maxsep, std::abs(z));
    long long w = 2 * maxsep + 256;
    std::vector<Interval> iv(d, Interval(to_rat(-w), to_rat(w)));
    int n = (d >= 2) ? (1 << 9) : (1 << 12);
    GridFunction ref(Box(iv), n);

    std::vector<int> sh(d, 0);
    ShiftedDyadicCube xi(0, std::vector<long long>(d, 0), sh);
    Tile base(DyadicCube(0, std::vector<long long>(d, 0)), xi);
    auto phi0 = make_wave_packet(base, prof, ref, 1.0);

    std::vector<OverlapRow> rows;
    for (long long z : separations) {
        std::vector<long long> corner(d, 0);
        corner[0] = z;
        Tile shifted(DyadicCube(0, corner), xi);
        auto phiz = make_wave_packet(shifted, prof, ref, 1.0);
        double val = std::abs(inner_product(phi0, phiz));
        double dist = std::max<double>(0.0, static_cast<double>(std::abs(z)) - 1.0);
        rows.push_back(OverlapRow{dist, val,
                                  val * std::pow(1.0 + dist, 5.0 * static_cast<double>(d))});
    }
    return rows;
}

}  // namespace tfwave
