#include "tfwave/gridfn.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <istream>
#include <ostream>
#include <omp.h>

namespace tfwave {

GridFunction::GridFunction(Box dom, int n) : domain(std::move(dom)), samples_per_axis(n) {
    if (n < 2) throw std::invalid_argument("GridFunction: need at least 2 samples per axis");
    size_t total = 1;
    for (size_t i = 0; i < domain.dim(); ++i) total *= static_cast<size_t>(n);
    values.assign(total, Complex(0.0, 0.0));
}

Rat GridFunction::cell_volume() const {
    Rat v = 1;
    for (size_t i = 0; i < dim(); ++i) v *= cell_width(i);
    return v;
}

Rat GridFunction::cell_width(size_t axis) const {
    return domain.sides[axis].length() / samples_per_axis;
}

size_t GridFunction::flat_index(const std::vector<int>& idx) const {
    assert(idx.size() == dim());
    size_t flat = 0;
    for (size_t i = 0; i < idx.size(); ++i) {
        assert(idx[i] >= 0 && idx[i] < samples_per_axis);
        flat = flat * static_cast<size_t>(samples_per_axis) + static_cast<size_t>(idx[i]);
    }
    return flat;
}

std::vector<int> GridFunction::unflatten(size_t flat) const {
    std::vector<int> idx(dim());
    for (size_t i = dim(); i-- > 0;) {
        idx[i] = static_cast<int>(flat % static_cast<size_t>(samples_per_axis));
        flat /= static_cast<size_t>(samples_per_axis);
    }
    return idx;
}

std::vector<Rat> GridFunction::sample_point(const std::vector<int>& idx) const {
    std::vector<Rat> p(dim());
    for (size_t i = 0; i < dim(); ++i)
        p[i] = domain.sides[i].lo + cell_width(i) * (2 * idx[i] + 1) / 2;
    return p;
}

std::vector<double> GridFunction::sample_point_d(size_t flat) const {
    auto idx = unflatten(flat);
    std::vector<double> p(dim());
    for (size_t i = 0; i < dim(); ++i) {
        double lo = rat_to_double(domain.sides[i].lo);
        double w = rat_to_double(cell_width(i));
        p[i] = lo + w * (idx[i] + 0.5);
    }
    return p;
}

double pairwise_sum_serial(const double* a, size_t n) {
    if (n == 0) return 0.0;
    if (n == 1) return a[0];
    size_t half = n / 2;
    return pairwise_sum_serial(a, half) + pairwise_sum_serial(a + half, n - half);
}

double pairwise_sum(const double* a, size_t n) {
    // Split at the top of the tree so the association matches the serial
    // version exactly.
    if (n < (size_t(1) << 15)) return pairwise_sum_serial(a, n);
    size_t half = n / 2;
    double left = 0.0, right = 0.0;
#pragma omp parallel sections num_threads(2)
    {
#pragma omp section
        left = pairwise_sum_serial(a, half);
#pragma omp section
        right = pairwise_sum_serial(a + half, n - half);
    }
    return left + right;
}

double lp_norm(const GridFunction& f, double p) {
    if (!(p > 0)) throw std::invalid_argument("lp_norm: p must be positive");
    if (std::isinf(p)) {
        double m = 0.0;
        for (const Complex& v : f.values) m = std::max(m, std::abs(v));
        return m;
    }
    std::vector<double> terms(f.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(f.size()); ++i)
        terms[static_cast<size_t>(i)] = std::pow(std::abs(f.values[static_cast<size_t>(i)]), p);
    double s = pairwise_sum(terms.data(), terms.size());
    return std::pow(s * rat_to_double(f.cell_volume()), 1.0 / p);
}

double weak_lp_norm(const GridFunction& f, double p) {
    if (!(p > 0)) throw std::invalid_argument("weak_lp_norm: p must be positive");
    std::vector<double> mags(f.size());
    for (size_t i = 0; i < f.size(); ++i) mags[i] = std::abs(f.values[i]);
    std::sort(mags.begin(), mags.end(), std::greater<>());
    double vol = rat_to_double(f.cell_volume());
    double best = 0.0;
    for (size_t k = 0; k < mags.size(); ++k) {
        if (mags[k] == 0.0) break;
        // |{|f| >= mags[k]}| = (k+1) cells; evaluate at the end of tie runs.
        if (k + 1 < mags.size() && mags[k + 1] == mags[k]) continue;
        best = std::max(best, mags[k] * std::pow(vol * static_cast<double>(k + 1), 1.0 / p));
    }
    return best;
}

namespace {

void check_dyadic_cells(const GridFunction& f) {
    if ((f.samples_per_axis & (f.samples_per_axis - 1)) != 0)
        throw std::invalid_argument("maximal_function: samples per axis must be a power of two");
    Rat w = f.cell_width(0);
    for (size_t i = 1; i < f.dim(); ++i)
        if (f.cell_width(i) != w)
            throw std::invalid_argument("maximal_function: cells must be cubes");
    long c = dyadic_ceil_log2(w);
    if (pow2(c) != w) throw std::invalid_argument("maximal_function: cell width not dyadic");
    for (size_t i = 0; i < f.dim(); ++i) {
        Rat q = f.domain.sides[i].lo / w;
        if (q.get_den() != 1)
            throw std::invalid_argument("maximal_function: domain corner not aligned");
    }
}

GridFunction maximal_impl(const GridFunction& f, bool parallel) {
    check_dyadic_cells(f);
    const size_t d = f.dim();

    std::vector<long long> corner(d);
    Rat w = f.cell_width(0);
    for (size_t i = 0; i < d; ++i)
        corner[i] = static_cast<long long>(Rat(f.domain.sides[i].lo / w).get_num().get_si());

    using Key = std::vector<long long>;
    std::map<Key, std::pair<double, long long>> cur;  // cube -> (sum |f|, cells)
    for (size_t flat = 0; flat < f.size(); ++flat) {
        auto idx = f.unflatten(flat);
        Key key(d);
        for (size_t i = 0; i < d; ++i) key[i] = corner[i] + idx[i];
        cur[key] = {std::abs(f.values[flat]), 1};
    }

    long extent_levels;
    {
        Rat longest = 0;
        for (size_t i = 0; i < d; ++i)
            if (f.domain.sides[i].length() > longest) longest = f.domain.sides[i].length();
        extent_levels = dyadic_ceil_log2(longest / w) + 1;
    }

    std::vector<double> best(f.size(), 0.0);
    auto apply_level = [&](const std::map<Key, std::pair<double, long long>>& lm, long rel) {
        auto update = [&](size_t flat) {
            auto idx = f.unflatten(flat);
            Key key(d);
            for (size_t i = 0; i < d; ++i) key[i] = (corner[i] + idx[i]) >> rel;
            auto it = lm.find(key);
            assert(it != lm.end());
            double avg = it->second.first / static_cast<double>(it->second.second);
            if (avg > best[flat]) best[flat] = avg;
        };
        if (parallel) {
#pragma omp parallel for schedule(static)
            for (long long flat = 0; flat < static_cast<long long>(f.size()); ++flat)
                update(static_cast<size_t>(flat));
        } else {
            for (size_t flat = 0; flat < f.size(); ++flat) update(flat);
        }
    };

    apply_level(cur, 0);
    for (long rel = 1; rel <= extent_levels; ++rel) {
        std::map<Key, std::pair<double, long long>> next;
        for (const auto& [key, sc] : cur) {
            Key pk(d);
            for (size_t i = 0; i < d; ++i) pk[i] = key[i] >> 1;
            auto& slot = next[pk];
            slot.first += sc.first;
            slot.second += sc.second;
        }
        cur = std::move(next);
        apply_level(cur, rel);
    }

    GridFunction out(f.domain, f.samples_per_axis);
    for (size_t i = 0; i < f.size(); ++i) out.values[i] = Complex(best[i], 0.0);
    return out;
}

}  // namespace

GridFunction maximal_function(const GridFunction& f) { return maximal_impl(f, true); }
GridFunction maximal_function_serial(const GridFunction& f) { return maximal_impl(f, false); }

namespace {

long long ceil_rat(const Rat& q) {
    Int c;
    mpz_cdiv_q(c.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
    return static_cast<long long>(c.get_si());
}

}  // namespace

GridFunction square_function(const DyadicCoefficients& coeffs, const Box& domain, int n) {
    GridFunction out(domain, n);
    std::vector<double> acc(out.size(), 0.0);
    const size_t d = out.dim();
    for (const auto& [cube, a] : coeffs) {
        if (cube.dim() != d) throw GridMismatch("square_function: cube dimension mismatch");
        double weight = std::norm(a) / rat_to_double(cube.volume());
        std::vector<int> lo(d), hi(d);
        bool empty = false;
        Box cb = cube.to_box();
        for (size_t i = 0; i < d; ++i) {
            Rat w = out.cell_width(i);
            Rat a0 = (cb.sides[i].lo - domain.sides[i].lo) / w;
            Rat a1 = (cb.sides[i].hi - domain.sides[i].lo) / w;
            // Cells whose midpoint lies in the cube.
            long long l0 = std::max<long long>(ceil_rat(a0 - Rat(1, 2)), 0);
            long long l1 = std::min<long long>(ceil_rat(a1 - Rat(1, 2)),
                                               out.samples_per_axis);
            if (l0 >= l1) {
                empty = true;
                break;
            }
            lo[i] = static_cast<int>(l0);
            hi[i] = static_cast<int>(l1);
        }
        if (empty) continue;
        std::vector<int> idx(lo);
        for (;;) {
            acc[out.flat_index(idx)] += weight;
            size_t ax = d;
            bool done = false;
            while (ax-- > 0) {
                if (++idx[ax] < hi[ax]) break;
                idx[ax] = lo[ax];
                if (ax == 0) done = true;
            }
            if (done) break;
        }
    }
    for (size_t i = 0; i < out.size(); ++i) out.values[i] = Complex(std::sqrt(acc[i]), 0.0);
    return out;
}

namespace {

struct Atom {
    Rat measure;
    double value;  // sum of |a_J|^2/|J| over family cubes covering the atom
};

// Atoms of the laminar family, optionally restricted to cubes inside root.
std::vector<Atom> laminar_atoms(const DyadicCoefficients& coeffs, const DyadicCube* root) {
    std::vector<const DyadicCube*> cubes;
    for (const auto& [c, a] : coeffs) {
        if (root && !root->contains(c)) continue;
        cubes.push_back(&c);
    }
    std::vector<Atom> atoms;
    for (const DyadicCube* c : cubes) {
        double v = 0.0;
        for (const DyadicCube* anc : cubes)
            if (anc->contains(*c)) v += std::norm(coeffs.at(*anc)) / rat_to_double(anc->volume());
        Rat mu = c->volume();
        for (const DyadicCube* sub : cubes) {
            if (!(c->contains(*sub)) || *sub == *c) continue;
            bool maximal = true;
            for (const DyadicCube* mid : cubes) {
                if (*mid == *c || *mid == *sub) continue;
                if (c->contains(*mid) && mid->contains(*sub)) {
                    maximal = false;
                    break;
                }
            }
            if (maximal) mu -= sub->volume();
        }
        if (mu > 0) atoms.push_back(Atom{mu, v});
    }
    return atoms;
}

double localized_strong(const std::vector<Atom>& atoms, double p) {
    double s = 0.0;
    for (const auto& a : atoms) s += rat_to_double(a.measure) * std::pow(a.value, p / 2.0);
    return std::pow(s, 1.0 / p);
}

double localized_weak(const std::vector<Atom>& atoms, double q) {
    std::vector<Atom> sorted = atoms;
    std::sort(sorted.begin(), sorted.end(),
              [](const Atom& a, const Atom& b) { return a.value > b.value; });
    double best = 0.0;
    Rat cum = 0;
    for (size_t i = 0; i < sorted.size(); ++i) {
        cum += sorted[i].measure;
        if (i + 1 < sorted.size() && sorted[i + 1].value == sorted[i].value) continue;
        if (sorted[i].value <= 0.0) break;
        best = std::max(best,
                        std::sqrt(sorted[i].value) * std::pow(rat_to_double(cum), 1.0 / q));
    }
    return best;
}

}  // namespace

double seq_lp(const DyadicCoefficients& coeffs, double p) {
    if (coeffs.empty()) return 0.0;
    auto atoms = laminar_atoms(coeffs, nullptr);
    return localized_strong(atoms, p);
}

double seq_bmo(const DyadicCoefficients& coeffs) {
    double best = 0.0;
    for (const auto& [c0, a0] : coeffs) {
        double s = 0.0;
        for (const auto& [c, a] : coeffs)
            if (c0.contains(c)) s += std::norm(a);
        best = std::max(best, std::sqrt(s / rat_to_double(c0.volume())));
    }
    return best;
}

JNResult john_nirenberg_ratio(const DyadicCoefficients& coeffs, double p, double q) {
    if (!(p > 0) || !(q > 0)) throw std::invalid_argument("john_nirenberg_ratio: p,q > 0");
    JNResult r;
    for (const auto& [c0, a0] : coeffs) {
        auto atoms = laminar_atoms(coeffs, &c0);
        double v0 = rat_to_double(c0.volume());
        r.strong_sup =
            std::max(r.strong_sup, localized_strong(atoms, p) / std::pow(v0, 1.0 / p));
        r.weak_sup = std::max(r.weak_sup, localized_weak(atoms, q) / std::pow(v0, 1.0 / q));
    }
    r.ratio = (r.weak_sup > 0) ? r.strong_sup / r.weak_sup : 0.0;
    return r;
}

InterpolationCheck interpolation_check(const DyadicCoefficients& coeffs, double p) {
    if (!(p >= 2)) throw std::invalid_argument("interpolation_check: p >= 2");
    InterpolationCheck c;
    c.lhs = seq_lp(coeffs, p);
    c.rhs = std::pow(seq_lp(coeffs, 2.0), 2.0 / p) * std::pow(seq_bmo(coeffs), 1.0 - 2.0 / p);
    return c;
}

void write_binary(const GridFunction& f, std::ostream& os) {
    auto put_u32 = [&](uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); };
    auto put_f64 = [&](double v) { os.write(reinterpret_cast<const char*>(&v), 8); };
    put_u32(static_cast<uint32_t>(f.dim()));
    put_u32(static_cast<uint32_t>(f.samples_per_axis));
    for (size_t i = 0; i < f.dim(); ++i) {
        put_f64(rat_to_double(f.domain.sides[i].lo));
        put_f64(rat_to_double(f.domain.sides[i].hi));
    }
    for (const Complex& v : f.values) {
        put_f64(v.real());
        put_f64(v.imag());
    }
}

GridFunction read_binary(std::istream& is) {
    auto get_u32 = [&]() {
        uint32_t v = 0;
        is.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    auto get_f64 = [&]() {
        double v = 0;
        is.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    uint32_t d = get_u32(), n = get_u32();
    std::vector<Interval> iv;
    for (uint32_t i = 0; i < d; ++i) {
        double lo = get_f64(), hi = get_f64();
        iv.emplace_back(rat_from_double(lo), rat_from_double(hi));
    }
    GridFunction f(Box(std::move(iv)), static_cast<int>(n));
    for (Complex& v : f.values) {
        double re = get_f64(), im = get_f64();
        v = Complex(re, im);
    }
    if (!is) throw std::runtime_error("read_binary: truncated stream");
    return f;
}

void write_csv(const GridFunction& f, std::ostream& os) {
    if (f.dim() > 2) throw std::invalid_argument("write_csv: only 1- and 2-d functions");
    if (f.dim() == 1)
        os << "x,re,im\n";
    else
        os << "x1,x2,re,im\n";
    for (size_t flat = 0; flat < f.size(); ++flat) {
        auto p = f.sample_point_d(flat);
        for (double x : p) os << x << ",";
        os << f.values[flat].real() << "," << f.values[flat].imag() << "\n";
    }
}

}  // namespace tfwave
