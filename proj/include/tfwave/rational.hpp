#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tfwave {

using Rat = mpq_class;
using Int = mpz_class;

// 2^l as an exact rational, l may be negative.
inline Rat pow2(long l) {
    Int num = 1, den = 1;
    if (l >= 0) {
        mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), static_cast<unsigned long>(l));
    } else {
        mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), static_cast<unsigned long>(-l));
    }
    return Rat(num, den);
}

// Parses "p", "p/q", or a plain integer string. Used by the JSON formats.
inline Rat rat_from_string(const std::string& s) {
    Rat r;
    if (r.set_str(s, 10) != 0) throw std::invalid_argument("bad rational: " + s);
    r.canonicalize();
    return r;
}

inline std::string rat_to_string(const Rat& r) { return r.get_str(); }

inline double rat_to_double(const Rat& r) { return r.get_d(); }

// GMP has no long long overloads; on this platform long is 64-bit.
inline Rat to_rat(long long v) { return Rat(static_cast<long>(v)); }

// Exact conversion; every finite double is a dyadic rational.
inline Rat rat_from_double(double x) { return Rat(x); }

// Smallest integer k with value <= 2^k (value > 0), i.e. dyadic ceiling exponent.
inline long dyadic_ceil_log2(const Rat& value) {
    if (value <= 0) throw std::invalid_argument("dyadic_ceil_log2: value must be positive");
    long k = 0;
    if (value > 1) {
        while (pow2(k) < value) ++k;
    } else {
        while (pow2(k - 1) >= value) --k;
    }
    return k;
}

// Half-open interval [lo, hi).
struct Interval {
    Rat lo, hi;

    Interval() = default;
    Interval(Rat l, Rat h) : lo(std::move(l)), hi(std::move(h)) {
        if (this->lo > this->hi) throw std::invalid_argument("Interval: lo > hi");
    }

    Rat length() const { return hi - lo; }
    Rat center() const { return (lo + hi) / 2; }

    bool contains(const Rat& x) const { return lo <= x && x < hi; }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
    bool strictly_contains(const Interval& o) const {
        return contains(o) && (lo < o.lo || o.hi < hi);
    }
    bool intersects(const Interval& o) const { return lo < o.hi && o.lo < hi; }

    // Gap between the closures; 0 if they touch or overlap.
    Rat gap(const Interval& o) const {
        if (o.lo > hi) return o.lo - hi;
        if (lo > o.hi) return lo - o.hi;
        return Rat(0);
    }

    // Interval scaled by factor c about its center.
    Interval dilate(const Rat& c) const {
        Rat half = length() * c / 2;
        Rat mid = center();
        return Interval(mid - half, mid + half);
    }

    bool operator==(const Interval& o) const { return lo == o.lo && hi == o.hi; }
};

inline int rat_cmp(const Rat& a, const Rat& b) { return cmp(a, b); }

inline bool lex_less(const std::vector<Rat>& a, const std::vector<Rat>& b) {
    for (size_t i = 0; i < a.size() && i < b.size(); ++i) {
        int c = cmp(a[i], b[i]);
        if (c != 0) return c < 0;
    }
    return a.size() < b.size();
}

}  // namespace tfwave
