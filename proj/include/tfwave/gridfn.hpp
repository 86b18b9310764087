#pragma once

#include "tfwave/errors.hpp"
#include "tfwave/geometry.hpp"
#include "tfwave/rational.hpp"

#include <complex>
#include <iosfwd>
#include <map>
#include <vector>

namespace tfwave {

using Complex = std::complex<double>;

// Complex function sampled at cell midpoints of a uniform grid over a box.
// Storage is row-major with the last axis fastest. Immutable by convention
// once built; all operations return new objects.
struct GridFunction {
    Box domain;
    int samples_per_axis = 0;
    std::vector<Complex> values;

    GridFunction() = default;
    GridFunction(Box dom, int n);

    size_t dim() const { return domain.dim(); }
    size_t size() const { return values.size(); }
    Rat cell_volume() const;
    Rat cell_width(size_t axis) const;

    size_t flat_index(const std::vector<int>& idx) const;
    std::vector<int> unflatten(size_t flat) const;
    std::vector<Rat> sample_point(const std::vector<int>& idx) const;
    std::vector<double> sample_point_d(size_t flat) const;

    bool compatible(const GridFunction& o) const {
        return domain == o.domain && samples_per_axis == o.samples_per_axis;
    }
};

// Deterministic pairwise (binary-tree) summation; exact under the refinement
// invariance the quadrature tests rely on. The parallel version evaluates
// top-level subtrees concurrently and combines them in order, so it returns
// bit-identical results to the serial one.
double pairwise_sum_serial(const double* a, size_t n);
double pairwise_sum(const double* a, size_t n);

double lp_norm(const GridFunction& f, double p);
double weak_lp_norm(const GridFunction& f, double p);

// Uncentered dyadic maximal function: per sample, the largest average of |f|
// over dyadic cubes containing the sample, truncated to the domain. Requires
// dyadic-aligned cells (power-of-two sample count, dyadic cell width).
GridFunction maximal_function(const GridFunction& f);
GridFunction maximal_function_serial(const GridFunction& f);

using DyadicCoefficients = std::map<DyadicCube, Complex>;

GridFunction square_function(const DyadicCoefficients& coeffs, const Box& domain, int n);

// Sequence norms over the laminar family of coefficient cubes; measures are
// exact rationals, powers in double.
double seq_lp(const DyadicCoefficients& coeffs, double p);
double seq_bmo(const DyadicCoefficients& coeffs);

struct JNResult {
    double strong_sup = 0.0;  // sup_I0 |I0|^{-1/p} || . ||_p
    double weak_sup = 0.0;    // sup_I0 |I0|^{-1/q} || . ||_{q,inf}
    double ratio = 0.0;
};
JNResult john_nirenberg_ratio(const DyadicCoefficients& coeffs, double p, double q);

struct InterpolationCheck {
    double lhs = 0.0;  // ||.||_p
    double rhs = 0.0;  // ||.||_2^(2/p) ||.||_bmo^(1-2/p)
};
InterpolationCheck interpolation_check(const DyadicCoefficients& coeffs, double p);

// Little-endian binary format: u32 dim, u32 samples_per_axis, per-axis
// (lo, hi) as f64, then interleaved re/im samples.
void write_binary(const GridFunction& f, std::ostream& os);
GridFunction read_binary(std::istream& is);

// CSV rows "x1[,x2],re,im" for 1- and 2-dimensional functions.
void write_csv(const GridFunction& f, std::ostream& os);

}  // namespace tfwave
