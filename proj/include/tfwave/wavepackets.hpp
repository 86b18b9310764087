#pragma once

#include "tfwave/geometry.hpp"
#include "tfwave/gridfn.hpp"

#include <memory>
#include <span>
#include <vector>

namespace tfwave {

enum class BumpKind { Poly, Exp };

// Admissible profile: rho_hat is the square root of a smooth partition of
// unity over the (1/3)Z lattice, supported in [-1/4, 1/4]; rho is evaluated
// in space by quadrature of the band-limited transform. Tensorized over
// axes. Immutable and safe to share once built.
class Profile {
public:
    Profile(int dim, BumpKind kind, int decay_order);

    int dim() const { return dim_; }
    int decay_order() const { return decay_order_; }
    BumpKind kind() const { return kind_; }

    // One-dimensional factors.
    double rho1(double x) const;
    double rho1_deriv(double x) const;
    double rho_hat1(double xi) const;

    // Per-axis partition sum  sum_z |rho_hat(xi - z/3)|^2.
    double partition_sum1(double xi) const;

    // ||rho||_2 over R^dim; exactly 3^(-dim/2).
    double l2_norm() const;

    // Fraction of the 1-d squared mass beyond |x| >= r (cached table).
    double tail_mass_fraction(double r) const;

    // Radius beyond which |rho| stays below eps (cached scan).
    double window_radius(double eps) const;

private:
    double transition(double t) const;  // rises 0 -> 1 on [0,1], T(t)+T(1-t)=1

    int dim_;
    BumpKind kind_;
    int decay_order_;
    int poly_order_;                  // q edge exponent parameter
    std::vector<double> beta_nodes_, beta_weights_;  // transition quadrature
    double beta_norm_ = 1.0;
    std::vector<double> osc_nodes_, osc_weights_, osc_ghat_;  // space-side quadrature
    std::vector<double> tail_cum_;  // cumulative tail of rho^2, step tail_step_
    std::vector<double> amp_max_;   // running max of |rho| beyond each step
    double tail_step_ = 0.125;
};

// The canonical frame profile for a given dimension (poly bump, N1 = 10 d).
const Profile& frame_profile(int dim);
Profile make_frame_profile(int dim, BumpKind kind = BumpKind::Poly, int decay_order = 0);

// |I|^{-1/2} e^{2 pi i c(Xi).(x - c(I))} rho((x - c(I))/s(I)) sampled on the
// grid of `ref` (values outside the tail window are zero). Throws
// TileOutsideDomain when the squared tail mass clipped by the domain exceeds
// `tail_tolerance`, and GridMismatch when the frequency cube exceeds the
// grid's resolvable band.
GridFunction make_wave_packet(const Tile& tile, const Profile& prof, const GridFunction& ref,
                              double tail_tolerance = 1e-6);

Complex inner_product(const GridFunction& f, const GridFunction& g);

// <f | phi_tile> evaluated over the packet window only.
Complex packet_coefficient(const GridFunction& f, const Tile& tile, const Profile& prof);

// Batch coefficients with shared per-scale axis profiles; the parallel
// version partitions over tiles and is bit-identical to the serial
// reference. window_eps truncates where the profile drops below it.
std::vector<Complex> packet_coefficients(const GridFunction& f, std::span<const Tile> tiles,
                                         const Profile& prof, double window_eps = 1e-14);
std::vector<Complex> packet_coefficients_serial(const GridFunction& f,
                                                std::span<const Tile> tiles,
                                                const Profile& prof,
                                                double window_eps = 1e-14);

struct ReconstructionResult {
    GridFunction reconstruction;
    double rel_l2_error = 0.0;
    double dropped_mass = 0.0;  // sqrt(sum of |coef|^2 below threshold)
    size_t terms = 0;
};

// Truncated frame sum over all tiles with frequency scale 2^scale. Frequency
// cubes are enumerated across the grid band, optionally capped at
// |c(Xi)|_inf <= center_limit when the band of g is known.
ReconstructionResult frame_reconstruct(const GridFunction& g, long scale, const Profile& prof,
                                       double coeff_threshold = 1e-12,
                                       double center_limit = -1.0);

struct OverlapRow {
    double separation;  // d(I, I')/s(I)
    double inner_abs;
    double normalized;  // inner_abs * (1 + separation)^(5 dim)
};

// Same-scale spatial overlap decay table for frame packets.
std::vector<OverlapRow> overlap_decay_check(const Profile& prof,
                                            const std::vector<long long>& separations);

}  // namespace tfwave
