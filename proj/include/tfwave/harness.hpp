#pragma once

#include "tfwave/report.hpp"
#include "tfwave/subspace.hpp"
#include "tfwave/trees.hpp"
#include "tfwave/vectortrees.hpp"
#include "tfwave/wavepackets.hpp"

namespace tfwave {

struct ModelConfig {
    Subspace gamma;
    Rat C1{16};
    Rat C2{32};
    Rat C3;
    Rat c_d{1, 10};
    Rat centralize_floor{1024};
    double C_exceptional = 8.0;

    Box spatial_domain;   // grid carrier in R^d
    int grid_n = 1 << 12;
    Rat spatial_margin{4};  // keep tiles this many side lengths inside

    Box whitney_window;   // in R^{d(n-1)}
    long l_min = -6;
    long l_max = 0;

    std::vector<double> p;  // p_1 .. p_{n-1}
    double q = 1.0;
    uint64_t seed = 1;

    ModelConfig() : C3(pow2(15)) {}
    void validate() const;
};

struct BuildResult {
    Collection collection;
    ExperimentReport report;       // hypothesis bands and bookkeeping
    double hyp2_ratio_min = 0.0;   // d(Xi, Gamma) / (C1 s(Xi)) band
    double hyp2_ratio_max = 0.0;
    size_t groups = 0;             // sparsify groups; the largest was kept
};

// Whitney cover -> shifted covers and the closing cube -> scale equalization
// -> dedup -> sparsification; every kept tile is verified against the four
// admissibility hypotheses.
BuildResult build_collection(const ModelConfig& cfg);

double discrete_form(const Collection& col, const CoefTable& coef);

// T^dis applied to f_1..f_{n-1} (their coefficient table), with unimodular
// weights c_R; returns the synthesized grid function.
GridFunction discrete_operator(const Collection& col, const CoefTable& coef,
                               const std::vector<Complex>& c_r, const Profile& prof,
                               const GridFunction& ref);

struct ExceptionalSet {
    GridFunction indicator;
    double achieved_C = 0.0;
    double measure = 0.0;
    double en_measure = 0.0;
};
// Union over j < n of {M(1_{E_j}/|E_j|) > C/|E_n|}, with C doubled until the
// measure is at most |E_n|/2.
ExceptionalSet exceptional_set(const std::vector<GridFunction>& indicators, double C);

struct RwtResult {
    ExperimentReport report;
    std::vector<double> ratios_by_size;  // per collection decade
};
// The restricted-weak-type scaling sweep: Lambda^dis against the product of
// |E_j|^{1/p_j}, across nested sub-collections, with the exceptional-set
// shell decomposition rows.
RwtResult restricted_weak_experiment(const ModelConfig& cfg, const Collection& col,
                                     const Profile& prof,
                                     const std::vector<GridFunction>& e_sets,
                                     const std::vector<size_t>& sizes);

struct DualityCheck {
    double lhs = 0.0;  // weak norm
    double rhs = 0.0;  // sup-inf functional
    double ratio = 0.0;
};
DualityCheck weak_norm_duality_check(const GridFunction& f, double q, int trials,
                                     uint64_t seed);

}  // namespace tfwave
