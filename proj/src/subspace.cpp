#include "tfwave/subspace.hpp"

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <random>
#include <sstream>

namespace tfwave {

using nlohmann::json;

Subspace::Subspace(int n_, int d_, int m_, std::vector<std::vector<std::vector<Rat>>> b)
    : n(n_), d(d_), m(m_), basis(std::move(b)) {
    if (n < 2 || d < 1 || m < 1) throw std::invalid_argument("Subspace: bad (n,d,m)");
    if (static_cast<int>(basis.size()) != m) throw std::invalid_argument("Subspace: basis size");
    for (const auto& v : basis) {
        if (static_cast<int>(v.size()) != n) throw std::invalid_argument("Subspace: vector arity");
        for (const auto& blk : v)
            if (static_cast<int>(blk.size()) != d)
                throw std::invalid_argument("Subspace: block dimension");
        for (int k = 0; k < d; ++k) {
            Rat s = 0;
            for (int j = 0; j < n; ++j) s += v[j][k];
            if (s != 0) throw std::invalid_argument("Subspace: basis vector not in Gamma_0");
        }
    }
    RatMatrix full(static_cast<size_t>(m), static_cast<size_t>(n * d));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < d; ++k)
                full.at(static_cast<size_t>(i), static_cast<size_t>(j * d + k)) = basis[i][j][k];
    if (full.rank() != static_cast<size_t>(m))
        throw std::invalid_argument("Subspace: basis not linearly independent");
}

RatMatrix Subspace::coord_matrix(const std::vector<std::pair<int, int>>& theta) const {
    RatMatrix out(static_cast<size_t>(m), theta.size());
    for (int i = 0; i < m; ++i)
        for (size_t c = 0; c < theta.size(); ++c)
            out.at(static_cast<size_t>(i), c) = basis[i][theta[c].first - 1][theta[c].second - 1];
    return out;
}

RatMatrix Subspace::block_matrix(const std::vector<int>& blocks) const {
    std::vector<std::pair<int, int>> theta;
    for (int j : blocks)
        for (int k = 1; k <= d; ++k) theta.emplace_back(j, k);
    return coord_matrix(theta);
}

std::vector<std::vector<Rat>> Subspace::from_coeffs(const std::vector<Rat>& t) const {
    std::vector<std::vector<Rat>> v(static_cast<size_t>(n), std::vector<Rat>(d, Rat(0)));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < d; ++k) v[j][k] += t[static_cast<size_t>(i)] * basis[i][j][k];
    return v;
}

Subspace subspace_from_kernel_maps(int n, int d, const std::vector<RatMatrix>& maps) {
    if (static_cast<int>(maps.size()) != n - 1)
        throw std::invalid_argument("subspace_from_kernel_maps: need n-1 maps");
    size_t delta = maps[0].cols();
    for (const auto& mp : maps)
        if (mp.rows() != static_cast<size_t>(d) || mp.cols() != delta)
            throw std::invalid_argument("subspace_from_kernel_maps: map shape");

    // Constraints on xi in (R^d)^n: sum_j xi_j = 0 and sum_{j<n} Lj^T xi_j = 0.
    size_t D = static_cast<size_t>(n * d);
    RatMatrix con(static_cast<size_t>(d) + delta, D);
    for (int k = 0; k < d; ++k)
        for (int j = 0; j < n; ++j) con.at(static_cast<size_t>(k), static_cast<size_t>(j * d + k)) = 1;
    for (size_t t = 0; t < delta; ++t)
        for (int j = 0; j < n - 1; ++j)
            for (int k = 0; k < d; ++k)
                con.at(static_cast<size_t>(d) + t, static_cast<size_t>(j * d + k)) =
                    maps[static_cast<size_t>(j)].at(static_cast<size_t>(k), t);

    auto null_basis = con.kernel_basis();
    int m = static_cast<int>(null_basis.size());
    std::vector<std::vector<std::vector<Rat>>> basis;
    basis.reserve(null_basis.size());
    for (const auto& v : null_basis) {
        std::vector<std::vector<Rat>> w(static_cast<size_t>(n), std::vector<Rat>(d));
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < d; ++k) w[static_cast<size_t>(j)][static_cast<size_t>(k)] =
                v[static_cast<size_t>(j * d + k)];
        basis.push_back(std::move(w));
    }
    return Subspace(n, d, m, std::move(basis));
}

RankParams rank_params(long m, long d) {
    if (m < 1 || d < 1) throw std::invalid_argument("rank_params: m,d >= 1");
    RankParams p;
    p.l = m / d;
    p.r = m % d;
    long t = p.l + 1 - (d - p.r);
    if (t < 0) {
        p.nonnegative = false;
        p.a = p.b = 0;
    } else {
        p.a = t / d;
        p.b = t % d;
    }
    return p;
}

int projection_image_dim(const Subspace& g, const std::vector<std::pair<int, int>>& theta) {
    if (theta.empty()) throw std::invalid_argument("projection_image_dim: empty Theta");
    return static_cast<int>(g.coord_matrix(theta).rank());
}

namespace {

long ceil_div(long a, long b) { return (a + b - 1) / b; }

void subsets_rec(const std::vector<int>& pool, size_t k, size_t start, std::vector<int>& cur,
                 std::vector<std::vector<int>>& out) {
    if (cur.size() == k) {
        out.push_back(cur);
        return;
    }
    for (size_t i = start; i + (k - cur.size()) <= pool.size(); ++i) {
        cur.push_back(pool[i]);
        subsets_rec(pool, k, i + 1, cur, out);
        cur.pop_back();
    }
}

std::vector<std::vector<int>> subsets(const std::vector<int>& pool, size_t k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    subsets_rec(pool, k, 0, cur, out);
    return out;
}

std::vector<int> without(const std::vector<int>& pool, const std::vector<int>& used) {
    std::vector<int> out;
    for (int x : pool)
        if (std::find(used.begin(), used.end(), x) == used.end()) out.push_back(x);
    return out;
}

}  // namespace

Type1Result check_type1(const Subspace& g) {
    long ceil_rank = ceil_div(g.m, g.d);
    if (2 * g.m >= static_cast<long>(g.n) * g.d)
        throw RankOutOfRange("check_type1: requires m/d < n/2");
    std::vector<int> all(static_cast<size_t>(g.n));
    for (int j = 0; j < g.n; ++j) all[static_cast<size_t>(j)] = j + 1;
    for (const auto& A : subsets(all, static_cast<size_t>(ceil_rank))) {
        if (g.block_matrix(A).rank() != static_cast<size_t>(g.m))
            return Type1Result{false, A};
    }
    return Type1Result{true, std::nullopt};
}

std::string IndexFamily::describe() const {
    std::ostringstream os;
    auto set = [&](const std::vector<int>& s) {
        os << "{";
        for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
        os << "}";
    };
    os << "A=";
    set(A);
    for (size_t k = 0; k < B.size(); ++k) {
        os << " B" << (k + 1) << "=";
        set(B[k]);
    }
    return os.str();
}

std::vector<IndexFamily> enumerate_families(const Subspace& g) {
    const long n = g.n, d = g.d, m = g.m;
    long ceil_rank = ceil_div(m, d);
    if (!(2 * m < n * d && n <= 2 * ceil_rank))
        throw RankOutOfRange("families: requires m/d < n/2 <= ceil(m/d)");

    std::vector<int> all(static_cast<size_t>(n));
    for (long j = 0; j < n; ++j) all[static_cast<size_t>(j)] = static_cast<int>(j + 1);

    std::vector<IndexFamily> fams;
    if (2 * m <= (n - 1) * d) {
        // Medium rank: L = 2, #A = 1, #B1 = #B2 = n' with n = 2n'+2.
        if (n % 2 != 0)
            throw RankOutOfRange(
                "families: medium-rank case requires even n; the definition does not "
                "cover odd n");
        long np = (n - 2) / 2;
        for (int a : all) {
            std::vector<int> rest = without(all, {a});
            for (const auto& b1 : subsets(rest, static_cast<size_t>(np))) {
                std::vector<int> rest2 = without(rest, b1);
                for (const auto& b2 : subsets(rest2, static_cast<size_t>(np))) {
                    IndexFamily f;
                    f.A = {a};
                    f.B = {b1, b2};
                    f.L = 2;
                    fams.push_back(std::move(f));
                }
            }
        }
        return fams;
    }

    // Large rank: L = d, blocks assembled from U_1..U_{2d-1}, W.
    RankParams p = rank_params(m, d);
    if (!p.nonnegative)
        throw NegativeBlockSize("families: l+1-(d-r) < 0, the condition fails by definition");
    size_t szA = static_cast<size_t>(d - p.r), szU = static_cast<size_t>(p.a),
           szW = static_cast<size_t>(p.b);

    std::vector<IndexFamily> out;
    for (const auto& A : subsets(all, szA)) {
        std::vector<int> pool = without(all, A);
        // Recursive choice of U_1..U_{2d-1}, then W.
        std::vector<std::vector<int>> Us;
        std::function<void(std::vector<int>&)> rec = [&](std::vector<int>& pl) {
            if (Us.size() == static_cast<size_t>(2 * d - 1)) {
                for (const auto& W : subsets(pl, szW)) {
                    IndexFamily f;
                    f.A = A;
                    f.U = Us;
                    f.W = W;
                    f.L = static_cast<int>(d);
                    f.B.resize(static_cast<size_t>(d));
                    for (long k = 1; k <= d; ++k) {
                        std::vector<int> bk;
                        for (long i = k; i <= k + d - 1; ++i)
                            for (int x : Us[static_cast<size_t>(i - 1)]) bk.push_back(x);
                        for (int x : W) bk.push_back(x);
                        std::sort(bk.begin(), bk.end());
                        f.B[static_cast<size_t>(k - 1)] = std::move(bk);
                    }
                    out.push_back(std::move(f));
                }
                return;
            }
            for (const auto& u : subsets(pl, szU)) {
                Us.push_back(u);
                std::vector<int> next = without(pl, u);
                rec(next);
                Us.pop_back();
            }
        };
        rec(pool);
    }
    return out;
}

RatMatrix build_type2_map(const Subspace& g, const IndexFamily& fam) {
    const int L = fam.L, d = g.d, m = g.m;
    if (L < 1 || static_cast<int>(fam.B.size()) != L)
        throw InvalidFamily("build_type2_map: block count mismatch");
    // Disjointness of A and the B-blocks' generators.
    {
        std::vector<int> seen;
        auto add = [&](const std::vector<int>& s) {
            for (int x : seen)
                for (int y : s)
                    if (x == y) throw InvalidFamily("build_type2_map: sets not disjoint");
            for (int y : s) seen.push_back(y);
        };
        add(fam.A);
        if (!fam.U.empty() || !fam.W.empty()) {
            for (const auto& u : fam.U) add(u);
            add(fam.W);
        } else {
            for (const auto& b : fam.B) add(b);
        }
        for (int x : seen)
            if (x < 1 || x > g.n) throw InvalidFamily("build_type2_map: index out of range");
        if (fam.A.empty()) throw InvalidFamily("build_type2_map: A must be nonempty");
    }

    size_t rows = 0;
    for (const auto& b : fam.B) rows += b.size() * static_cast<size_t>(d);
    rows += static_cast<size_t>(L - 1) * fam.A.size() * static_cast<size_t>(d);
    RatMatrix M(rows, static_cast<size_t>(L * m));

    size_t row = 0;
    for (int k = 0; k < L; ++k) {
        for (int j : fam.B[static_cast<size_t>(k)]) {
            for (int c = 0; c < d; ++c) {
                for (int i = 0; i < m; ++i)
                    M.at(row, static_cast<size_t>(k * m + i)) = g.basis[static_cast<size_t>(i)]
                        [static_cast<size_t>(j - 1)][static_cast<size_t>(c)];
                ++row;
            }
        }
    }
    for (int k = 1; k < L; ++k) {
        for (int j : fam.A) {
            for (int c = 0; c < d; ++c) {
                for (int i = 0; i < m; ++i) {
                    const Rat& e = g.basis[static_cast<size_t>(i)][static_cast<size_t>(j - 1)]
                                          [static_cast<size_t>(c)];
                    M.at(row, static_cast<size_t>(i)) = e;
                    M.at(row, static_cast<size_t>(k * m + i)) = -e;
                }
                ++row;
            }
        }
    }
    return M;
}

FamilyResult check_family(const Subspace& g, const IndexFamily& fam) {
    RatMatrix M = build_type2_map(g, fam);
    size_t want = static_cast<size_t>(fam.L) * static_cast<size_t>(g.m);
    if (M.rank() == want) return FamilyResult{true, std::nullopt};

    auto null_basis = M.kernel_basis();
    KernelWitness w;
    const auto& v = null_basis.front();
    for (int k = 0; k < fam.L; ++k) {
        std::vector<Rat> t(v.begin() + k * g.m, v.begin() + (k + 1) * g.m);
        w.ambient.push_back(g.from_coeffs(t));
        w.t.push_back(std::move(t));
    }
    return FamilyResult{false, std::move(w)};
}

Type2Result check_type2(const Subspace& g) {
    auto fams = enumerate_families(g);  // throws RankOutOfRange / NegativeBlockSize
    Type2Result out;
    for (const auto& f : fams) {
        ++out.families_checked;
        FamilyResult r = check_family(g, f);
        if (!r.trivial_kernel) {
            out.holds = false;
            out.witness = std::move(r.witness);
            out.failing_family = f;
            return out;
        }
    }
    out.holds = true;
    return out;
}

CoordinateKernel coordinate_kernel(const Subspace& g, int j) {
    if (j < 1 || j > g.n) throw std::invalid_argument("coordinate_kernel: j out of range");
    RatMatrix M(static_cast<size_t>(g.d), static_cast<size_t>(g.m));
    for (int c = 0; c < g.d; ++c)
        for (int i = 0; i < g.m; ++i)
            M.at(static_cast<size_t>(c), static_cast<size_t>(i)) =
                g.basis[static_cast<size_t>(i)][static_cast<size_t>(j - 1)][static_cast<size_t>(c)];
    CoordinateKernel out;
    out.coeff_basis = M.kernel_basis();
    for (const auto& t : out.coeff_basis) out.ambient_basis.push_back(g.from_coeffs(t));
    return out;
}

Subspace sample_generic(int n, int d, int m, uint64_t seed) {
    if (2 * m >= n * d) throw RankOutOfRange("sample_generic: requires m/d < n/2");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long long> dist(-1000000, 1000000);
    for (;;) {
        std::vector<std::vector<std::vector<Rat>>> basis(
            static_cast<size_t>(m),
            std::vector<std::vector<Rat>>(static_cast<size_t>(n), std::vector<Rat>(d, Rat(0))));
        for (int i = 0; i < m; ++i) {
            for (int k = 0; k < d; ++k) {
                Rat sum = 0;
                for (int j = 0; j + 1 < n; ++j) {
                    Rat e = to_rat(dist(rng));
                    basis[static_cast<size_t>(i)][static_cast<size_t>(j)][static_cast<size_t>(k)] = e;
                    sum += e;
                }
                basis[static_cast<size_t>(i)][static_cast<size_t>(n - 1)][static_cast<size_t>(k)] =
                    -sum;
            }
        }
        try {
            return Subspace(n, d, m, std::move(basis));
        } catch (const std::invalid_argument&) {
            // Dependent draw (probability ~0); redraw deterministically.
            continue;
        }
    }
}

Subspace subspace_from_json(const std::string& text) {
    json j = json::parse(text);
    int n = j.at("n").get<int>(), d = j.at("d").get<int>(), m = j.at("m").get<int>();
    std::vector<std::vector<std::vector<Rat>>> basis;
    for (const auto& vec : j.at("basis")) {
        std::vector<std::vector<Rat>> v;
        for (const auto& blk : vec) {
            std::vector<Rat> b;
            for (const auto& e : blk) b.push_back(rat_from_string(e.get<std::string>()));
            v.push_back(std::move(b));
        }
        basis.push_back(std::move(v));
    }
    return Subspace(n, d, m, std::move(basis));
}

std::string subspace_to_json(const Subspace& g) {
    json j;
    j["n"] = g.n;
    j["d"] = g.d;
    j["m"] = g.m;
    json basis = json::array();
    for (const auto& v : g.basis) {
        json vec = json::array();
        for (const auto& blk : v) {
            json b = json::array();
            for (const auto& e : blk) b.push_back(rat_to_string(e));
            vec.push_back(b);
        }
        basis.push_back(vec);
    }
    j["basis"] = basis;
    return j.dump(2);
}

}  // namespace tfwave
