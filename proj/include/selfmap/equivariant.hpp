#pragma once

// Exact torus-equivariant integrals of products of evaluation, cotangent,
// and boundary divisor classes on genus-zero stable-map spaces to P^1, via
// fixed-graph localization and recursive boundary splitting.
//
// Conventions (each validated by the oracle tests rather than assumed):
//   - the torus acts on P^1 with the hyperplane lift restricting to +t at
//     the fixed point 0 and -t at infinity, so the lift squares to t^2;
//   - tangent weight of P^1 at a fixed point: 2t at 0, -2t at infinity;
//   - flag weight at a vertex: (vertex tangent weight)/(edge degree);
//   - a degree-e edge contributes (-1)^e e^{2e} / ((e!)^2 (2t)^{2e});
//   - a vertex with r edge-flags and s markings contributes, for r+s >= 3,
//     w^{r-1} * integral over the (r+s)-pointed curve space of
//     prod_F 1/(w_F - psi_F) * prod psi^{a_i}; for a 2-valent vertex either
//     w/(w_F1 + w_F2) (two edges) or psi |-> -w_F (edge plus marking); a
//     1-valent free end contributes w_F;
//   - psi integrals over the marked-curve spaces use the multinomial value
//     (m-3)!/(a_1! ... a_m!).

#include "selfmap/rational.hpp"
#include "selfmap/weights.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace selfmap {

// ---------------------------------------------------------------------------
// Laurent polynomials in the equivariant parameter t.

// Coefficients of powers of t.  Intermediate localization sums carry
// negative exponents; every completed integral must cancel them, leaving a
// polynomial supported on even exponents only.
struct EquivPoly {
    std::map<int, Rat> c;

    bool is_zero() const { return c.empty(); }

    Rat coeff(int e) const {
        auto it = c.find(e);
        return it == c.end() ? Rat(0) : it->second;
    }

    void add_term(int e, const Rat& x) {
        if (x == 0) return;
        auto [it, fresh] = c.emplace(e, x);
        if (!fresh) {
            it->second += x;
            if (it->second == 0) c.erase(it);
        }
    }

    static EquivPoly term(int e, const Rat& x) {
        EquivPoly p;
        p.add_term(e, x);
        return p;
    }

    EquivPoly& operator+=(const EquivPoly& o) {
        for (const auto& [e, x] : o.c) add_term(e, x);
        return *this;
    }
    EquivPoly& operator*=(const Rat& s) {
        if (s == 0) { c.clear(); return *this; }
        for (auto& [e, x] : c) x *= s;
        return *this;
    }
    friend EquivPoly operator*(const EquivPoly& a, const EquivPoly& b) {
        EquivPoly out;
        for (const auto& [ea, xa] : a.c)
            for (const auto& [eb, xb] : b.c) out.add_term(ea + eb, xa * xb);
        return out;
    }
    friend bool operator==(const EquivPoly&, const EquivPoly&) = default;
};

// ---------------------------------------------------------------------------
// Integrand factors.

// One factor of an integrand on \bar M_{0,n}(P^1,k): the equivariant
// hyperplane pullback at a marking, the cotangent class at a marking, or a
// boundary divisor given by one half (marking subset A, degree a) of its
// splitting.  Powers are expressed by repetition.
struct BFactor {
    enum class Kind : std::uint8_t { Ev = 0, Psi = 1, Bdry = 2 };

    Kind kind = Kind::Ev;
    int i = 0;   // marking index for Ev/Psi
    Mask A = 0;  // boundary half: marking subset
    int a = 0;   // boundary half: degree

    static BFactor ev(int i) { return BFactor{Kind::Ev, i, 0, 0}; }
    static BFactor psi(int i) { return BFactor{Kind::Psi, i, 0, 0}; }
    static BFactor bdry(Mask A, int a) { return BFactor{Kind::Bdry, 0, A, a}; }

    friend auto operator<=>(const BFactor& x, const BFactor& y) {
        return std::tie(x.kind, x.i, x.a, x.A) <=> std::tie(y.kind, y.i, y.a, y.A);
    }
    friend bool operator==(const BFactor&, const BFactor&) = default;
};

using BExpr = std::vector<BFactor>;

inline int stable_maps_dim(int n, int k) { return 2 * k - 2 + n; }

inline bool stable_maps_space_exists(int n, int k) {
    return k >= 1 || n >= 3;
}

namespace detail {

// A half of a boundary splitting is stable when it carries positive degree
// or at least three special points (its markings plus the node).
inline bool half_stable(int special_points, int deg) {
    return deg >= 1 || special_points >= 3;
}

}  // namespace detail

inline bool bdry_label_ok(int n, int k, Mask A, int a) {
    if ((A & ~mask_all(n)) != 0 || a < 0 || a > k) return false;
    int sA = mask_size(A) + 1;
    int sB = (n - mask_size(A)) + 1;
    return detail::half_stable(sA, a) && detail::half_stable(sB, k - a);
}

// Canonical representative among the two descriptions (A,a) and
// (complement, k-a) of the same boundary divisor.
inline BFactor canon_bdry(int n, int k, Mask A, int a) {
    Mask comp = mask_all(n) & ~A;
    int b = k - a;
    if (std::tie(b, comp) < std::tie(a, A)) return BFactor::bdry(comp, b);
    return BFactor::bdry(A, a);
}

// ---------------------------------------------------------------------------
// Fixed graphs.

// A torus-fixed locus of \bar M_{0,k}(P^1,k): a tree whose vertices sit over
// the fixed points of P^1 (adjacent vertices over distinct ones), with
// positive edge degrees summing to k and markings attached to vertices.
struct FixedGraph {
    int m = 0;                              // number of vertices
    std::vector<int> side;                  // 0 = over the fixed point 0, 1 = over infinity
    std::vector<std::array<int, 3>> edges;  // {u, v, degree} with u < v
    std::vector<int> mark_vertex;           // vertex of marking i+1
};

namespace detail {

inline std::vector<int> graph_encoding(const FixedGraph& g, const std::vector<int>& perm) {
    std::vector<int> code;
    code.reserve(1 + g.m + 3 * g.edges.size() + g.mark_vertex.size());
    code.push_back(g.m);
    std::vector<int> side2(g.m);
    for (int v = 0; v < g.m; ++v) side2[perm[v]] = g.side[v];
    for (int v = 0; v < g.m; ++v) code.push_back(side2[v]);
    std::vector<std::array<int, 3>> es;
    es.reserve(g.edges.size());
    for (const auto& e : g.edges) {
        int u = perm[e[0]], v = perm[e[1]];
        es.push_back({std::min(u, v), std::max(u, v), e[2]});
    }
    std::sort(es.begin(), es.end());
    for (const auto& e : es) { code.push_back(e[0]); code.push_back(e[1]); code.push_back(e[2]); }
    for (int mv : g.mark_vertex) code.push_back(perm[mv]);
    return code;
}

inline std::vector<std::pair<int, int>> pruefer_decode(int m, const std::vector<int>& seq) {
    std::vector<int> degree(m, 1);
    for (int s : seq) ++degree[s];
    std::vector<std::pair<int, int>> edges;
    std::vector<bool> used(m, false);
    for (int s : seq) {
        int leaf = -1;
        for (int v = 0; v < m; ++v)
            if (degree[v] == 1 && !used[v]) { leaf = v; break; }
        edges.push_back({std::min(leaf, s), std::max(leaf, s)});
        used[leaf] = true;
        --degree[leaf];
        --degree[s];
    }
    int u = -1, v = -1;
    for (int w = 0; w < m; ++w)
        if (!used[w] && degree[w] == 1) (u < 0 ? u : v) = w;
    edges.push_back({std::min(u, v), std::max(u, v)});
    return edges;
}

}  // namespace detail

// Complete duplicate-free enumeration of fixed graphs up to isomorphism,
// with the order of the automorphism group fixing markings and sides.
inline const std::vector<std::pair<FixedGraph, long long>>& fixed_graphs(int n, int k) {
    SELFMAP_CHECK(k >= 1 && n >= 0, "fixed graphs need positive degree");
    static std::map<std::pair<int, int>, std::vector<std::pair<FixedGraph, long long>>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({n, k});
    if (it != cache.end()) return it->second;

    std::vector<std::pair<FixedGraph, long long>> out;
    std::set<std::vector<int>> seen;
    for (int m = 2; m <= k + 1; ++m) {
        // Labeled trees on m vertices via their defining sequences.
        std::vector<int> seq(std::max(0, m - 2), 0);
        while (true) {
            auto raw_edges = detail::pruefer_decode(m, seq);
            // Two-color the tree: fixed-point side alternates along edges.
            std::vector<std::vector<int>> adj(m);
            for (std::size_t e = 0; e < raw_edges.size(); ++e) {
                adj[raw_edges[e].first].push_back(static_cast<int>(e));
                adj[raw_edges[e].second].push_back(static_cast<int>(e));
            }
            std::vector<int> color(m, -1);
            color[0] = 0;
            std::vector<int> stack{0};
            while (!stack.empty()) {
                int v = stack.back();
                stack.pop_back();
                for (int e : adj[v]) {
                    int w = raw_edges[e].first == v ? raw_edges[e].second : raw_edges[e].first;
                    if (color[w] < 0) { color[w] = 1 - color[v]; stack.push_back(w); }
                }
            }
            // Edge degrees: positive, summing to k.
            int ne = m - 1;
            std::vector<int> deg(ne, 1);
            auto advance_deg = [&]() {
                // odometer with carry, bounded by the total degree
                int idx = 0;
                while (idx < ne) {
                    ++deg[idx];
                    int sum = std::accumulate(deg.begin(), deg.end(), 0);
                    if (sum <= k) break;
                    deg[idx] = 1;
                    ++idx;
                }
                return idx < ne;
            };
            while (true) {
                if (std::accumulate(deg.begin(), deg.end(), 0) == k) {
                    for (int flip = 0; flip < 2; ++flip) {
                        FixedGraph g;
                        g.m = m;
                        g.side.resize(m);
                        for (int v = 0; v < m; ++v) g.side[v] = color[v] ^ flip;
                        for (int e = 0; e < ne; ++e)
                            g.edges.push_back({raw_edges[e].first, raw_edges[e].second, deg[e]});
                        g.mark_vertex.assign(n, 0);
                        // Marking placements.
                        while (true) {
                            std::vector<int> identity(m);
                            std::iota(identity.begin(), identity.end(), 0);
                            std::vector<int> self_code = detail::graph_encoding(g, identity);
                            std::vector<int> best = self_code;
                            long long aut = 0;
                            std::vector<int> perm = identity;
                            do {
                                std::vector<int> code = detail::graph_encoding(g, perm);
                                if (code == self_code) ++aut;
                                if (code < best) best = code;
                            } while (std::next_permutation(perm.begin(), perm.end()));
                            if (seen.insert(best).second) out.push_back({g, aut});
                            // next marking assignment
                            int idx = 0;
                            while (idx < n) {
                                if (++g.mark_vertex[idx] < m) break;
                                g.mark_vertex[idx] = 0;
                                ++idx;
                            }
                            if (idx >= n) break;
                        }
                    }
                }
                if (!advance_deg()) break;
            }
            // next defining sequence
            int idx = 0;
            while (idx < static_cast<int>(seq.size())) {
                if (++seq[idx] < m) break;
                seq[idx] = 0;
                ++idx;
            }
            if (idx >= static_cast<int>(seq.size())) break;
        }
    }
    auto [pos, ok] = cache.emplace(std::make_pair(n, k), std::move(out));
    SELFMAP_CHECK(ok, "graph cache insertion");
    return pos->second;
}

// ---------------------------------------------------------------------------
// Localized integrals of pure ev/psi monomials.

namespace detail {

inline Rat edge_factor_coeff(int e) {
    // (-1)^e e^{2e} / ((e!)^2 2^{2e}), the t-free part of the edge factor.
    Int num = 1;
    for (int j = 0; j < 2 * e; ++j) num *= e;
    Int fact = int_factorial(e);
    Int den = fact * fact;
    for (int j = 0; j < 2 * e; ++j) den *= 2;
    Rat x(num, den);
    return e % 2 ? -x : x;
}

// Contribution of one vertex: flag weights are the t-coefficients of the
// half-edge weights at the vertex, psi_pow the cotangent exponents of the
// markings there.  Returns a single Laurent monomial (or zero).
inline EquivPoly vertex_factor(int sigma, const std::vector<Rat>& flags,
                               const std::vector<int>& psi_pow) {
    int r = static_cast<int>(flags.size());
    int s = static_cast<int>(psi_pow.size());
    int m = r + s;
    SELFMAP_CHECK(r >= 1, "every vertex of a fixed graph meets an edge");
    int apsum = std::accumulate(psi_pow.begin(), psi_pow.end(), 0);
    if (m == 1) return EquivPoly::term(1, flags[0]);
    if (m == 2) {
        if (r == 2) {
            SELFMAP_CHECK(apsum == 0, "two-edge vertex carries no markings");
            return EquivPoly::term(0, Rat(2 * sigma) / (flags[0] + flags[1]));
        }
        // one edge, one marking: psi restricts to minus the flag weight
        return EquivPoly::term(psi_pow[0], rat_pow(-flags[0], psi_pow[0]));
    }
    int rem = m - 3 - apsum;
    if (rem < 0) return EquivPoly{};
    // psi-power distributions over the r flags; all terms share one exponent.
    Rat coeff(0);
    std::vector<int> b(r, 0);
    while (true) {
        int bsum = std::accumulate(b.begin(), b.end(), 0);
        if (bsum == rem) {
            Rat term = int_factorial(m - 3);
            for (int x : psi_pow) term /= int_factorial(x);
            for (int j = 0; j < r; ++j) {
                term /= int_factorial(b[j]);
                term /= rat_pow(flags[j], b[j] + 1);
            }
            coeff += term;
        }
        int idx = 0;
        while (idx < r) {
            if (++b[idx] <= rem) break;
            b[idx] = 0;
            ++idx;
        }
        if (idx >= r) break;
    }
    Rat lead = rat_pow(Rat(2 * sigma), r - 1);
    return EquivPoly::term((r - 1) - (rem + r), lead * coeff);
}

// Verify and normalize a completed integral: homogeneous of the expected
// degree, even, nonnegative.
inline EquivPoly cleanse(EquivPoly p, int integrand_degree, int dim) {
    for (auto it = p.c.begin(); it != p.c.end();)
        it = it->second == 0 ? p.c.erase(it) : std::next(it);
    int expect = integrand_degree - dim;
    for (const auto& [e, x] : p.c) {
        SELFMAP_CHECK(e == expect, "integral is not homogeneous of the expected degree");
        SELFMAP_CHECK(e >= 0, "negative equivariant powers failed to cancel");
        SELFMAP_CHECK(e % 2 == 0, "odd equivariant powers failed to cancel");
    }
    return p;
}

inline EquivPoly integrate_monomial_graphs(int n, int k, const std::vector<int>& ev_pow,
                                           const std::vector<int>& psi_pow) {
    EquivPoly total;
    for (const auto& [g, aut] : fixed_graphs(n, k)) {
        Rat pref(1, Int(aut));
        for (const auto& e : g.edges) pref /= e[2];
        EquivPoly term = EquivPoly::term(0, pref);
        for (const auto& e : g.edges)
            term = term * EquivPoly::term(-2 * e[2], edge_factor_coeff(e[2]));
        for (int i = 0; i < n; ++i) {
            int sigma = g.side[g.mark_vertex[i]] == 0 ? 1 : -1;
            term = term * EquivPoly::term(ev_pow[i], rat_pow(Rat(sigma), ev_pow[i]));
        }
        std::vector<std::vector<Rat>> flags(g.m);
        for (const auto& e : g.edges) {
            flags[e[0]].push_back(Rat(2 * (g.side[e[0]] == 0 ? 1 : -1), e[2]));
            flags[e[1]].push_back(Rat(2 * (g.side[e[1]] == 0 ? 1 : -1), e[2]));
        }
        std::vector<std::vector<int>> psis(g.m);
        for (int i = 0; i < n; ++i) psis[g.mark_vertex[i]].push_back(psi_pow[i]);
        for (int v = 0; v < g.m && !term.is_zero(); ++v) {
            int sigma = g.side[v] == 0 ? 1 : -1;
            term = term * vertex_factor(sigma, flags[v], psis[v]);
        }
        total += term;
    }
    return total;
}

// Degree-zero target: the space is the product of the marked-curve space
// with P^1; the two fixed sections carry the full curve space.
inline EquivPoly integrate_monomial_degree0(int n, const std::vector<int>& ev_pow,
                                            const std::vector<int>& psi_pow) {
    SELFMAP_CHECK(n >= 3, "degree-zero stable maps need three markings");
    int esum = std::accumulate(ev_pow.begin(), ev_pow.end(), 0);
    int asum = std::accumulate(psi_pow.begin(), psi_pow.end(), 0);
    if (asum != n - 3) return EquivPoly{};
    Rat mult = int_factorial(n - 3);
    for (int x : psi_pow) mult /= int_factorial(x);
    EquivPoly total;
    for (int sigma : {1, -1}) {
        Rat coeff = rat_pow(Rat(sigma), esum) * mult / (Rat(2 * sigma));
        total.add_term(esum - 1, coeff);
    }
    return total;
}

}  // namespace detail

// Integral of prod ev(i)^{ev_pow[i-1]} psi(i)^{psi_pow[i-1]} over
// \bar M_{0,n}(P^1,k), as a polynomial in t.
inline EquivPoly integrate_ev_psi(int n, int k, const std::vector<int>& ev_pow,
                                  const std::vector<int>& psi_pow) {
    if (n < 0 || k < 0 || static_cast<int>(ev_pow.size()) != n ||
        static_cast<int>(psi_pow.size()) != n)
        throw invalid_input("monomial exponents must match the marking count");
    for (int x : ev_pow)
        if (x < 0) throw invalid_input("negative exponent");
    for (int x : psi_pow)
        if (x < 0) throw invalid_input("negative exponent");
    if (!stable_maps_space_exists(n, k)) throw invalid_input("no such stable-maps space");
    int degree = std::accumulate(ev_pow.begin(), ev_pow.end(), 0) +
                 std::accumulate(psi_pow.begin(), psi_pow.end(), 0);
    EquivPoly raw = k == 0 ? detail::integrate_monomial_degree0(n, ev_pow, psi_pow)
                           : detail::integrate_monomial_graphs(n, k, ev_pow, psi_pow);
    return detail::cleanse(std::move(raw), degree, stable_maps_dim(n, k));
}

// ---------------------------------------------------------------------------
// General integrands with boundary factors.

namespace detail {

inline std::string bexpr_key(int n, int k, const BExpr& expr) {
    std::string key = "n=" + std::to_string(n) + "|k=" + std::to_string(k);
    for (const BFactor& f : expr) {
        switch (f.kind) {
            case BFactor::Kind::Ev: key += "|e" + std::to_string(f.i); break;
            case BFactor::Kind::Psi: key += "|p" + std::to_string(f.i); break;
            case BFactor::Kind::Bdry:
                key += "|b" + std::to_string(f.A) + "." + std::to_string(f.a);
                break;
        }
    }
    return key;
}

// One way of placing one restricted factor on one side of a splitting.
struct SplitOption {
    int side = 1;  // 1 or 2
    BFactor f;
    Rat coeff = Rat(1);
};

}  // namespace detail

inline EquivPoly integrate_expr(int n, int k, const BExpr& expr_in);

namespace detail {

inline EquivPoly integrate_split(int n, int k, const BExpr& expr, std::size_t chosen_idx) {
    const Mask M = mask_all(n);
    const Mask A = expr[chosen_idx].A;
    const int a = expr[chosen_idx].a;
    const Mask Ac = M & ~A;
    const int b = k - a;

    // Side 1 carries the markings A plus the node p (last); side 2 carries
    // the complement plus p'.
    std::vector<int> marks1, marks2;
    for (int i = 1; i <= n; ++i) (mask_has(A, i) ? marks1 : marks2).push_back(i);
    const int n1 = static_cast<int>(marks1.size()) + 1;
    const int n2 = static_cast<int>(marks2.size()) + 1;
    auto remap = [](const std::vector<int>& marks, int i) {
        auto it = std::lower_bound(marks.begin(), marks.end(), i);
        SELFMAP_CHECK(it != marks.end() && *it == i, "marking not on this side");
        return static_cast<int>(it - marks.begin()) + 1;
    };
    auto remap_mask = [&](const std::vector<int>& marks, Mask S) {
        Mask out = 0;
        for (int i : marks)
            if (mask_has(S, i)) out |= Mask{1} << (remap(marks, i) - 1);
        return out;
    };

    const bool identical_halves = (n == 0 && A == 0 && a == b);

    std::vector<std::vector<SplitOption>> menu;
    for (std::size_t j = 0; j < expr.size(); ++j) {
        if (j == chosen_idx) continue;
        const BFactor& f = expr[j];
        std::vector<SplitOption> opts;
        switch (f.kind) {
            case BFactor::Kind::Ev:
            case BFactor::Kind::Psi: {
                bool on1 = mask_has(A, f.i);
                int idx = on1 ? remap(marks1, f.i) : remap(marks2, f.i);
                BFactor g = f.kind == BFactor::Kind::Ev ? BFactor::ev(idx) : BFactor::psi(idx);
                opts.push_back({on1 ? 1 : 2, g, Rat(1)});
                break;
            }
            case BFactor::Kind::Bdry: {
                if (f == expr[chosen_idx]) {
                    // Self-restriction: minus the node cotangent classes on
                    // either side, plus — when one half of the label is
                    // markless — the branch where a second markless bubble
                    // of the same degree sits on the other half.
                    opts.push_back({1, BFactor::psi(n1), Rat(-1)});
                    opts.push_back({2, BFactor::psi(n2), Rat(-1)});
                    if (A == 0 && a >= 1 && bdry_label_ok(n2, b, 0, a))
                        opts.push_back({2, BFactor::bdry(0, a), Rat(1)});
                    if (Ac == 0 && b >= 1 && bdry_label_ok(n1, a, 0, b))
                        opts.push_back({1, BFactor::bdry(0, b), Rat(1)});
                    break;
                }
                // A different boundary divisor: each of its two descriptions
                // may land inside either half.
                std::set<std::tuple<int, Mask, int>> added;
                const std::array<std::pair<Mask, int>, 2> reps = {
                    std::make_pair(f.A, f.a), std::make_pair(M & ~f.A, k - f.a)};
                for (const auto& [S, c] : reps) {
                    if ((S & A) == S && c <= a) {
                        Mask S1 = remap_mask(marks1, S);
                        if (bdry_label_ok(n1, a, S1, c) && added.insert({1, S1, c}).second)
                            opts.push_back({1, BFactor::bdry(S1, c), Rat(1)});
                    }
                    if ((S & Ac) == S && c <= b) {
                        Mask S2 = remap_mask(marks2, S);
                        if (bdry_label_ok(n2, b, S2, c) && added.insert({2, S2, c}).second)
                            opts.push_back({2, BFactor::bdry(S2, c), Rat(1)});
                    }
                }
                break;
            }
        }
        menu.push_back(std::move(opts));
    }
    // The class of the gluing diagonal, inserted once.
    menu.push_back({{1, BFactor::ev(n1), Rat(1)}, {2, BFactor::ev(n2), Rat(1)}});

    EquivPoly total;
    BExpr f1, f2;
    auto walk = [&](auto&& self, std::size_t level, Rat coeff) -> void {
        if (level == menu.size()) {
            EquivPoly p1 = integrate_expr(n1, a, f1);
            if (p1.is_zero()) return;
            EquivPoly p2 = integrate_expr(n2, b, f2);
            if (p2.is_zero()) return;
            p1 *= coeff;
            total += p1 * p2;
            return;
        }
        for (const SplitOption& opt : menu[level]) {
            (opt.side == 1 ? f1 : f2).push_back(opt.f);
            self(self, level + 1, coeff * opt.coeff);
            (opt.side == 1 ? f1 : f2).pop_back();
        }
    };
    walk(walk, 0, Rat(1));
    if (identical_halves) total *= Rat(1, 2);
    return total;
}

}  // namespace detail

// Integral over \bar M_{0,n}(P^1,k) of a product of ev/psi/boundary factors.
// Boundary factors are eliminated by splitting the space along them; the
// result is a polynomial in t, homogeneous of degree (#factors - dimension).
inline EquivPoly integrate_expr(int n, int k, const BExpr& expr_in) {
    if (n < 0 || k < 0) throw invalid_input("invalid stable-maps space");
    if (!stable_maps_space_exists(n, k)) throw invalid_input("no such stable-maps space");
    BExpr expr;
    expr.reserve(expr_in.size());
    for (const BFactor& f : expr_in) {
        switch (f.kind) {
            case BFactor::Kind::Ev:
            case BFactor::Kind::Psi:
                if (f.i < 1 || f.i > n) throw invalid_input("marking index out of range");
                expr.push_back(f);
                break;
            case BFactor::Kind::Bdry:
                if (!bdry_label_ok(n, k, f.A, f.a))
                    throw invalid_input("unstable boundary label");
                expr.push_back(canon_bdry(n, k, f.A, f.a));
                break;
        }
    }
    std::sort(expr.begin(), expr.end());

    static std::map<std::string, EquivPoly> memo;
    static std::mutex mu;
    std::string key = detail::bexpr_key(n, k, expr);
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
    }

    EquivPoly result;
    std::size_t bdry_idx = expr.size();
    for (std::size_t j = 0; j < expr.size(); ++j)
        if (expr[j].kind == BFactor::Kind::Bdry) { bdry_idx = j; break; }
    if (bdry_idx == expr.size()) {
        std::vector<int> ev_pow(n, 0), psi_pow(n, 0);
        for (const BFactor& f : expr)
            (f.kind == BFactor::Kind::Ev ? ev_pow : psi_pow)[f.i - 1] += 1;
        result = integrate_ev_psi(n, k, ev_pow, psi_pow);
    } else {
        result = detail::cleanse(detail::integrate_split(n, k, expr, bdry_idx),
                                 static_cast<int>(expr.size()), stable_maps_dim(n, k));
    }

    std::lock_guard<std::mutex> lock(mu);
    memo.emplace(std::move(key), result);
    return result;
}

}  // namespace selfmap
