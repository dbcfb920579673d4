#pragma once

// The rational Picard group of the stable-maps compactification Y_{d,n}:
// generator bookkeeping, the four-point (Keel) relations pulled back from
// \bar M_{0,n}, a fixed canonical basis, the test-curve pairing profile with
// its inverse identification formulas, and reduction to the Picard group of
// the weighted GIT quotient M(d|d_1,...,d_n).

#include "selfmap/rational.hpp"
#include "selfmap/weights.hpp"

#include <algorithm>
#include <compare>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace selfmap {

// ---------------------------------------------------------------------------
// Generators.

// A Picard generator of Y_{d,n}: a boundary divisor D_{B,k} (vertical
// component of degree k carrying the markings B), the evaluation hyperplane
// class H (only for n in {1,2}), or the constant-map hyperplane class G
// (only for d = 0).
struct GenId {
    enum class Kind : std::uint8_t { Boundary = 0, H = 1, G = 2 };

    Kind kind = Kind::Boundary;
    int k = 0;     // boundary degree; 0 for H/G
    Mask B = 0;    // boundary marking subset; 0 for H/G

    static GenId boundary(Mask B, int k) { return GenId{Kind::Boundary, k, B}; }
    static GenId h() { return GenId{Kind::H, 0, 0}; }
    static GenId g() { return GenId{Kind::G, 0, 0}; }

    bool is_boundary() const { return kind == Kind::Boundary; }

    friend auto operator<=>(const GenId& a, const GenId& b) {
        // Boundary labels sorted by (k, B); H after all boundary; G last.
        return std::tie(a.kind, a.k, a.B) <=> std::tie(b.kind, b.k, b.B);
    }
    friend bool operator==(const GenId&, const GenId&) = default;
};

inline bool gen_valid(int d, int n, const GenId& g) {
    switch (g.kind) {
        case GenId::Kind::H: return n == 1 || n == 2;
        case GenId::Kind::G: return d == 0;
        case GenId::Kind::Boundary:
            if (g.k < 0 || g.k > d) return false;
            if ((g.B & ~mask_all(n)) != 0) return false;
            return g.k >= 1 || mask_size(g.B) >= 2;
    }
    return false;
}

// All generators of Pic(Y_{d,n}) in the canonical order.
inline std::vector<GenId> generators(int d, int n) {
    if (d < 0 || n < 0) throw invalid_input("d, n must be nonnegative");
    std::vector<GenId> out;
    for (int k = 0; k <= d; ++k)
        for (Mask B = 0; B <= mask_all(n); ++B) {
            if (k == 0 && mask_size(B) < 2) continue;
            out.push_back(GenId::boundary(B, k));
        }
    if (n == 1 || n == 2) out.push_back(GenId::h());
    if (d == 0) out.push_back(GenId::g());
    return out;
}

// The generators dropped to form the canonical basis: D_{B,0} with
// B a 2-element subset of {2,...,n} other than {n-1, n}.
inline bool is_removed_generator(int n, const GenId& g) {
    if (!g.is_boundary() || g.k != 0) return false;
    if (mask_size(g.B) != 2) return false;
    if (mask_has(g.B, 1)) return false;
    Mask lastPair = n >= 2 ? (Mask{3} << (n - 2)) : 0;  // {n-1, n}
    return g.B != lastPair;
}

inline std::vector<GenId> basis(int d, int n) {
    std::vector<GenId> out;
    for (const GenId& g : generators(d, n))
        if (!is_removed_generator(n, g)) out.push_back(g);
    return out;
}

// ---------------------------------------------------------------------------
// Divisor classes.

// A rational divisor class on Y_{d,n}, stored as a sparse coefficient vector
// over generators.  Classes produced by reduce_to_basis are supported on the
// canonical basis; raw vectors (pullbacks, relation sums) may touch every
// generator.
struct DivClass {
    int d = 0;
    int n = 0;
    std::map<GenId, Rat> c;

    bool is_zero() const { return c.empty(); }

    Rat coeff(const GenId& g) const {
        auto it = c.find(g);
        return it == c.end() ? Rat(0) : it->second;
    }

    void add_term(const GenId& g, const Rat& x) {
        if (x == 0) return;
        auto [it, fresh] = c.emplace(g, x);
        if (!fresh) {
            it->second += x;
            if (it->second == 0) c.erase(it);
        }
    }

    DivClass& operator+=(const DivClass& o) {
        SELFMAP_CHECK(d == o.d && n == o.n, "divisor class space mismatch");
        for (const auto& [g, x] : o.c) add_term(g, x);
        return *this;
    }
    DivClass& operator-=(const DivClass& o) {
        SELFMAP_CHECK(d == o.d && n == o.n, "divisor class space mismatch");
        for (const auto& [g, x] : o.c) add_term(g, -x);
        return *this;
    }
    DivClass& operator*=(const Rat& s) {
        if (s == 0) { c.clear(); return *this; }
        for (auto& [g, x] : c) x *= s;
        return *this;
    }
    friend DivClass operator+(DivClass a, const DivClass& b) { return a += b; }
    friend DivClass operator-(DivClass a, const DivClass& b) { return a -= b; }
    friend DivClass operator*(const Rat& s, DivClass a) { return a *= s; }
    friend bool operator==(const DivClass& a, const DivClass& b) = default;
};

inline DivClass zero_class(int d, int n) { return DivClass{d, n, {}}; }

inline DivClass gen_class(int d, int n, const GenId& g, const Rat& x = Rat(1)) {
    if (!gen_valid(d, n, g)) throw invalid_input("generator label invalid on this space");
    DivClass out{d, n, {}};
    out.add_term(g, x);
    return out;
}

// ---------------------------------------------------------------------------
// Keel relations.

namespace detail {

// Pullback to Y_{d,n} of the \bar M_{0,n} boundary divisor D(A; complement):
// the multiplicity-free sum over all degrees on both sides.
inline DivClass forgetful_boundary_pullback(int d, int n, Mask A) {
    Mask Ac = mask_all(n) & ~A;
    DivClass out{d, n, {}};
    for (int m = 0; m <= d; ++m) {
        out.add_term(GenId::boundary(A, m), Rat(1));
        out.add_term(GenId::boundary(Ac, m), Rat(1));
    }
    return out;
}

// Sum over all marking partitions separating pair1 from pair2 of the
// pulled-back boundary divisors.
inline DivClass cross_ratio_side(int d, int n, Mask pair1, Mask pair2) {
    DivClass out{d, n, {}};
    Mask rest = mask_all(n) & ~(pair1 | pair2);
    // Iterate subsets S of the remaining markings; A = pair1 | S.
    Mask S = 0;
    while (true) {
        out += forgetful_boundary_pullback(d, n, pair1 | S);
        if (S == rest) break;
        S = (S - rest) & rest;  // next subset of rest
    }
    return out;
}

}  // namespace detail

// The relations among the generators: for every quadruple {i,j,k,l} the two
// differences of cross-ratio sums.  Returned as raw vectors over the full
// generator set; their span has dimension C(n-1,2) - 1.
inline std::vector<DivClass> keel_relations(int d, int n) {
    std::vector<DivClass> out;
    if (n < 4) return out;
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
            for (int k = j + 1; k <= n; ++k)
                for (int l = k + 1; l <= n; ++l) {
                    Mask mi = Mask{1} << (i - 1), mj = Mask{1} << (j - 1);
                    Mask mk = Mask{1} << (k - 1), ml = Mask{1} << (l - 1);
                    DivClass base = detail::cross_ratio_side(d, n, mi | mj, mk | ml);
                    out.push_back(base - detail::cross_ratio_side(d, n, mi | mk, mj | ml));
                    out.push_back(base - detail::cross_ratio_side(d, n, mi | ml, mj | mk));
                }
    return out;
}

// ---------------------------------------------------------------------------
// Reduction to the canonical basis.

namespace detail {

struct Reducer {
    // Expansion of every removed generator in the canonical basis.
    std::map<GenId, DivClass> expansion;
};

inline const Reducer& reducer_for(int d, int n) {
    static std::map<std::pair<int, int>, Reducer> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({d, n});
    if (it != cache.end()) return it->second;

    Reducer red;
    std::vector<GenId> removed;
    for (const GenId& g : generators(d, n))
        if (is_removed_generator(n, g)) removed.push_back(g);

    // Gaussian elimination of the relation vectors, pivoting only on removed
    // generators; the relation span matches the removed span exactly, so
    // every row reduces to a removed-generator pivot or to zero, and every
    // removed generator acquires a pivot.
    std::vector<DivClass> rows;  // normalized pivot rows
    std::vector<GenId> pivots;
    for (DivClass row : keel_relations(d, n)) {
        for (std::size_t r = 0; r < rows.size(); ++r) {
            Rat x = row.coeff(pivots[r]);
            if (x != 0) row -= x * rows[r];
        }
        std::optional<GenId> pivot;
        for (const auto& [g, x] : row.c)
            if (is_removed_generator(n, g)) { pivot = g; break; }
        if (!pivot) {
            SELFMAP_CHECK(row.is_zero(),
                          "relation independent of the removed generators");
            continue;
        }
        row *= Rat(1) / row.coeff(*pivot);
        rows.push_back(row);
        pivots.push_back(*pivot);
    }
    SELFMAP_CHECK(pivots.size() == removed.size(),
                  "every removed generator must be eliminable");

    // Back-substitution: clear removed generators from each pivot row.
    for (std::size_t r = rows.size(); r-- > 0;) {
        for (std::size_t s = 0; s < rows.size(); ++s) {
            if (s == r) continue;
            Rat x = rows[r].coeff(pivots[s]);
            if (x != 0) rows[r] -= x * rows[s];
        }
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        DivClass exp = rows[r];
        exp.add_term(pivots[r], Rat(-1));  // row = pivot + rest  =>  pivot = -rest
        exp *= Rat(-1);
        for (const auto& [g, x] : exp.c)
            SELFMAP_CHECK(!is_removed_generator(n, g),
                          "expansion must be basis-supported");
        red.expansion.emplace(pivots[r], std::move(exp));
    }

    auto [pos, ok] = cache.emplace(std::make_pair(d, n), std::move(red));
    SELFMAP_CHECK(ok, "reducer cache insertion");
    return pos->second;
}

}  // namespace detail

// Unique basis representative of a raw generator vector.  Idempotent on
// basis-supported vectors.
inline DivClass reduce_to_basis(const DivClass& raw) {
    const detail::Reducer& red = detail::reducer_for(raw.d, raw.n);
    DivClass out{raw.d, raw.n, {}};
    for (const auto& [g, x] : raw.c) {
        if (!gen_valid(raw.d, raw.n, g))
            throw invalid_input("vector touches an invalid generator label");
        auto it = red.expansion.find(g);
        if (it == red.expansion.end()) out.add_term(g, x);
        else out += x * it->second;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Test-curve profiles and identification.

// Intersection numbers of a class with every test curve C_{B,k}
// (B any marking subset, 0 <= k <= d) and, for d = 0, with C_G.
struct Profile {
    int d = 0;
    int n = 0;
    std::map<std::pair<int, Mask>, Rat> N;  // keyed by (k, B)
    Rat NG = 0;                             // meaningful only for d = 0

    Rat at(Mask B, int k) const {
        auto it = N.find({k, B});
        return it == N.end() ? Rat(0) : it->second;
    }
};

namespace detail {

// Pairing of a single generator with the test curve C_{B,k}.  The three
// contributions are additive: the self-pairing 2 at the matching label, 1
// for a degree-0 pair divisor straddling B, and 2k(d-k) for D_{empty,1}.
inline Rat curve_pairing(int d, const GenId& g, Mask B, int k) {
    switch (g.kind) {
        case GenId::Kind::H: return Rat(mask_has(B, 1) ? 1 : 0);
        case GenId::Kind::G: return Rat(0);
        case GenId::Kind::Boundary: {
            Rat v(0);
            if (g.B == B && g.k == k) v += 2;
            if (g.k == 0 && mask_size(g.B) == 2 && mask_size(g.B & B) == 1) v += 1;
            if (g.B == 0 && g.k == 1) v += Rat(2 * k * (d - k));
            return v;
        }
    }
    return Rat(0);
}

// Pairing with C_G (d = 0 only): C_G meets G once and nothing else.
inline Rat curve_pairing_G(const GenId& g) {
    return Rat(g.kind == GenId::Kind::G ? 1 : 0);
}

}  // namespace detail

inline Profile profile_of(const DivClass& cls) {
    Profile p;
    p.d = cls.d;
    p.n = cls.n;
    for (int k = 0; k <= cls.d; ++k)
        for (Mask B = 0; B <= mask_all(cls.n); ++B) {
            Rat v(0);
            for (const auto& [g, x] : cls.c) v += x * detail::curve_pairing(cls.d, g, B, k);
            p.N[{k, B}] = v;
        }
    if (cls.d == 0) {
        Rat v(0);
        for (const auto& [g, x] : cls.c) v += x * detail::curve_pairing_G(g);
        p.NG = v;
    }
    return p;
}

// Inverts profile_of on profiles of actual classes: coefficients are read
// off in the prescribed order (G, H, the degree-0 pair family, D_{empty,1},
// then the general labels).
inline DivClass identify(const Profile& p) {
    const int d = p.d, n = p.n;
    DivClass out{d, n, {}};
    auto single = [&](int j) { return p.at(Mask{1} << (j - 1), 0); };

    if (d == 0) out.add_term(GenId::g(), p.NG);

    Rat cH(0);
    if (n == 1) cH = single(1);
    else if (n == 2) cH = single(1) - single(2);
    if (n == 1 || n == 2) out.add_term(GenId::h(), cH);

    // Degree-0 pair coefficients (includes zeros for the removed labels).
    std::map<Mask, Rat> pair0;
    if (n == 2) {
        pair0[mask_all(2)] = single(2);
    } else if (n >= 3) {
        Rat s1(0);
        for (int j = 2; j <= n - 2; ++j) s1 += single(j);
        for (int a = 1; a <= n; ++a)
            for (int b = a + 1; b <= n; ++b)
                pair0[(Mask{1} << (a - 1)) | (Mask{1} << (b - 1))] = Rat(0);
        for (int j = 2; j <= n - 2; ++j)
            pair0[Mask{1} | (Mask{1} << (j - 1))] = single(j);
        Mask m1 = Mask{1}, mn1 = Mask{1} << (n - 2), mn = Mask{1} << (n - 1);
        pair0[m1 | mn1] = (single(1) - s1 + single(n - 1) - single(n)) / 2;
        pair0[m1 | mn]  = (single(1) - s1 - single(n - 1) + single(n)) / 2;
        pair0[mn1 | mn] = (-single(1) + s1 + single(n - 1) + single(n)) / 2;
    }
    for (const auto& [B, x] : pair0)
        if (!is_removed_generator(n, GenId::boundary(B, 0)))
            out.add_term(GenId::boundary(B, 0), x);

    // General labels.
    for (const GenId& g : generators(d, n)) {
        if (!g.is_boundary()) continue;
        if (g.k == 0 && mask_size(g.B) == 2) continue;  // handled above
        Rat kappa = d > 0 ? Rat(g.k * (d - g.k), d) : Rat(0);
        Rat straddle(0);
        for (int a = 1; a <= n; ++a) {
            if (mask_has(g.B, a)) continue;
            for (int b = 1; b <= n; ++b) {
                if (!mask_has(g.B, b)) continue;
                straddle += pair0.at((Mask{1} << (a - 1)) | (Mask{1} << (b - 1)));
            }
        }
        Rat chi1 = Rat(mask_has(g.B, 1) ? 1 : 0);
        Rat c = (p.at(g.B, g.k) - kappa * p.at(Mask{0}, 1) - chi1 * cH - straddle) / 2;
        out.add_term(g, c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Internal geometric classes needed for the quotient construction.
// (The public constructors live with the other named divisor classes; these
// profile-based forms avoid a dependency cycle and double as cross-checks.)

namespace detail {

// Evaluation hyperplane class pulled back along the first coordinate at
// marking i: pairs chi_B(i) with every test curve.
inline DivClass class_H1_profile(int d, int n, int i) {
    Profile p;
    p.d = d;
    p.n = n;
    for (int k = 0; k <= d; ++k)
        for (Mask B = 0; B <= mask_all(n); ++B)
            p.N[{k, B}] = Rat(mask_has(B, i) ? 1 : 0);
    p.NG = 0;
    return identify(p);
}

// Fixed-point divisor of marking i: pairs (1+d)chi_B(i) + k(1-2chi_B(i))
// with C_{B,k}, and 1 with C_G.
inline DivClass class_fix_profile(int d, int n, int i) {
    Profile p;
    p.d = d;
    p.n = n;
    for (int k = 0; k <= d; ++k)
        for (Mask B = 0; B <= mask_all(n); ++B) {
            int chi = mask_has(B, i) ? 1 : 0;
            p.N[{k, B}] = Rat((1 + d) * chi + k * (1 - 2 * chi));
        }
    p.NG = 1;
    return identify(p);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Quotient reduction.

// Linear data of the passage Pic(Y_{d,n}) -> Pic(M(d|d_1,...,d_n)): every
// basis generator is sent to its representative modulo the span of unstable
// divisor classes.  Unstable boundary generators die; each unstable
// fixed-point divisor imposes one relation, solved for H when present, then
// G, then the last surviving boundary generator in basis order.  A relation
// whose support was already eliminated must reduce to 0 = 0.
struct QuotientContext {
    WeightTuple wt;
    std::map<GenId, DivClass> subst;  // image of every basis generator
    std::vector<GenId> survivors;     // basis of the quotient

    DivClass apply(const DivClass& cls) const {
        SELFMAP_CHECK(cls.d == wt.d && cls.n == wt.n(), "class/weights space mismatch");
        DivClass out{cls.d, cls.n, {}};
        for (const auto& [g, x] : cls.c) {
            auto it = subst.find(g);
            SELFMAP_CHECK(it != subst.end(), "class is not basis-supported");
            out += x * it->second;
        }
        return out;
    }
};

inline QuotientContext build_quotient(const WeightTuple& wt, int expect_n = -1) {
    if (!is_admissible(wt)) throw invalid_input("weight tuple is not admissible");
    if (expect_n >= 0 && wt.n() != expect_n)
        throw invalid_input("weight tuple does not match the space");
    const int d = wt.d, n = wt.n();

    QuotientContext q;
    q.wt = wt;
    for (const GenId& g : basis(d, n)) {
        bool dead = g.is_boundary() && !boundary_stable(wt, g.B, g.k);
        q.subst.emplace(g, dead ? zero_class(d, n) : gen_class(d, n, g));
        if (!dead) q.survivors.push_back(g);
    }

    auto eliminate = [&](const GenId& g, const DivClass& expansion) {
        for (auto& [key, val] : q.subst) {
            Rat x = val.coeff(g);
            if (x == 0) continue;
            val.add_term(g, -x);
            val += x * expansion;
        }
        q.subst[g] = expansion;
        std::erase(q.survivors, g);
    };

    for (int i = 1; i <= n; ++i) {
        if (fix_stable(wt, i)) continue;
        DivClass r = q.apply(reduce_to_basis(detail::class_fix_profile(d, n, i)));
        if (r.is_zero()) continue;  // consistency holds, nothing new to impose
        std::optional<GenId> solve;
        if (r.coeff(GenId::h()) != 0) solve = GenId::h();
        else if (r.coeff(GenId::g()) != 0) solve = GenId::g();
        else solve = r.c.rbegin()->first;  // last surviving generator in order
        SELFMAP_CHECK(solve.has_value(), "fixed-point relation with empty support");
        Rat piv = r.coeff(*solve);
        DivClass expansion = r;
        expansion.add_term(*solve, -piv);
        expansion *= Rat(-1) / piv;
        eliminate(*solve, expansion);
    }
    return q;
}

inline const QuotientContext& quotient_for(const WeightTuple& wt) {
    static std::map<std::string, QuotientContext> cache;
    static std::mutex mu;
    std::string key = weights_canonical(wt);
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, build_quotient(wt)).first;
    return it->second;
}

// Representative of a class modulo the unstable span, in quotient
// coordinates.  Linear and idempotent for fixed weights.
inline DivClass to_quotient(const DivClass& cls, const WeightTuple& wt) {
    return quotient_for(wt).apply(cls);
}

}  // namespace selfmap
