#pragma once

// Pullback of divisor classes along the composition map (pairing a marked
// space with an unmarked one), the m-fold self-composition map, the
// marking-forgetful map, and the forgetful map to the moduli of marked
// rational curves.

#include "selfmap/divisors.hpp"
#include "selfmap/picard.hpp"
#include "selfmap/rational.hpp"
#include "selfmap/weights.hpp"

#include <utility>

namespace selfmap {

// A divisor class on a product of two spaces, of the split form
// first (x) 1 + 1 (x) second.
struct ProductClass {
    DivClass first;
    DivClass second;
    friend bool operator==(const ProductClass&, const ProductClass&) = default;
};

// Pullback along the composition map Y_{d1,n1} x Y_{d2,0} -> Y_{d1 d2, n1}.
// Generator rules: H stays on the marked factor; a boundary divisor D_{B,k}
// contributes D_{B,l} on the marked factor when k = d2 l and, for B empty
// and 0 < k <= d2, contributes d1 D_{empty,k} on the unmarked factor (both
// clauses may fire); G splits as (d2 G, D_p) when d1 = 0 and as (0, G) when
// d2 = 0 (the two agree when both vanish).  When d2 = 0 every vertical
// component of the marked factor is contracted, so D_{B,0} pulls back to the
// sum of D_{B,l} over all l.
inline ProductClass pullback_compose(int d1, int n1, int d2, const DivClass& cls) {
    if (d1 < 0 || d2 < 0 || n1 < 0) throw invalid_input("degrees must be nonnegative");
    if (cls.d != d1 * d2 || cls.n != n1)
        throw invalid_input("class does not live on the composite space");
    DivClass raw1{d1, n1, {}};
    DivClass raw2{d2, 0, {}};
    for (const auto& [g, x] : cls.c) {
        if (!gen_valid(cls.d, cls.n, g))
            throw invalid_input("vector touches an invalid generator label");
        switch (g.kind) {
            case GenId::Kind::H:
                raw1.add_term(GenId::h(), x);
                break;
            case GenId::Kind::G:
                if (d1 == 0) {
                    raw1.add_term(GenId::g(), x * d2);
                    raw2 += x * class_Dp(d2, 0);
                } else {
                    raw2.add_term(GenId::g(), x);
                }
                break;
            case GenId::Kind::Boundary:
                if (d2 > 0) {
                    if (g.k % d2 == 0) raw1.add_term(GenId::boundary(g.B, g.k / d2), x);
                } else {
                    for (int l = 0; l <= d1; ++l)
                        if (gen_valid(d1, n1, GenId::boundary(g.B, l)))
                            raw1.add_term(GenId::boundary(g.B, l), x);
                }
                if (g.B == 0 && g.k >= 1 && g.k <= d2)
                    raw2.add_term(GenId::boundary(0, g.k), x * d1);
                break;
        }
    }
    return ProductClass{reduce_to_basis(raw1), reduce_to_basis(raw2)};
}

// Pullback along the map Y_{d,n} -> Y_{d,0} forgetting the markings: a
// vertical divisor pulls back to the sum over all ways to place markings on
// the vertical component.
inline DivClass pullback_forget_markings(int d, int n, const DivClass& cls) {
    if (cls.d != d || cls.n != 0)
        throw invalid_input("class must live on the unmarked space");
    DivClass raw{d, n, {}};
    for (const auto& [g, x] : cls.c) {
        if (!gen_valid(d, 0, g))
            throw invalid_input("vector touches an invalid generator label");
        if (g.kind == GenId::Kind::G) {
            raw.add_term(GenId::g(), x);
            continue;
        }
        SELFMAP_CHECK(g.is_boundary() && g.B == 0, "unmarked space has no such generator");
        for (Mask B = 0; B <= mask_all(n); ++B)
            raw.add_term(GenId::boundary(B, g.k), x);
    }
    return reduce_to_basis(raw);
}

namespace detail {

inline int checked_power(int d, int e) {
    Int p = 1;
    for (int j = 0; j < e; ++j) {
        p *= d;
        if (p > 1000000) throw invalid_input("iterated degree too large");
    }
    return static_cast<int>(p);
}

}  // namespace detail

// Pullback along the m-fold iteration map Y_{d,n} -> Y_{d^m,n}.  For d = 0
// iterating a constant map changes nothing; otherwise the generator rules
// are applied recursively via the factorization through the composition map.
inline DivClass pullback_selfcompose(int d, int n, int m, const DivClass& cls) {
    if (m < 1) throw invalid_input("iteration count must be positive");
    if (d < 0 || n < 0) throw invalid_input("degrees must be nonnegative");
    if (cls.d != detail::checked_power(d, m) || cls.n != n)
        throw invalid_input("class does not live on the iterated space");
    if (m == 1 || d == 0) return reduce_to_basis(cls);
    const int dm1 = detail::checked_power(d, m - 1);
    DivClass raw{d, n, {}};
    DivClass out{d, n, {}};
    for (const auto& [g, x] : cls.c) {
        if (!gen_valid(cls.d, cls.n, g))
            throw invalid_input("vector touches an invalid generator label");
        switch (g.kind) {
            case GenId::Kind::H:
                raw.add_term(GenId::h(), x);
                break;
            case GenId::Kind::G:
                SELFMAP_CHECK(false, "G cannot appear in positive degree");
                break;
            case GenId::Kind::Boundary:
                if (g.B != 0) {
                    if (g.k % dm1 == 0) raw.add_term(GenId::boundary(g.B, g.k / dm1), x);
                    break;
                }
                if (g.k >= 1 && g.k <= d)
                    for (Mask B = 0; B <= mask_all(n); ++B)
                        raw.add_term(GenId::boundary(B, g.k), x * dm1);
                if (g.k % d == 0 && g.k / d >= 1) {
                    DivClass prev{dm1, n, {}};
                    prev.add_term(GenId::boundary(0, g.k / d), x);
                    out += pullback_selfcompose(d, n, m - 1, prev);
                }
                break;
        }
    }
    return out + reduce_to_basis(raw);
}

// Pullback to Y_{d,n} of the boundary divisor of \bar M_{0,n} given by the
// marking partition (A | complement): the multiplicity-free sum of vertical
// divisors on either side, returned as a raw generator vector.
inline DivClass pullback_forgetful_M0n(int d, int n, Mask A) {
    Mask Ac = mask_all(n) & ~A;
    if ((A & ~mask_all(n)) != 0 || mask_size(A) < 2 || mask_size(Ac) < 2)
        throw invalid_input("invalid partition");
    return detail::forgetful_boundary_pullback(d, n, A);
}

}  // namespace selfmap
