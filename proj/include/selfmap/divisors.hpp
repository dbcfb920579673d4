#pragma once

// Named divisor classes on Y_{d,n}: evaluation hyperplanes, the fixed-point
// and psi classes at a marking, and the periodic-point and resultant
// divisors.  Every constructor returns a basis-reduced class.

#include "selfmap/picard.hpp"
#include "selfmap/rational.hpp"
#include "selfmap/weights.hpp"

namespace selfmap {

namespace detail {

inline void require_marking(int n, int i) {
    if (i < 1 || i > n) throw invalid_input("marking index out of range");
}

}  // namespace detail

// Correction term between the two evaluation hyperplanes at a marking: the
// boundary expression with coefficient k^2/(2d) away from the marking side
// and k^2/(2d) - k on it.  For d = 0 this class is G.
inline DivClass class_Hprime(int d, int n, int i) {
    detail::require_marking(n, i);
    if (d == 0) return gen_class(0, n, GenId::g());
    DivClass raw{d, n, {}};
    for (int k = 1; k <= d; ++k) {
        Rat base = Rat(k * k, 2 * d);
        for (Mask B = 0; B <= mask_all(n); ++B)
            raw.add_term(GenId::boundary(B, k), mask_has(B, i) ? base - k : base);
    }
    return reduce_to_basis(raw);
}

// The divisor of maps taking a fixed base point to a fixed target point; no
// marking involved.  For d = 0 this class is G.
inline DivClass class_Dp(int d, int n) {
    if (d == 0) return gen_class(0, n, GenId::g());
    DivClass raw{d, n, {}};
    for (int k = 1; k <= d; ++k) {
        Rat base = Rat(k * k, 2 * d);
        for (Mask B = 0; B <= mask_all(n); ++B)
            raw.add_term(GenId::boundary(B, k), base);
    }
    return reduce_to_basis(raw);
}

// Evaluation hyperplane at marking i for either coordinate: coord 1 is the
// source position, coord 2 the image position (their difference from the
// degree-scaled source class is class_Hprime).
inline DivClass class_H(int d, int n, int i, int coord) {
    detail::require_marking(n, i);
    if (coord == 1) return detail::class_H1_profile(d, n, i);
    if (coord == 2) return Rat(d) * class_H(d, n, i, 1) + class_Hprime(d, n, i);
    throw invalid_input("coordinate must be 1 or 2");
}

// Locus where marking i sits at a fixed point of the map: the sum of the two
// evaluation hyperplanes at i.
inline DivClass class_fix(int d, int n, int i) {
    detail::require_marking(n, i);
    return class_H(d, n, i, 1) + class_H(d, n, i, 2);
}

// Cotangent (psi) class at marking i.  For n >= 3 it is the sum of boundary
// divisors separating i from two auxiliary markings (independent of the
// choice); for n <= 2 the auxiliary markings are traded for the evaluation
// hyperplane.
inline DivClass class_psi(int d, int n, int i, int aux_a = 0, int aux_b = 0) {
    detail::require_marking(n, i);
    if (n >= 3) {
        int a = aux_a, b = aux_b;
        if (a == 0 || b == 0) {  // default: the two smallest other markings
            a = (i == 1) ? 2 : 1;
            b = (i <= 2) ? 3 : 2;
        }
        detail::require_marking(n, a);
        detail::require_marking(n, b);
        if (a == b || a == i || b == i)
            throw invalid_input("auxiliary markings must be distinct from i");
        DivClass raw{d, n, {}};
        for (const GenId& g : generators(d, n)) {
            if (!g.is_boundary()) continue;
            bool in_i = mask_has(g.B, i), in_a = mask_has(g.B, a), in_b = mask_has(g.B, b);
            if ((in_i && !in_a && !in_b) || (!in_i && in_a && in_b))
                raw.add_term(g, Rat(1));
        }
        return reduce_to_basis(raw);
    }
    DivClass raw{d, n, {}};
    for (const GenId& g : generators(d, n))
        if (g.is_boundary() && mask_has(g.B, i)) raw.add_term(g, Rat(1));
    return reduce_to_basis(raw) - Rat(2) * class_H(d, n, i, 1);
}

// Divisor of maps with a marked periodic orbit of exact period dividing m,
// expressed through the boundary (defined for d >= 1).
inline DivClass class_per(int d, int n, int m) {
    if (d < 1) throw invalid_input("periodic-point divisor needs positive degree");
    if (m < 1) throw invalid_input("period must be positive");
    DivClass raw{d, n, {}};
    for (int k = 1; k <= d; ++k)
        for (Mask B = 0; B <= mask_all(n); ++B)
            raw.add_term(GenId::boundary(B, k), Rat(k));
    return (Rat(m) * rat_pow(Rat(d), m - 1)) * reduce_to_basis(raw);
}

// Divisor of maps with vanishing resultant, expressed through the boundary.
inline DivClass class_resultant(int d, int n) {
    DivClass raw{d, n, {}};
    for (int k = 1; k <= d; ++k)
        for (Mask B = 0; B <= mask_all(n); ++B)
            raw.add_term(GenId::boundary(B, k), Rat(k * k));
    return reduce_to_basis(raw);
}

}  // namespace selfmap
