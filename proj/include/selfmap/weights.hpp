#pragma once

// Weight tuples (d | d_1, ..., d_n) for the moduli spaces M(d|d_1,...,d_n):
// admissibility, GIT stability predicates for boundary and fixed-point
// divisors, and the weight bookkeeping under boundary restriction.
//
// Stability of a configuration is governed by the threshold d_T / 2 where
// d_T = d + 1 + sum(d_i): a point may carry total weight (vanishing order +
// fixed-point contribution + marking weights) at most d_T / 2.  For
// admissible tuples all the comparisons below are automatically strict.

#include "selfmap/rational.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace selfmap {

// Subsets of the markings {1, ..., n} as bitmasks; bit (i-1) encodes i.
using Mask = std::uint64_t;

inline bool mask_has(Mask m, int i) { return (m >> (i - 1)) & 1u; }
inline Mask mask_all(int n) { return n == 0 ? 0 : ((Mask{1} << n) - 1); }
inline int mask_size(Mask m) {
    int c = 0;
    while (m) { c += int(m & 1u); m >>= 1; }
    return c;
}

struct WeightTuple {
    int d = 0;                 // degree of the self-map
    std::vector<Rat> w;        // marking weights d_1, ..., d_n

    int n() const { return int(w.size()); }

    bool operator==(const WeightTuple& o) const = default;
};

inline void validate_weights(const WeightTuple& wt) {
    if (wt.d < 0) throw invalid_input("degree must be nonnegative");
    if (wt.n() > 62) throw invalid_input("at most 62 markings are supported");
    for (const Rat& x : wt.w)
        if (x < 0) throw invalid_input("marking weights must be nonnegative");
}

// d_T = d + 1 + sum of the marking weights.
inline Rat total_weight(const WeightTuple& wt) {
    Rat s(wt.d + 1);
    for (const Rat& x : wt.w) s += x;
    return s;
}

// Least common multiple of the weight denominators: the smallest k > 0 with
// all k * d_i integral.
inline Int weight_denominator_lcm(const WeightTuple& wt) {
    Int l(1);
    for (const Rat& x : wt.w) {
        Int q = rat_den(x);
        l = l / boost::multiprecision::gcd(l, q) * q;
    }
    return l;
}

// A tuple is admissible when some integer multiple k makes every k*d_i
// integral and k(d+1) + sum(k*d_i) odd.  Such k must be a multiple of the
// denominator lcm L, and m*(L*d_T) is odd for some m exactly when L*d_T is
// odd; that closed test is used here (the search form is kept as a test
// oracle).
inline bool is_admissible(const WeightTuple& wt) {
    validate_weights(wt);
    Int l = weight_denominator_lcm(wt);
    Rat scaled = Rat(l) * total_weight(wt);
    SELFMAP_CHECK(rat_den(scaled) == 1, "L*d_T must be integral");
    return boost::multiprecision::abs(rat_num(scaled)) % 2 == 1;
}

// Valid boundary label: 0 <= k <= d and (k >= 1 or |B| >= 2).
inline bool boundary_label_valid(const WeightTuple& wt, Mask B, int k) {
    if (k < 0 || k > wt.d) return false;
    if ((B & ~mask_all(wt.n())) != 0) return false;
    return k >= 1 || mask_size(B) >= 2;
}

inline Rat mask_weight(const WeightTuple& wt, Mask B) {
    Rat s(0);
    for (int i = 1; i <= wt.n(); ++i)
        if (mask_has(B, i)) s += wt.w[std::size_t(i) - 1];
    return s;
}

// The divisor D_{B,k} survives the quotient iff k + sum_{i in B} d_i stays
// strictly below d_T / 2.  Equality never occurs for admissible tuples.
inline bool boundary_stable(const WeightTuple& wt, Mask B, int k) {
    if (!boundary_label_valid(wt, B, k))
        throw invalid_input("invalid boundary label (B, k)");
    Rat lhs = Rat(k) + mask_weight(wt, B);
    Rat half = total_weight(wt) / 2;
    SELFMAP_CHECK(!(is_admissible(wt) && lhs == half),
                  "boundary stability must be strict for admissible tuples");
    return lhs < half;
}

// The fixed-point divisor of marking i survives iff d_i < d_T / 2 - 1.
inline bool fix_stable(const WeightTuple& wt, int i) {
    if (i < 1 || i > wt.n()) throw invalid_input("marking index out of range");
    Rat lhs = wt.w[std::size_t(i) - 1];
    Rat bound = total_weight(wt) / 2 - 1;
    SELFMAP_CHECK(!(is_admissible(wt) && lhs == bound),
                  "fixed-point stability must be strict for admissible tuples");
    return lhs < bound;
}

// Weight tuple of the main component after restricting to D_{B,k}: degree
// d - k, the weights of A = complement(B) in their original order, and the
// gluing marking of weight k + sum_{b in B} d_b appended last.  d_T is
// preserved.
inline WeightTuple restrict_weights(const WeightTuple& wt, Mask B, int k) {
    if (!boundary_stable(wt, B, k))
        throw invalid_input("cannot restrict weights along an unstable boundary divisor");
    WeightTuple out;
    out.d = wt.d - k;
    for (int i = 1; i <= wt.n(); ++i)
        if (!mask_has(B, i)) out.w.push_back(wt.w[std::size_t(i) - 1]);
    out.w.push_back(Rat(k) + mask_weight(wt, B));
    SELFMAP_CHECK(total_weight(out) == total_weight(wt),
                  "restriction must preserve d_T");
    return out;
}

// Nonemptiness certificate for admissible tuples: a semistable configuration
// exists iff d_T > 2 (an unmarked fixed point contributes 1) and every
// marking weight is below d_T / 2 (a marking contributes its weight wherever
// it sits).  Generic placement realizes these bounds, so the test is exact.
inline bool space_nonempty(const WeightTuple& wt) {
    Rat dt = total_weight(wt);
    if (dt <= 2) return false;
    for (const Rat& x : wt.w)
        if (x >= dt / 2) return false;
    return true;
}

// Canonical text form "d|w1,w2,..." used in memo and cache keys.
inline std::string weights_canonical(const WeightTuple& wt) {
    std::string s = std::to_string(wt.d);
    s += '|';
    for (int i = 0; i < wt.n(); ++i) {
        if (i) s += ',';
        s += rat_canonical(wt.w[std::size_t(i)]);
    }
    return s;
}

}  // namespace selfmap
