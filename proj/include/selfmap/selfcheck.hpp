#pragma once

// Built-in consistency suite for the CLI: exercises the Picard-group
// calculus, the localization oracles, the recursion, and the pullback
// identities on small spaces.  The quick tier stays well under a minute;
// the full tier adds degree-3 coverage.

#include "selfmap/divisors.hpp"
#include "selfmap/engine.hpp"
#include "selfmap/equivariant.hpp"
#include "selfmap/picard.hpp"
#include "selfmap/pullbacks.hpp"
#include "selfmap/serialize.hpp"
#include "selfmap/weights.hpp"

#include <functional>
#include <random>
#include <string>
#include <vector>

namespace selfmap {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace detail {

inline void run_check(std::vector<CheckResult>& out, const std::string& name,
                      const std::function<void()>& body) {
    CheckResult r;
    r.name = name;
    try {
        body();
        r.pass = true;
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail = e.what();
    }
    out.push_back(std::move(r));
}

inline void expect(bool cond, const std::string& what) {
    if (!cond) throw std::runtime_error("failed: " + what);
}

inline long long picard_rank_formula(int d, int n) {
    // 2^n (d+1) - C(n,2) - 1, plus 1 for each of: n == 1, n == 2, d == 0.
    long long rank = (1LL << n) * (d + 1) - 1LL * n * (n - 1) / 2 - 1;
    if (n == 1 || n == 2) rank += 1;
    if (d == 0) rank += 1;
    return rank;
}

inline void check_rank(int dmax, int nmin, int nmax) {
    for (int d = 0; d <= dmax; ++d)
        for (int n = nmin; n <= nmax; ++n) {
            if (d == 0 && n < 2) continue;
            long long got = static_cast<long long>(basis(d, n).size());
            long long want = n >= 3 ? picard_rank_formula(d, n)
                                    : static_cast<long long>(generators(d, n).size());
            expect(got == want, "rank of the divisor class group on (d=" + std::to_string(d) +
                                    ", n=" + std::to_string(n) + ")");
        }
}

inline void check_round_trip(int d, int n) {
    for (const GenId& g : basis(d, n)) {
        DivClass cls = gen_class(d, n, g);
        DivClass back = identify(profile_of(cls));
        expect(back == cls, "pairing-profile round trip for " + gen_key(g) + " on (d=" +
                                std::to_string(d) + ", n=" + std::to_string(n) + ")");
    }
}

inline void check_relations_vanish(int d, int n) {
    for (const DivClass& rel : keel_relations(d, n)) {
        Profile pr = profile_of(rel);
        expect(pr.NG == 0, "relation pairs to zero against the target test curve");
        for (const auto& [bk, v] : pr.N)
            expect(v == 0, "relation pairs to zero against every test curve");
        expect(reduce_to_basis(rel).is_zero(), "relation reduces to zero in the basis");
    }
}

inline void check_localization_oracles() {
    using K = BFactor;
    EquivPoly two_marks = integrate_expr(2, 1, {K::ev(1), K::ev(2)});
    expect(two_marks == EquivPoly::term(0, Rat(1)), "two evaluation classes meet in one point");
    EquivPoly psi1 = integrate_expr(1, 1, {K::psi(1)});
    expect(psi1 == EquivPoly::term(0, Rat(-2)), "cotangent integral on the one-marking space");
    EquivPoly evsq = integrate_expr(1, 2, {K::ev(1), K::ev(1), K::ev(1)});
    (void)evsq;  // validated internally: homogeneous, even powers
    EquivPoly ev_sq_small = integrate_expr(1, 1, {K::ev(1), K::ev(1)});
    expect(ev_sq_small.is_zero(), "squared evaluation class integrates to zero");
    EquivPoly one = integrate_expr(1, 1, {K::ev(1)});
    expect(one == EquivPoly::term(0, Rat(1)), "single evaluation class on the degree-1 space");
    EquivPoly dsq = integrate_expr(0, 2, {K::bdry(0, 1), K::bdry(0, 1)});
    expect(dsq == EquivPoly::term(0, Rat(2)), "self-intersection of the balanced splitting");
}

inline void check_random_even_powers(int kmax, int nmax, int trials, unsigned seed) {
    std::mt19937 rng(seed);
    for (int t = 0; t < trials; ++t) {
        int k = 1 + static_cast<int>(rng() % kmax);
        int n = static_cast<int>(rng() % (nmax + 1));
        int dim = stable_maps_dim(n, k);
        if (dim < 0) continue;
        int len = static_cast<int>(rng() % (dim + 2));
        BExpr expr;
        for (int j = 0; j < len; ++j) {
            if (n > 0 && rng() % 2) {
                int i = 1 + static_cast<int>(rng() % n);
                expr.push_back(rng() % 2 ? BFactor::ev(i) : BFactor::psi(i));
            } else {
                for (int attempt = 0; attempt < 20; ++attempt) {
                    int a = static_cast<int>(rng() % (k + 1));
                    Mask A = static_cast<Mask>(rng()) & mask_all(n);
                    if (bdry_label_ok(n, k, A, a)) {
                        expr.push_back(BFactor::bdry(A, a));
                        break;
                    }
                }
            }
        }
        EquivPoly p = integrate_expr(n, k, expr);  // throws on parity/homogeneity breach
        expect(p.c.size() <= 1, "integral concentrates in one power");
    }
}

inline void check_base_numbers() {
    {
        WeightTuple wt{2, {}};
        DivClass D = gen_class(2, 0, GenId::boundary(0, 1));
        expect(intersect(wt, {D, D}) == 1, "squared splitting divisor on the unmarked degree-2 space");
    }
    {
        WeightTuple wt{1, {Rat(1)}};
        expect(intersect(wt, {gen_class(1, 1, GenId::h())}) == Rat(-1, 4),
               "hyperplane on the one-marking degree-1 space");
        expect(intersect(wt, {gen_class(1, 1, GenId::boundary(0, 1))}) == 1,
               "splitting divisor on the one-marking degree-1 space");
    }
    {
        WeightTuple wt{0, {Rat(1), Rat(1)}};
        expect(intersect(wt, {}) == 1, "two-marking degree-0 point space");
    }
    {
        WeightTuple wt{0, {Rat(2), Rat(2), Rat(2)}};
        expect(intersect(wt, {gen_class(0, 3, GenId::g())}) == 1,
               "target hyperplane at heavy weights");
    }
    {
        WeightTuple wt{0, {Rat(1, 2), Rat(1, 2), Rat(1, 2)}};
        expect(intersect(wt, {gen_class(0, 3, GenId::g())}) == Rat(-1, 2),
               "target hyperplane at light weights");
    }
}

inline void check_choice_independence(int d, const std::vector<Rat>& w, unsigned seed, int trials) {
    WeightTuple wt{d, w};
    if (!is_admissible(wt) || !space_nonempty(wt)) throw std::runtime_error("bad fixture weights");
    const QuotientContext& Q = quotient_for(wt);
    std::vector<GenId> bgens;
    for (const GenId& g : Q.survivors)
        if (g.is_boundary()) bgens.push_back(g);
    if (bgens.size() < 2) throw std::runtime_error("fixture has too few surviving divisors");
    int dim = 2 * d - 2 + wt.n();
    if (dim < 2) throw std::runtime_error("fixture space is too small");
    std::mt19937 rng(seed);
    for (int t = 0; t < trials; ++t) {
        // two distinct generators guaranteed, remaining slots random
        std::vector<GenId> mono = {bgens[0], bgens[1]};
        for (int j = 2; j < dim; ++j) mono.push_back(bgens[rng() % bgens.size()]);
        std::sort(mono.begin(), mono.end());
        Rat a = eval_monomial(wt, mono, BoundaryChoice{mono.front().B, mono.front().k});
        Rat b = eval_monomial(wt, mono, BoundaryChoice{mono.back().B, mono.back().k});
        expect(a == b, "value independent of the splitting divisor");
    }
}

inline void check_pullback_identities(int d) {
    for (int n = 1; n <= 2; ++n) {
        DivClass dp = class_Dp(d, 0);
        DivClass lifted = pullback_forget_markings(d, n, dp);
        expect(lifted == class_Dp(d, n), "marked-point-forgetting pullback fixes the vertical sum");
    }
    for (int n = 0; n <= 1; ++n) {
        int dm = d * d;
        for (const GenId& g : basis(dm, n)) {
            DivClass cls = gen_class(dm, n, g);
            DivClass direct = pullback_selfcompose(d, n, 2, cls);
            ProductClass split = pullback_compose(d, n, d, cls);
            DivClass chained = pullback_selfcompose(d, n, 1, split.first);
            chained += pullback_forget_markings(d, n, split.second);
            expect(direct == chained, "iterate pullback factors through one composition step");
        }
    }
    for (int n = 0; n <= 1; ++n) {
        DivClass per = class_per(d * d, n, 1);
        DivClass pulled = pullback_selfcompose(d, n, 2, per);
        expect(pulled == class_per(d, n, 2), "periodic-point class pulls back to the iterate class");
    }
}

inline void check_quotient_examples() {
    {
        WeightTuple wt{0, {Rat(1), Rat(1), Rat(2)}};
        DivClass g = to_quotient(gen_class(0, 3, GenId::g()), wt);
        DivClass want = Rat(1, 2) * gen_class(0, 3, GenId::boundary(Mask{3}, 0));
        expect(g == want, "target hyperplane rewrites to half the heavy splitting divisor");
    }
    {
        DivClass fix1 = class_fix_profile(1, 1, 1);
        DivClass want = Rat(2) * gen_class(1, 1, GenId::h()) +
                        Rat(1, 2) * gen_class(1, 1, GenId::boundary(0, 1)) -
                        Rat(1, 2) * gen_class(1, 1, GenId::boundary(Mask{1}, 1));
        expect(fix1 == want, "fixed-point class on the one-marking degree-1 space");
    }
}

}  // namespace detail

inline std::vector<CheckResult> run_selfcheck(bool full) {
    std::vector<CheckResult> out;
    using detail::run_check;
    run_check(out, "rank formula (small degrees)", [] { detail::check_rank(2, 0, 4); });
    run_check(out, "pairing-profile round trips", [] {
        for (int d = 0; d <= 2; ++d)
            for (int n = 1; n <= 3; ++n)
                if (d > 0 || n >= 2) detail::check_round_trip(d, n);
    });
    run_check(out, "four-point relations vanish", [] {
        for (int d = 0; d <= 2; ++d) detail::check_relations_vanish(d, 4);
    });
    run_check(out, "localization oracles", [] { detail::check_localization_oracles(); });
    run_check(out, "localized powers are even", [] { detail::check_random_even_powers(2, 3, 40, 11); });
    run_check(out, "anchor intersection numbers", [] { detail::check_base_numbers(); });
    run_check(out, "splitting-choice independence", [] {
        detail::check_choice_independence(2, {Rat(1, 2)}, 7, 6);
        detail::check_choice_independence(2, {Rat(1, 4), Rat(1, 2)}, 13, 6);
    });
    run_check(out, "pullback identities (degree 2)", [] { detail::check_pullback_identities(2); });
    run_check(out, "quotient rewriting examples", [] { detail::check_quotient_examples(); });
    if (full) {
        run_check(out, "rank formula (degree 3)", [] { detail::check_rank(3, 3, 5); });
        run_check(out, "round trips (degree 3)", [] {
            for (int n = 1; n <= 3; ++n) detail::check_round_trip(3, n);
        });
        run_check(out, "localized powers are even (degree 3)",
                  [] { detail::check_random_even_powers(3, 4, 25, 17); });
        run_check(out, "pullback identities (degree 3)", [] { detail::check_pullback_identities(3); });
        run_check(out, "splitting-choice independence (degree 3)", [] {
            detail::check_choice_independence(3, {Rat(1, 2)}, 19, 4);
        });
    }
    return out;
}

}  // namespace selfmap
