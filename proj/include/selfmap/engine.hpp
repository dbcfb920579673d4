#pragma once

// Top intersection numbers of divisor classes on the weighted self-map
// spaces.  A query is reduced to base cases by three moves:
//   - a boundary generator in the monomial splits the space along that
//     divisor; the bubble side is integrated by localization and the other
//     side recursed on (with the node weight appended);
//   - a repeated H is rewritten through the quadratic relation tying the
//     two marked-point hyperplane classes, whose difference is supported on
//     boundary generators;
//   - a repeated G (degree zero only) is rewritten as the square of the
//     domain-side hyperplane class at the first marking, which is supported
//     on boundary generators.
// Base cases are the zero-dimensional spaces, the one-dimensional degree-1
// one-marking space, and the degree-0 three-marking space.

#include "selfmap/divisors.hpp"
#include "selfmap/equivariant.hpp"
#include "selfmap/picard.hpp"
#include "selfmap/rational.hpp"
#include "selfmap/serialize.hpp"
#include "selfmap/weights.hpp"

#include <algorithm>
#include <atomic>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace selfmap {

// Worker count used to evaluate independent monomials of a top-level query.
inline std::atomic<int>& engine_jobs() {
    static std::atomic<int> jobs{1};
    return jobs;
}

struct BoundaryChoice {
    Mask B = 0;
    int k = 0;
};

Rat intersect(const WeightTuple& wt, const std::vector<DivClass>& factors);
Rat eval_monomial(const WeightTuple& wt, std::vector<GenId> mono,
                  const std::optional<BoundaryChoice>& forced = std::nullopt);

// Intersection number of a monomial on a zero- or one-dimensional space
// where the recursion bottoms out.  Throws for anything else.
inline Rat base_case(const WeightTuple& wt, const std::vector<GenId>& mono) {
    validate_weights(wt);
    if (!is_admissible(wt)) throw invalid_input("weights are not admissible");
    if (!space_nonempty(wt)) throw invalid_input("the space is empty for these weights");
    const int d = wt.d, n = wt.n();
    if (d == 0 && n == 2 && mono.empty()) return Rat(1);
    if (d == 1 && n == 1 && mono.size() == 1 && wt.w[0] > 0 && wt.w[0] < 2) {
        if (mono[0] == GenId::h()) return Rat(-1, 4);
        if (mono[0] == GenId::boundary(0, 1)) return Rat(1);
    }
    if (d == 0 && n == 3 && mono.size() == 1 && mono[0] == GenId::g()) {
        std::vector<Rat> s = wt.w;
        std::sort(s.begin(), s.end());
        if (s[0] + s[1] > 1 + s[2]) return Rat(1);
        Rat val(1);
        if (s[0] + s[2] < 1 + s[1]) val -= 1;
        if (s[1] + s[2] < 1 + s[0]) val -= 1;
        return val / 2;
    }
    throw invalid_input("not a base case");
}

namespace detail {

inline std::string monomial_memo_key(const WeightTuple& wt, const std::vector<GenId>& mono) {
    std::string key = weights_canonical(wt) + "||";
    for (const GenId& g : mono) key += gen_key(g) + ";";
    return key;
}

Rat intersect_impl(const WeightTuple& wt, const std::vector<DivClass>& factors, bool parallel);

// Multilinear expansion of a product of survivor-supported classes into
// monomials, each evaluated and summed.
inline Rat expand_and_eval(const WeightTuple& wt, const std::vector<DivClass>& factors,
                           bool parallel) {
    std::map<std::vector<GenId>, Rat> monos;
    monos.emplace(std::vector<GenId>{}, Rat(1));
    for (const DivClass& f : factors) {
        std::map<std::vector<GenId>, Rat> next;
        for (const auto& [mono, c] : monos) {
            for (const auto& [g, x] : f.c) {
                std::vector<GenId> ext = mono;
                ext.insert(std::upper_bound(ext.begin(), ext.end(), g), g);
                auto [it, fresh] = next.emplace(std::move(ext), c * x);
                if (!fresh) it->second += c * x;
            }
        }
        monos = std::move(next);
    }
    Rat total(0);
    int jobs = engine_jobs().load();
    if (parallel && jobs > 1 && monos.size() > 1) {
        std::vector<std::pair<std::vector<GenId>, Rat>> work(monos.begin(), monos.end());
        int batches = std::min<int>(jobs, static_cast<int>(work.size()));
        std::vector<std::future<Rat>> futs;
        futs.reserve(batches);
        for (int b = 0; b < batches; ++b) {
            futs.push_back(std::async(std::launch::async, [&, b]() {
                Rat sum(0);
                for (std::size_t i = b; i < work.size(); i += batches)
                    sum += work[i].second * eval_monomial(wt, work[i].first);
                return sum;
            }));
        }
        for (auto& f : futs) total += f.get();
    } else {
        for (const auto& [mono, c] : monos)
            if (c != 0) total += c * eval_monomial(wt, mono);
    }
    return total;
}

// Restriction of the leftover monomial to the two sides of the splitting
// along D_{B,k}, followed by integration of the bubble side and recursion
// on the horizontal side.
struct SideOption {
    bool on_first = true;  // horizontal side (divisor classes) or bubble side (integrand factors)
    DivClass first_cls;
    BFactor second_f;
    Rat coeff = Rat(1);
};

inline Rat combine_sides(const WeightTuple& wtA, const std::vector<DivClass>& afactors,
                         int nB, int kB, const BExpr& bexpr) {
    EquivPoly P = integrate_expr(nB, kB, bexpr);
    if (P.is_zero()) return Rat(0);
    const int p = wtA.n();
    const int dimA = 2 * wtA.d - 2 + wtA.n();
    Rat val(0);
    for (const auto& [e, c] : P.c) {
        SELFMAP_CHECK(static_cast<int>(afactors.size()) + e == dimA,
                      "split sides disagree about the dimension");
        std::vector<DivClass> withH = afactors;
        for (int j = 0; j < e; ++j) withH.push_back(class_H(wtA.d, wtA.n(), p, 1));
        val += c * intersect_impl(wtA, withH, false);
    }
    return val;
}

inline Rat restrict_monomial(const WeightTuple& wt, const std::vector<GenId>& mono,
                             Mask B, int k) {
    const int d = wt.d, n = wt.n();
    const GenId chosen = GenId::boundary(B, k);
    SELFMAP_CHECK(boundary_stable(wt, B, k), "splitting along an unstable boundary divisor");

    const WeightTuple wtA = restrict_weights(wt, B, k);
    const int nA = wtA.n();
    const int p = nA;  // node marking on the horizontal side (appended last)
    std::vector<int> amarks, bmarks;
    for (int i = 1; i <= n; ++i) (mask_has(B, i) ? bmarks : amarks).push_back(i);
    const int nB = static_cast<int>(bmarks.size()) + 1;
    const int pp = nB;  // node marking on the bubble side
    auto remap = [](const std::vector<int>& marks, int i) {
        auto it = std::lower_bound(marks.begin(), marks.end(), i);
        SELFMAP_CHECK(it != marks.end() && *it == i, "marking missing from its side");
        return static_cast<int>(it - marks.begin()) + 1;
    };
    auto remap_mask = [&](const std::vector<int>& marks, Mask S) {
        Mask out = 0;
        for (int i : marks)
            if (mask_has(S, i)) out |= Mask{1} << (remap(marks, i) - 1);
        return out;
    };

    std::vector<GenId> rest = mono;
    auto pos = std::find(rest.begin(), rest.end(), chosen);
    SELFMAP_CHECK(pos != rest.end(), "chosen divisor not present in the monomial");
    rest.erase(pos);

    std::vector<std::vector<SideOption>> menu;
    for (const GenId& g : rest) {
        std::vector<SideOption> opts;
        if (g.is_boundary()) {
            const Mask Bp = g.B;
            const int kp = g.k;
            if (g == chosen) {
                // Self-restriction: minus the node cotangent class on either
                // side; an unmarked bubble of the same degree can also
                // reappear on the horizontal side.
                opts.push_back({true, Rat(-1) * class_psi(wtA.d, nA, p), {}, Rat(1)});
                opts.push_back({false, {}, BFactor::psi(pp), Rat(-1)});
                if (B == 0 && 2 * k <= d) {
                    GenId again = GenId::boundary(0, k);
                    SELFMAP_CHECK(gen_valid(wtA.d, nA, again), "re-bubbled divisor label");
                    opts.push_back({true, gen_class(wtA.d, nA, again), {}, Rat(1)});
                }
            } else {
                // disjoint bubble on the horizontal side
                if ((Bp & B) == 0 && kp <= d - k) {
                    GenId ga = GenId::boundary(remap_mask(amarks, Bp), kp);
                    if (gen_valid(wtA.d, nA, ga))
                        opts.push_back({true, gen_class(wtA.d, nA, ga), {}, Rat(1)});
                }
                // the split bubble contained in the other one
                if ((B & ~Bp) == 0 && k <= kp) {
                    Mask BA = remap_mask(amarks, Bp & ~B) | (Mask{1} << (p - 1));
                    GenId ga = GenId::boundary(BA, kp - k);
                    if (gen_valid(wtA.d, nA, ga))
                        opts.push_back({true, gen_class(wtA.d, nA, ga), {}, Rat(1)});
                }
                // the other bubble inside the split one
                if ((Bp & ~B) == 0 && kp <= k) {
                    Mask BB = remap_mask(bmarks, Bp);
                    if (bdry_label_ok(nB, k, BB, kp))
                        opts.push_back({false, {}, BFactor::bdry(BB, kp), Rat(1)});
                }
            }
        } else if (g.kind == GenId::Kind::H) {
            int idx = mask_has(B, 1) ? p : remap(amarks, 1);
            opts.push_back({true, class_H(wtA.d, nA, idx, 1), {}, Rat(1)});
        } else {  // G: degree-zero target-side hyperplane, shared through the node
            GenId gg = GenId::g();
            SELFMAP_CHECK(gen_valid(wtA.d, nA, gg), "target hyperplane survives restriction");
            opts.push_back({true, gen_class(wtA.d, nA, gg), {}, Rat(1)});
        }
        menu.push_back(std::move(opts));
    }
    // the gluing diagonal, inserted once
    menu.push_back({{true, class_H(wtA.d, nA, p, 2), {}, Rat(1)},
                    {false, {}, BFactor::ev(pp), Rat(1)}});

    Rat total(0);
    std::vector<DivClass> afactors;
    BExpr bexpr;
    auto walk = [&](auto&& self, std::size_t level, Rat coeff) -> void {
        if (level == menu.size()) {
            total += coeff * combine_sides(wtA, afactors, nB, k, bexpr);
            return;
        }
        for (const SideOption& opt : menu[level]) {
            if (opt.on_first) {
                afactors.push_back(opt.first_cls);
                self(self, level + 1, coeff * opt.coeff);
                afactors.pop_back();
            } else {
                bexpr.push_back(opt.second_f);
                self(self, level + 1, coeff * opt.coeff);
                bexpr.pop_back();
            }
        }
    };
    walk(walk, 0, Rat(1));
    return total;
}

inline Rat eval_monomial_impl(const WeightTuple& wt, const std::vector<GenId>& mono,
                              const std::optional<BoundaryChoice>& forced) {
    const int d = wt.d, n = wt.n();
    if (mono.empty()) return base_case(wt, mono);

    // restriction move: split along a boundary generator when one is present
    const GenId* pick = nullptr;
    for (const GenId& g : mono) {
        if (!g.is_boundary()) continue;
        if (forced) {
            if (g.B == forced->B && g.k == forced->k) { pick = &g; break; }
            continue;
        }
        if (!pick || g.k > pick->k || (g.k == pick->k && g.B < pick->B)) pick = &g;
    }
    if (forced) {
        SELFMAP_CHECK(pick != nullptr, "forced splitting divisor absent from the monomial");
        return restrict_monomial(wt, mono, pick->B, pick->k);
    }
    if (pick) return restrict_monomial(wt, mono, pick->B, pick->k);

    int a = 0, b = 0;
    for (const GenId& g : mono) (g.kind == GenId::Kind::H ? a : b) += 1;
    SELFMAP_CHECK(a + b == static_cast<int>(mono.size()), "monomial holds unknown generators");

    if (b >= 2) {
        // G^2 = (first-marking domain hyperplane)^2, which reduces to
        // boundary generators on a degree-zero space with many markings.
        SELFMAP_CHECK(d == 0 && a == 0, "repeated target hyperplane outside degree zero");
        DivClass X = to_quotient(class_H(d, n, 1, 1), wt);
        for (const auto& [g, x] : X.c)
            SELFMAP_CHECK(g.is_boundary(), "domain hyperplane must reduce to boundary terms");
        std::vector<DivClass> factors = {X, X};
        for (int j = 0; j < b - 2; ++j) factors.push_back(gen_class(d, n, GenId::g()));
        return expand_and_eval(wt, factors, false);
    }
    if (a >= 2) {
        // H^2 through the relation (H_{1,2} - d H_{1,1}) (H_{1,2} + d H_{1,1})
        // = (1 - d^2) t^2-part, where R = H_{1,2} - d H_{1,1} is supported on
        // boundary generators.
        SELFMAP_CHECK(d >= 2 && b == 0, "repeated hyperplane needs degree at least two");
        DivClass R = to_quotient(class_Hprime(d, n, 1), wt);
        for (const auto& [g, x] : R.c)
            SELFMAP_CHECK(g.is_boundary(), "hyperplane difference must reduce to boundary terms");
        DivClass S = Rat(1, Int(1) - Int(d) * Int(d)) *
                     (Rat(2 * d) * gen_class(d, n, GenId::h()) + R);
        std::vector<DivClass> factors = {R, S};
        for (int j = 0; j < a - 2; ++j) factors.push_back(gen_class(d, n, GenId::h()));
        return expand_and_eval(wt, factors, false);
    }
    SELFMAP_CHECK(a + b == 1 && static_cast<int>(mono.size()) == 1,
                  "unexpected monomial shape after reductions");
    return base_case(wt, mono);
}

inline Rat intersect_impl(const WeightTuple& wt, const std::vector<DivClass>& factors,
                          bool parallel) {
    validate_weights(wt);
    const int dim = 2 * wt.d - 2 + wt.n();
    if (static_cast<int>(factors.size()) != dim)
        throw invalid_input("dimension mismatch: expected " + std::to_string(dim) +
                            " factors, got " + std::to_string(factors.size()));
    for (const DivClass& f : factors)
        if (f.d != wt.d || f.n != wt.n())
            throw invalid_input("factor lives on a different space than the weights");
    if (!is_admissible(wt)) throw invalid_input("weights are not admissible");
    if (!space_nonempty(wt)) throw invalid_input("the space is empty for these weights");

    const QuotientContext& Q = quotient_for(wt);
    if (dim > 0 && Q.survivors.empty())
        throw invalid_input("no divisor class survives on this space");
    std::vector<DivClass> reduced;
    reduced.reserve(factors.size());
    for (const DivClass& f : factors) {
        DivClass r = Q.apply(reduce_to_basis(f));
        if (r.is_zero()) return Rat(0);
        reduced.push_back(std::move(r));
    }
    return expand_and_eval(wt, reduced, parallel);
}

}  // namespace detail

// Evaluate one survivor-supported monomial; `forced` overrides the choice of
// splitting divisor (it must name a boundary generator of the monomial) and
// bypasses the memo, so alternative recursion orders can be compared.
inline Rat eval_monomial(const WeightTuple& wt, std::vector<GenId> mono,
                         const std::optional<BoundaryChoice>& forced) {
    std::sort(mono.begin(), mono.end());
    if (forced) return detail::eval_monomial_impl(wt, mono, forced);
    static std::map<std::string, Rat> memo;
    static std::mutex mu;
    std::string key = detail::monomial_memo_key(wt, mono);
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
    }
    Rat val = detail::eval_monomial_impl(wt, mono, std::nullopt);
    std::lock_guard<std::mutex> lock(mu);
    memo.emplace(std::move(key), val);
    return val;
}

// Top intersection number of dim-many divisor classes on M(d | weights).
inline Rat intersect(const WeightTuple& wt, const std::vector<DivClass>& factors) {
    return detail::intersect_impl(wt, factors, true);
}

}  // namespace selfmap
