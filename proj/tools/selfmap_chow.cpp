// Command-line front end for the divisor calculus on self-map spaces:
// list basis generators, build and reduce named classes, compute pullbacks
// and intersection numbers (with a persistent result cache), and run the
// built-in consistency suite.
//
// Exit codes: 0 success, 2 invalid input, 3 internal invariant breach.

#include "selfmap/cache.hpp"
#include "selfmap/divisors.hpp"
#include "selfmap/engine.hpp"
#include "selfmap/picard.hpp"
#include "selfmap/pullbacks.hpp"
#include "selfmap/selfcheck.hpp"
#include "selfmap/serialize.hpp"
#include "selfmap/sha256.hpp"
#include "selfmap/weights.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <set>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
using namespace selfmap;

std::string cache_path_from(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("SELFMAP_CHOW_CACHE"); env && *env) return env;
    return ".selfmap-chow.cache";
}

WeightTuple weights_from(int d, const std::string& weights_csv) {
    WeightTuple wt;
    wt.d = d;
    wt.w = parse_weight_list(weights_csv);
    validate_weights(wt);
    return wt;
}

void require_admissible_verbose(const WeightTuple& wt) {
    if (is_admissible(wt)) return;
    Int L = weight_denominator_lcm(wt);
    Rat dT = total_weight(wt);
    throw invalid_input("weights are not admissible: L*dT must be an odd integer, got L = " +
                        rat_canonical(Rat(L)) + ", dT = " + rat_canonical(dT));
}

int cmd_basis(int d, int n, const std::string& weights_csv, bool as_json) {
    json out;
    std::vector<GenId> bs = basis(d, n);
    out["d"] = d;
    out["n"] = n;
    out["rank"] = bs.size();
    std::optional<WeightTuple> wt;
    if (!weights_csv.empty() || n == 0) {
        // weights are optional; an empty --weights on a marked space means "no weights given"
        std::vector<Rat> w = parse_weight_list(weights_csv);
        if (!w.empty() || n == 0) {
            if (static_cast<int>(w.size()) != n)
                throw invalid_input("expected " + std::to_string(n) + " weights");
            wt = WeightTuple{d, w};
        }
    }
    std::vector<std::string> lines;
    json gens = json::array();
    if (wt) {
        require_admissible_verbose(*wt);
        if (!space_nonempty(*wt)) throw invalid_input("the space is empty for these weights");
        const QuotientContext& Q = quotient_for(*wt);
        const std::set<GenId> alive(Q.survivors.begin(), Q.survivors.end());
        for (const GenId& g : bs) {
            std::string status = "ok";
            if (g.is_boundary() && !boundary_stable(*wt, g.B, g.k))
                status = "unstable";
            else if (!alive.contains(g))
                status = "eliminated";
            lines.push_back(gen_key(g) + (status == "ok" ? "" : " " + status));
            gens.push_back({{"key", gen_key(g)}, {"status", status}});
        }
    } else {
        for (const GenId& g : bs) {
            lines.push_back(gen_key(g));
            gens.push_back({{"key", gen_key(g)}, {"status", "ok"}});
        }
    }
    out["generators"] = gens;
    if (as_json) {
        std::cout << out.dump() << "\n";
    } else {
        std::cout << "rank " << bs.size() << "\n";
        for (const std::string& line : lines) std::cout << line << "\n";
    }
    return 0;
}

int cmd_intersect(int d, const std::string& weights_csv,
                  const std::vector<std::string>& factor_args, const std::string& cache_flag,
                  int jobs, bool as_json) {
    WeightTuple wt = weights_from(d, weights_csv);
    std::vector<DivClass> factors;
    for (const std::string& arg : factor_args)
        for (const std::string& expr : selfmap::detail::split_on(arg, ';'))
            factors.push_back(parse_class(wt.d, wt.n(), expr));
    engine_jobs().store(jobs > 0 ? jobs : 1);

    std::string query = canonical_query(wt, factors);
    ResultCache cache(cache_path_from(cache_flag));
    std::optional<Rat> hit = cache.lookup(query);
    Rat value = hit ? *hit : intersect(wt, factors);
    if (!hit) cache.store(query, value);

    if (as_json) {
        json out;
        out["query"] = query;
        out["sha256"] = sha256_hex(query);
        out["value"] = rat_canonical(value);
        out["value_human"] = rat_human(value);
        out["cache_hit"] = static_cast<bool>(hit);
        out["cache_path"] = cache.path();
        out["cache_records"] = cache.size();
        std::cout << out.dump() << "\n";
    } else {
        std::cout << rat_human(value) << "\n";
    }
    return 0;
}

int cmd_class(int d, int n, const std::string& weights_csv, const std::string& name,
              const std::string& expr, int i, int coord, int m, int aux_a, int aux_b,
              bool as_json) {
    DivClass cls = zero_class(d, n);
    if (!expr.empty()) {
        cls = reduce_to_basis(parse_class(d, n, expr));
    } else if (name == "H") {
        cls = class_H(d, n, i, coord);
    } else if (name == "Hprime") {
        cls = class_Hprime(d, n, i);
    } else if (name == "Dp") {
        cls = class_Dp(d, n);
    } else if (name == "fix") {
        cls = class_fix(d, n, i);
    } else if (name == "psi") {
        cls = class_psi(d, n, i, aux_a, aux_b);
    } else if (name == "per") {
        cls = class_per(d, n, m);
    } else if (name == "resultant") {
        cls = class_resultant(d, n);
    } else {
        throw invalid_input("unknown class name '" + name + "' (and no --expr given)");
    }
    if (!weights_csv.empty() || n == 0) {
        std::vector<Rat> w = parse_weight_list(weights_csv);
        if (!w.empty() || (n == 0 && !weights_csv.empty())) {
            if (static_cast<int>(w.size()) != n)
                throw invalid_input("expected " + std::to_string(n) + " weights");
            WeightTuple wt{d, w};
            validate_weights(wt);
            require_admissible_verbose(wt);
            if (!space_nonempty(wt)) throw invalid_input("the space is empty for these weights");
            cls = to_quotient(cls, wt);
        }
    }
    if (as_json) {
        json out;
        out["d"] = d;
        out["n"] = n;
        out["class"] = class_to_string(cls);
        json terms = json::array();
        for (const auto& [g, x] : cls.c)
            terms.push_back({{"coeff", rat_canonical(x)}, {"key", gen_key(g)}});
        out["terms"] = terms;
        std::cout << out.dump() << "\n";
    } else {
        std::cout << class_to_string(cls) << "\n";
    }
    return 0;
}

int cmd_pullback(const std::string& kind, int d, int n, int d2, int m, const std::string& expr,
                 const std::string& marks_a, const std::string& marks_b, bool as_json) {
    json out;
    std::string human;
    if (kind == "compose") {
        DivClass cls = parse_class(d * d2, n, expr);
        ProductClass pc = pullback_compose(d, n, d2, cls);
        out["first"] = class_to_string(pc.first);
        out["second"] = class_to_string(pc.second);
        human = "first: " + class_to_string(pc.first) + "\nsecond: " + class_to_string(pc.second);
    } else if (kind == "selfcompose") {
        long long target = 1;
        for (int j = 0; j < m; ++j) target *= d;
        if (target > 1000000) throw invalid_input("iterated degree too large");
        DivClass cls = parse_class(static_cast<int>(target), n, expr);
        DivClass res = pullback_selfcompose(d, n, m, cls);
        out["class"] = class_to_string(res);
        human = class_to_string(res);
    } else if (kind == "forget-markings") {
        DivClass cls = parse_class(d, 0, expr);
        DivClass res = pullback_forget_markings(d, n, cls);
        out["class"] = class_to_string(res);
        human = class_to_string(res);
    } else if (kind == "forget-map") {
        // boundary pullback along the map to the marked-curve space, for a
        // two-sided partition of the markings
        Mask A = 0, B = 0;
        for (const std::string& tok : selfmap::detail::split_on(marks_a, ',')) {
            if (tok.empty()) continue;
            int v = selfmap::detail::parse_int(tok);
            if (v < 1 || v > n) throw invalid_input("marking out of range in --A");
            A |= Mask{1} << (v - 1);
        }
        for (const std::string& tok : selfmap::detail::split_on(marks_b, ',')) {
            if (tok.empty()) continue;
            int v = selfmap::detail::parse_int(tok);
            if (v < 1 || v > n) throw invalid_input("marking out of range in --B");
            B |= Mask{1} << (v - 1);
        }
        if ((A & B) != 0 || (A | B) != mask_all(n))
            throw invalid_input("invalid partition: --A and --B must split the markings");
        DivClass res = pullback_forgetful_M0n(d, n, A);
        out["class"] = class_to_string(res);
        human = class_to_string(res);
    } else {
        throw invalid_input("unknown pullback kind '" + kind + "'");
    }
    if (as_json)
        std::cout << out.dump() << "\n";
    else
        std::cout << human << "\n";
    return 0;
}

int cmd_selfcheck(bool full, bool as_json) {
    std::vector<CheckResult> results = run_selfcheck(full);
    bool all = true;
    json checks = json::array();
    for (const CheckResult& r : results) {
        all = all && r.pass;
        checks.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
        if (!as_json) {
            if (r.pass)
                std::cout << "ok: " << r.name << "\n";
            else
                std::cout << "FAIL: " << r.name << " (" << r.detail << ")\n";
        }
    }
    if (as_json) {
        json out;
        out["mode"] = full ? "full" : "quick";
        out["pass"] = all;
        out["checks"] = checks;
        std::cout << out.dump() << "\n";
    } else {
        std::cout << (all ? "all checks passed" : "CHECKS FAILED") << "\n";
    }
    return all ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact divisor-class calculus on the moduli of self-maps of the line"};
    app.require_subcommand(1);

    // basis
    auto* sb = app.add_subcommand("basis", "list the divisor-class basis of a space");
    int b_d = 0, b_n = 0;
    std::string b_weights;
    bool b_json = false;
    sb->add_option("--d", b_d, "map degree")->required();
    sb->add_option("--n", b_n, "number of markings")->required();
    sb->add_option("--weights", b_weights, "comma-separated marking weights");
    sb->add_flag("--json", b_json, "emit one JSON object");

    // intersect
    auto* si = app.add_subcommand("intersect", "compute a top intersection number");
    int i_d = 0, i_jobs = 1;
    std::string i_weights, i_cache;
    std::vector<std::string> i_factors;
    bool i_json = false;
    si->add_option("--d", i_d, "map degree")->required();
    si->add_option("--weights", i_weights, "comma-separated marking weights");
    si->add_option("--factors", i_factors,
                   "divisor-class expressions, ';'-separated or repeated")
        ->required();
    si->add_option("--cache", i_cache, "result cache file (default: SELFMAP_CHOW_CACHE or .selfmap-chow.cache)");
    si->add_option("--jobs", i_jobs, "worker threads for independent monomials");
    si->add_flag("--json", i_json, "emit one JSON object");

    // class
    auto* sc = app.add_subcommand("class", "build or reduce a divisor class");
    int c_d = 0, c_n = 0, c_i = 1, c_coord = 1, c_m = 1, c_a = 0, c_b = 0;
    std::string c_weights, c_name, c_expr;
    bool c_json = false;
    sc->add_option("--d", c_d, "map degree")->required();
    sc->add_option("--n", c_n, "number of markings")->required();
    sc->add_option("--weights", c_weights, "reduce into the weighted quotient");
    sc->add_option("--name", c_name, "H | Hprime | Dp | fix | psi | per | resultant");
    sc->add_option("--expr", c_expr, "explicit class expression to reduce");
    sc->add_option("--i", c_i, "marking index for H/Hprime/fix/psi");
    sc->add_option("--coord", c_coord, "coordinate (1 or 2) for H");
    sc->add_option("--m", c_m, "iterate order for per");
    sc->add_option("--a", c_a, "auxiliary marking for psi");
    sc->add_option("--b", c_b, "second auxiliary marking for psi");
    sc->add_flag("--json", c_json, "emit one JSON object");

    // pullback
    auto* sp = app.add_subcommand("pullback", "pull a class back along a structure map");
    std::string p_kind, p_expr, p_A, p_B;
    int p_d = 0, p_n = 0, p_d2 = 0, p_m = 1;
    bool p_json = false;
    sp->add_option("--kind", p_kind, "compose | selfcompose | forget-markings | forget-map")
        ->required();
    sp->add_option("--d", p_d, "map degree of the source space")->required();
    sp->add_option("--n", p_n, "markings of the source space")->required();
    sp->add_option("--d2", p_d2, "degree of the post-composed map (compose)");
    sp->add_option("--m", p_m, "iterate order (selfcompose)");
    sp->add_option("--expr", p_expr, "class expression on the target space");
    sp->add_option("--A", p_A, "first half of the marking partition (forget-map)");
    sp->add_option("--B", p_B, "second half of the marking partition (forget-map)");
    sp->add_flag("--json", p_json, "emit one JSON object");

    // selfcheck
    auto* ss = app.add_subcommand("selfcheck", "run the built-in consistency suite");
    bool s_full = false, s_json = false;
    ss->add_flag("--full", s_full, "add the slower degree-3 tier");
    ss->add_flag("--json", s_json, "emit one JSON object");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sb->parsed()) return cmd_basis(b_d, b_n, b_weights, b_json);
        if (si->parsed()) return cmd_intersect(i_d, i_weights, i_factors, i_cache, i_jobs, i_json);
        if (sc->parsed())
            return cmd_class(c_d, c_n, c_weights, c_name, c_expr, c_i, c_coord, c_m, c_a, c_b,
                             c_json);
        if (sp->parsed()) return cmd_pullback(p_kind, p_d, p_n, p_d2, p_m, p_expr, p_A, p_B, p_json);
        if (ss->parsed()) return cmd_selfcheck(s_full, s_json);
        std::cerr << "error: no subcommand given\n";
        return 2;
    } catch (const invalid_input& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const internal_error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
