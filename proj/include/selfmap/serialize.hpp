#pragma once

// Text forms: generator keys, divisor-class expressions, weight lists, and
// the canonical intersection-query line used for hashing and caching.
//
// Grammar:
//   generator key   :=  "H" | "G" | "D|B=" int-list "|k=" int
//   int-list        :=  "" | int ("," int)*          (strictly increasing)
//   class expr      :=  "0" | term ("+" term)*
//   term            :=  [rational "*"] generator-key
//   rational        :=  canonical "p/q" (q > 0, gcd 1) or a bare integer
//   weight list     :=  "" | rational ("," rational)*
//   query           :=  "intersect d=" int " w=" weight-list
//                       " factors=" class-expr (";" class-expr)*
//
// Canonical output always prints rationals as "p/q", lists factor strings in
// sorted order, and generator terms in generator order, so equal queries
// serialize identically.

#include "selfmap/picard.hpp"
#include "selfmap/rational.hpp"
#include "selfmap/weights.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace selfmap {

inline std::string gen_key(const GenId& g) {
    switch (g.kind) {
        case GenId::Kind::H: return "H";
        case GenId::Kind::G: return "G";
        case GenId::Kind::Boundary: {
            std::string out = "D|B=";
            bool first = true;
            for (int i = 1; i <= 62; ++i) {
                if (!mask_has(g.B, i)) continue;
                if (!first) out += ",";
                out += std::to_string(i);
                first = false;
            }
            out += "|k=" + std::to_string(g.k);
            return out;
        }
    }
    throw internal_error("invariant breach: unknown generator kind");
}

namespace detail {

inline std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

inline int parse_int(const std::string& s) {
    if (s.empty()) throw invalid_input("expected an integer, got an empty token");
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(s, &used);
    } catch (const std::exception&) {
        throw invalid_input("malformed integer '" + s + "'");
    }
    if (used != s.size()) throw invalid_input("malformed integer '" + s + "'");
    return v;
}

}  // namespace detail

inline GenId parse_gen_key(const std::string& s) {
    if (s == "H") return GenId::h();
    if (s == "G") return GenId::g();
    if (s.rfind("D|B=", 0) == 0) {
        std::size_t kpos = s.find("|k=", 4);
        if (kpos == std::string::npos)
            throw invalid_input("malformed boundary key '" + s + "'");
        std::string blist = s.substr(4, kpos - 4);
        int k = detail::parse_int(s.substr(kpos + 3));
        Mask B = 0;
        if (!blist.empty()) {
            int prev = 0;
            for (const std::string& tok : detail::split_on(blist, ',')) {
                int i = detail::parse_int(tok);
                if (i < 1 || i > 62 || i <= prev)
                    throw invalid_input("boundary key markings must be increasing, in '" + s + "'");
                B |= Mask{1} << (i - 1);
                prev = i;
            }
        }
        return GenId::boundary(B, k);
    }
    throw invalid_input("unrecognized generator key '" + s + "'");
}

inline std::string class_to_string(const DivClass& cls) {
    if (cls.is_zero()) return "0";
    std::string out;
    for (const auto& [g, x] : cls.c) {
        if (!out.empty()) out += "+";
        out += rat_canonical(x) + "*" + gen_key(g);
    }
    return out;
}

inline DivClass parse_class(int d, int n, const std::string& s) {
    if (s.empty()) throw invalid_input("empty class expression");
    DivClass cls = zero_class(d, n);
    if (s == "0") return cls;
    for (const std::string& term : detail::split_on(s, '+')) {
        std::size_t star = term.find('*');
        Rat coeff(1);
        std::string key = term;
        if (star != std::string::npos) {
            coeff = rat_parse(term.substr(0, star));
            key = term.substr(star + 1);
        }
        GenId g = parse_gen_key(key);
        if (!gen_valid(d, n, g))
            throw invalid_input("generator '" + key + "' does not live on this space");
        cls.add_term(g, coeff);
    }
    return cls;
}

inline std::string weights_to_string(const WeightTuple& wt) {
    std::string out;
    for (std::size_t i = 0; i < wt.w.size(); ++i) {
        if (i) out += ",";
        out += rat_canonical(wt.w[i]);
    }
    return out;
}

inline std::vector<Rat> parse_weight_list(const std::string& s) {
    std::vector<Rat> w;
    if (s.empty()) return w;
    for (const std::string& tok : detail::split_on(s, ','))
        w.push_back(rat_parse(tok));
    return w;
}

// Canonical one-line form of an intersection query.  Two queries for the
// same number serialize identically: factor expressions are sorted.
inline std::string canonical_query(const WeightTuple& wt, const std::vector<DivClass>& factors) {
    std::vector<std::string> fs;
    fs.reserve(factors.size());
    for (const DivClass& f : factors) fs.push_back(class_to_string(f));
    std::sort(fs.begin(), fs.end());
    std::string out = "intersect d=" + std::to_string(wt.d) + " w=" + weights_to_string(wt) +
                      " factors=";
    for (std::size_t i = 0; i < fs.size(); ++i) {
        if (i) out += ";";
        out += fs[i];
    }
    return out;
}

inline std::pair<WeightTuple, std::vector<DivClass>> parse_query(const std::string& line) {
    auto expect_prefix = [&](const std::string& s, const std::string& prefix) {
        if (s.rfind(prefix, 0) != 0)
            throw invalid_input("malformed query near '" + s + "'");
        return s.substr(prefix.size());
    };
    std::vector<std::string> parts = detail::split_on(line, ' ');
    if (parts.size() != 4 || parts[0] != "intersect")
        throw invalid_input("malformed query line");
    WeightTuple wt;
    wt.d = detail::parse_int(expect_prefix(parts[1], "d="));
    wt.w = parse_weight_list(expect_prefix(parts[2], "w="));
    validate_weights(wt);
    std::vector<DivClass> factors;
    std::string flist = expect_prefix(parts[3], "factors=");
    if (!flist.empty())
        for (const std::string& f : detail::split_on(flist, ';'))
            factors.push_back(parse_class(wt.d, wt.n(), f));
    return {wt, factors};
}

}  // namespace selfmap
