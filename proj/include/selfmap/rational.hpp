#pragma once

// Exact rational scalar type and the error/assertion conventions used across
// the library.  No floating point is used anywhere: every coefficient,
// weight, and intersection number is a boost cpp_rational.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

namespace selfmap {

using Rat = boost::multiprecision::cpp_rational;
using Int = boost::multiprecision::cpp_int;

// Thrown for malformed user input: bad labels, dimension mismatches,
// inadmissible weights, queries on provably empty spaces.  The CLI maps this
// to exit code 2.
struct invalid_input : std::runtime_error {
    explicit invalid_input(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an internal invariant that should be unreachable is breached
// (a cancellation that must happen did not, an elimination without a pivot,
// ...).  The CLI maps this to exit code 3.
struct internal_error : std::logic_error {
    explicit internal_error(const std::string& what) : std::logic_error(what) {}
};

// Invariant assertion that survives release builds; these conditions guard
// mathematical consistency, not programmer typos, so they must always run.
#define SELFMAP_CHECK(cond, msg)                                        \
    do {                                                                \
        if (!(cond)) throw ::selfmap::internal_error(                   \
            std::string("invariant breach: ") + (msg));                 \
    } while (0)

inline Int rat_num(const Rat& r) { return boost::multiprecision::numerator(r); }
inline Int rat_den(const Rat& r) { return boost::multiprecision::denominator(r); }

// Canonical text form used in query strings and cache keys: always "p/q"
// with q > 0 and gcd(p, q) = 1 (cpp_rational maintains both), sign on p.
inline std::string rat_canonical(const Rat& r) {
    std::ostringstream os;
    os << rat_num(r) << '/' << rat_den(r);
    return os.str();
}

// Human-facing form: bare integer when the denominator is 1, else "p/q".
inline std::string rat_human(const Rat& r) {
    std::ostringstream os;
    if (rat_den(r) == 1) os << rat_num(r);
    else os << rat_num(r) << '/' << rat_den(r);
    return os.str();
}

// Parses "p", "-p", "p/q" with optional sign on the numerator only.
inline Rat rat_parse(const std::string& text) {
    auto bad = [&] { throw invalid_input("malformed rational: '" + text + "'"); };
    if (text.empty()) bad();
    std::size_t slash = text.find('/');
    try {
        if (slash == std::string::npos) return Rat(Int(text));
        Int p(text.substr(0, slash));
        Int q(text.substr(slash + 1));
        if (q <= 0) bad();
        return Rat(p, q);
    } catch (const std::runtime_error&) {
        bad();
    }
    return Rat(0);  // unreachable
}

inline Rat rat_pow(const Rat& base, int exp) {
    SELFMAP_CHECK(exp >= 0 || base != 0, "0 cannot be raised to a negative power");
    Rat acc(1);
    Rat b = exp >= 0 ? base : Rat(1) / base;
    for (int i = 0, e = exp >= 0 ? exp : -exp; i < e; ++i) acc *= b;
    return acc;
}

inline Int int_factorial(int m) {
    SELFMAP_CHECK(m >= 0, "factorial of a negative number");
    Int acc(1);
    for (int i = 2; i <= m; ++i) acc *= i;
    return acc;
}

}  // namespace selfmap
