#include "selfmap/divisors.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace selfmap;

namespace {

DivClass bd(int d, int n, Mask B, int k, const Rat& x) {
    return gen_class(d, n, GenId::boundary(B, k), x);
}

}  // namespace

TEST_CASE("evaluation correction class in degree one", "[divisors]") {
    DivClass got = class_Hprime(1, 1, 1);
    DivClass want = bd(1, 1, 0, 1, Rat(1, 2)) + bd(1, 1, Mask{1}, 1, Rat(-1, 2));
    CHECK(got == want);
}

TEST_CASE("evaluation correction class in degree two", "[divisors]") {
    DivClass got = class_Hprime(2, 1, 1);
    DivClass want = bd(2, 1, 0, 1, Rat(1, 4)) + bd(2, 1, Mask{1}, 1, Rat(-3, 4)) +
                    bd(2, 1, 0, 2, Rat(1)) + bd(2, 1, Mask{1}, 2, Rat(-1));
    CHECK(got == want);
}

TEST_CASE("evaluation correction class in degree zero is the target hyperplane", "[divisors]") {
    CHECK(class_Hprime(0, 2, 1) == gen_class(0, 2, GenId::g()));
    CHECK(class_Hprime(0, 3, 2) == gen_class(0, 3, GenId::g()));
}

TEST_CASE("base-point evaluation divisor", "[divisors]") {
    CHECK(class_Dp(2, 0) == bd(2, 0, 0, 1, Rat(1, 4)) + bd(2, 0, 0, 2, Rat(1)));
    CHECK(class_Dp(1, 0) == bd(1, 0, 0, 1, Rat(1, 2)));
    CHECK(class_Dp(0, 2) == gen_class(0, 2, GenId::g()));
}

TEST_CASE("the two evaluation hyperplanes at a marking", "[divisors]") {
    CHECK(class_H(1, 1, 1, 1) == gen_class(1, 1, GenId::h()));
    CHECK(class_H(2, 2, 1, 1) == gen_class(2, 2, GenId::h()));
    // Image-side hyperplane: degree times the source class plus the correction.
    CHECK(class_H(1, 1, 1, 2) ==
          gen_class(1, 1, GenId::h()) + bd(1, 1, 0, 1, Rat(1, 2)) + bd(1, 1, Mask{1}, 1, Rat(-1, 2)));
    CHECK_THROWS_AS(class_H(1, 1, 1, 3), invalid_input);
    CHECK_THROWS_AS(class_H(1, 1, 2, 1), invalid_input);
}

TEST_CASE("fixed-point class agrees with its pairing profile", "[divisors]") {
    for (int d = 0; d <= 2; ++d)
        for (int n = 1; n <= 3; ++n)
            for (int i = 1; i <= n; ++i) {
                CAPTURE(d, n, i);
                CHECK(class_fix(d, n, i) == detail::class_fix_profile(d, n, i));
            }
}

TEST_CASE("cotangent class with few marks", "[divisors]") {
    DivClass psi = class_psi(1, 1, 1);
    DivClass want = bd(1, 1, Mask{1}, 1, Rat(1)) +
                    gen_class(1, 1, GenId::h(), Rat(-2));
    CHECK(psi == want);
}

TEST_CASE("cotangent class is independent of the auxiliary markings", "[divisors]") {
    for (int d = 0; d <= 2; ++d) {
        const int n = 4;
        for (int i = 1; i <= n; ++i) {
            DivClass ref = class_psi(d, n, i);
            for (int a = 1; a <= n; ++a)
                for (int b = 1; b <= n; ++b) {
                    if (a == b || a == i || b == i) continue;
                    CAPTURE(d, i, a, b);
                    CHECK(class_psi(d, n, i, a, b) == ref);
                }
        }
    }
}

TEST_CASE("cotangent class rejects bad auxiliaries", "[divisors]") {
    CHECK_THROWS_AS(class_psi(1, 3, 1, 1, 2), invalid_input);
    CHECK_THROWS_AS(class_psi(1, 3, 1, 2, 2), invalid_input);
    CHECK_THROWS_AS(class_psi(1, 3, 1, 2, 4), invalid_input);
}

TEST_CASE("periodic-point divisors", "[divisors]") {
    CHECK(class_per(2, 0, 1) == bd(2, 0, 0, 1, Rat(1)) + bd(2, 0, 0, 2, Rat(2)));
    // Raising the period only rescales by m d^{m-1}.
    CHECK(class_per(2, 0, 2) == Rat(4) * class_per(2, 0, 1));
    CHECK(class_per(3, 0, 3) == Rat(27) * class_per(3, 0, 1));
    CHECK_THROWS_AS(class_per(0, 2, 1), invalid_input);
    CHECK_THROWS_AS(class_per(2, 0, 0), invalid_input);
}

TEST_CASE("resultant divisor", "[divisors]") {
    CHECK(class_resultant(2, 0) == bd(2, 0, 0, 1, Rat(1)) + bd(2, 0, 0, 2, Rat(4)));
    CHECK(class_resultant(1, 1) == bd(1, 1, 0, 1, Rat(1)) + bd(1, 1, Mask{1}, 1, Rat(1)));
    CHECK(class_resultant(0, 2) == zero_class(0, 2));
}

TEST_CASE("named classes are basis supported", "[divisors]") {
    for (int d = 0; d <= 2; ++d)
        for (int n = 3; n <= 4; ++n)
            for (int i = 1; i <= n; ++i) {
                for (const auto& [g, x] : class_Hprime(d, n, i).c)
                    CHECK_FALSE(is_removed_generator(n, g));
                for (const auto& [g, x] : class_psi(d, n, i).c)
                    CHECK_FALSE(is_removed_generator(n, g));
                for (const auto& [g, x] : class_H(d, n, i, 2).c)
                    CHECK_FALSE(is_removed_generator(n, g));
            }
}

TEST_CASE("marking range is enforced", "[divisors]") {
    CHECK_THROWS_AS(class_Hprime(1, 1, 0), invalid_input);
    CHECK_THROWS_AS(class_Hprime(1, 1, 2), invalid_input);
    CHECK_THROWS_AS(class_psi(1, 0, 1), invalid_input);
    CHECK_THROWS_AS(class_fix(1, 2, 3), invalid_input);
}
