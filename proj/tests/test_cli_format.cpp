#include "selfmap/cache.hpp"
#include "selfmap/serialize.hpp"
#include "selfmap/sha256.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <string>

using namespace selfmap;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name)
        : path(std::string("cli_format_") + name + ".tmp") {
        std::remove(path.c_str());
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("rational text forms", "[cli]") {
    CHECK(rat_canonical(Rat(3)) == "3/1");
    CHECK(rat_canonical(Rat(-1, 4)) == "-1/4");
    CHECK(rat_canonical(Rat(2, 4)) == "1/2");
    CHECK(rat_human(Rat(3)) == "3");
    CHECK(rat_human(Rat(-1, 4)) == "-1/4");
    CHECK(rat_parse("7") == Rat(7));
    CHECK(rat_parse("-3/9") == Rat(-1, 3));
    CHECK_THROWS_AS(rat_parse("1/0"), invalid_input);
    CHECK_THROWS_AS(rat_parse("x"), invalid_input);
    CHECK_THROWS_AS(rat_parse("1/-2"), invalid_input);
    CHECK_THROWS_AS(rat_parse(""), invalid_input);
}

TEST_CASE("generator keys round trip", "[cli]") {
    CHECK(gen_key(GenId::h()) == "H");
    CHECK(gen_key(GenId::g()) == "G");
    CHECK(gen_key(GenId::boundary(0, 2)) == "D|B=|k=2");
    CHECK(gen_key(GenId::boundary(Mask{0b101}, 1)) == "D|B=1,3|k=1");
    for (const GenId& g : generators(2, 3)) CHECK(parse_gen_key(gen_key(g)) == g);
    CHECK(parse_gen_key("D|B=2,5|k=0") == GenId::boundary(Mask{0b10010}, 0));
    CHECK_THROWS_AS(parse_gen_key("X"), invalid_input);
    CHECK_THROWS_AS(parse_gen_key("D|B=2,2|k=0"), invalid_input);  // not increasing
    CHECK_THROWS_AS(parse_gen_key("D|B=3,1|k=0"), invalid_input);
    CHECK_THROWS_AS(parse_gen_key("D|B=1,2"), invalid_input);      // missing degree
    CHECK_THROWS_AS(parse_gen_key("D|B=0|k=1"), invalid_input);    // markings start at 1
}

TEST_CASE("class expressions round trip", "[cli]") {
    DivClass cls = gen_class(1, 2, GenId::h(), Rat(-1, 4)) +
                   gen_class(1, 2, GenId::boundary(Mask{0b11}, 0), Rat(3));
    std::string s = class_to_string(cls);
    CHECK(s == "3/1*D|B=1,2|k=0+-1/4*H");
    CHECK(parse_class(1, 2, s) == cls);
    CHECK(class_to_string(zero_class(1, 2)) == "0");
    CHECK(parse_class(1, 2, "0") == zero_class(1, 2));
    // Bare keys carry coefficient one; repeated keys accumulate.
    CHECK(parse_class(1, 2, "H+H") == gen_class(1, 2, GenId::h(), Rat(2)));
    CHECK(parse_class(1, 2, "H+-1*H") == zero_class(1, 2));
    CHECK_THROWS_AS(parse_class(1, 2, ""), invalid_input);
    CHECK_THROWS_AS(parse_class(1, 2, "G"), invalid_input);  // G needs degree zero
    CHECK_THROWS_AS(parse_class(1, 2, "D|B=3|k=1"), invalid_input);  // marking range
}

TEST_CASE("weight lists round trip", "[cli]") {
    WeightTuple wt{2, {Rat(1, 4), Rat(1, 2)}};
    CHECK(weights_to_string(wt) == "1/4,1/2");
    CHECK(parse_weight_list("1/4,1/2") == wt.w);
    CHECK(parse_weight_list("").empty());
    CHECK_THROWS_AS(parse_weight_list("1,,2"), invalid_input);
}

TEST_CASE("canonical queries sort their factors", "[cli]") {
    WeightTuple wt{1, {Rat(1)}};
    DivClass a = gen_class(1, 1, GenId::h());
    DivClass b = gen_class(1, 1, GenId::boundary(0, 1));
    std::string q1 = canonical_query(wt, {a, b});
    std::string q2 = canonical_query(wt, {b, a});
    CHECK(q1 == q2);
    CHECK(q1 == "intersect d=1 w=1/1 factors=1/1*D|B=|k=1;1/1*H");

    auto [wt2, factors] = parse_query(q1);
    CHECK(weights_canonical(wt2) == weights_canonical(wt));
    REQUIRE(factors.size() == 2u);
    CHECK(canonical_query(wt2, factors) == q1);

    CHECK(canonical_query(WeightTuple{2, {}}, {}) == "intersect d=2 w= factors=");
}

TEST_CASE("query parsing rejects malformed lines", "[cli]") {
    CHECK_THROWS_AS(parse_query("intersect d=1 w=1/1"), invalid_input);
    CHECK_THROWS_AS(parse_query("lookup d=1 w=1/1 factors=H"), invalid_input);
    CHECK_THROWS_AS(parse_query("intersect d=x w=1/1 factors=H"), invalid_input);
    CHECK_THROWS_AS(parse_query("intersect d=1 w=-1 factors=H"), invalid_input);
    CHECK_THROWS_AS(parse_query("intersect d=1 w=1/1 factors=Q"), invalid_input);
}

TEST_CASE("message digest agrees with published vectors", "[cli]") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("result cache stores and reloads", "[cli]") {
    TempFile tmp("roundtrip");
    std::string q = "intersect d=1 w=1/1 factors=1/1*H";
    {
        ResultCache cache(tmp.path);
        CHECK(cache.size() == 0u);
        CHECK_FALSE(cache.lookup(q).has_value());
        cache.store(q, Rat(-1, 4));
        cache.store(q, Rat(-1, 4));  // idempotent
        CHECK(cache.size() == 1u);
        auto hit = cache.lookup(q);
        REQUIRE(hit.has_value());
        CHECK(*hit == Rat(-1, 4));
        CHECK(cache.hits() == 1u);
    }
    ResultCache reloaded(tmp.path);
    CHECK(reloaded.size() == 1u);
    CHECK_FALSE(reloaded.rebuilt_on_load());
    auto hit = reloaded.lookup(q);
    REQUIRE(hit.has_value());
    CHECK(*hit == Rat(-1, 4));
}

TEST_CASE("result cache rebuilds a damaged file", "[cli]") {
    TempFile tmp("rebuild");
    std::string good_q = "intersect d=2 w= factors=1/1*D|B=|k=1;1/1*D|B=|k=1";
    {
        std::ofstream out(tmp.path);
        out << sha256_hex(good_q) << '\t' << good_q << "\t1/1\n";
        out << "deadbeef\tintersect d=1 w= factors=\t1/1\n";  // wrong hash
        out << "not a record at all\n";
        out << sha256_hex("x") << "\tx\tnot-a-number\n";
    }
    ResultCache cache(tmp.path);
    CHECK(cache.rebuilt_on_load());
    CHECK(cache.size() == 1u);
    REQUIRE(cache.lookup(good_q).has_value());
    CHECK(*cache.lookup(good_q) == Rat(1));
    // The rewritten file now loads cleanly.
    ResultCache again(tmp.path);
    CHECK_FALSE(again.rebuilt_on_load());
    CHECK(again.size() == 1u);
}

TEST_CASE("result cache keeps the first of two conflicting records", "[cli]") {
    TempFile tmp("conflict");
    std::string q = "intersect d=1 w=1/1 factors=1/1*H";
    {
        std::ofstream out(tmp.path);
        out << sha256_hex(q) << '\t' << q << "\t-1/4\n";
        out << sha256_hex(q) << '\t' << q << "\t7/1\n";
    }
    ResultCache cache(tmp.path);
    CHECK(cache.rebuilt_on_load());
    CHECK(cache.size() == 1u);
    CHECK(*cache.lookup(q) == Rat(-1, 4));
}
