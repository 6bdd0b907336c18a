#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "pelram/nat.hpp"

using namespace pelram;

TEST_CASE("bit_length") {
    CHECK(Nat(0).bit_length() == 0);
    CHECK(Nat(1).bit_length() == 1);
    CHECK(Nat(5).bit_length() == 3);
    CHECK(Nat(8).bit_length() == 4);
}

TEST_CASE("bnot flips up to the most significant one") {
    CHECK(bnot(Nat(0)) == Nat(0));
    CHECK(bnot(Nat(5)) == Nat(2));   // 101 -> 010
    CHECK(bnot(Nat(8)) == Nat(7));   // 1000 -> 0111
    CHECK(bnot(Nat(1)) == Nat(0));
}

TEST_CASE("set_fill is the smallest all-ones cover") {
    CHECK(set_fill(Nat(0)) == Nat(0));
    CHECK(set_fill(Nat(5)) == Nat(7));
    CHECK(set_fill(Nat(8)) == Nat(15));
    CHECK(set_fill(Nat(7)) == Nat(7));
}

TEST_CASE("fill identity a + bnot(a) == set_fill(a)") {
    std::mt19937_64 rng(41);
    for (int i = 0; i < 2000; ++i) {
        Nat a(rng() >> (rng() % 64));
        CHECK(a + bnot(a) == set_fill(a));
    }
    CHECK(Nat(0) + bnot(Nat(0)) == set_fill(Nat(0)));
}

TEST_CASE("monus clamps at zero") {
    CHECK(monus(Nat(7), Nat(3)) == Nat(4));
    CHECK(monus(Nat(3), Nat(7)) == Nat(0));
    CHECK(monus(Nat(3), Nat(3)) == Nat(0));
}

TEST_CASE("synthesized monus example") {
    CHECK(monus_synth(Nat(12), Nat(5)) == Nat(7));
}

TEST_CASE("synthesized monus matches native on a sample") {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 5000; ++i) {
        Nat a(rng() % 100000), b(rng() % 100000);
        CHECK(monus_synth(a, b) == monus(a, b));
    }
}

TEST_CASE("le_synth basics") {
    CHECK(le_synth(Nat(3), Nat(3)));
    CHECK_FALSE(le_synth(Nat(4), Nat(3)));
    CHECK(le_synth(Nat(0), Nat(0)));
    CHECK(le_synth(Nat(0), Nat(9)));
    CHECK_FALSE(le_synth(Nat(9), Nat(0)));
}

TEST_CASE("le_synth matches <= on a sample") {
    std::mt19937_64 rng(43);
    for (int i = 0; i < 5000; ++i) {
        Nat a(rng() % 100000), b(rng() % 100000);
        CHECK(le_synth(a, b) == (a <= b));
    }
}

TEST_CASE("clr semantics") {
    CHECK(clr(Nat(0b1111), Nat(0b0101)) == Nat(0b1010));
    CHECK(clr(Nat(123456), Nat(0)) == Nat(123456));
    CHECK(clr(Nat(0b110110), Nat(0b1101100)) == Nat(0b0010010));
}

TEST_CASE("clr properties") {
    std::mt19937_64 rng(44);
    for (int i = 0; i < 2000; ++i) {
        Nat a(rng()), b(rng());
        Nat c = clr(a, b);
        CHECK((c & b) == Nat(0));
        CHECK((c | (a & b)) == a);
        // must equal a AND bnot(b | mask) for any single-bit mask above a
        Nat cover = shl(Nat(1), a.bit_length());
        CHECK((a & bnot(b | cover)) == c);
        Nat cover2 = shl(Nat(1), a.bit_length() + 7);
        CHECK((a & bnot(b | cover2)) == c);
    }
}

TEST_CASE("eval_prim semantics") {
    CHECK(eval_prim(PrimOp::shl, Nat(3), Nat(4)) == Nat(48));
    CHECK(eval_prim(PrimOp::shr, Nat(48), Nat(4)) == Nat(3));
    CHECK(eval_prim(PrimOp::exactdiv, Nat(48), Nat(16)) == Nat(3));
    CHECK(eval_prim(PrimOp::intdiv, Nat(7), Nat(2)) == Nat(3));
    CHECK(eval_prim(PrimOp::add, Nat(7), Nat(2)) == Nat(9));
    CHECK(eval_prim(PrimOp::mul, Nat(7), Nat(2)) == Nat(14));
    CHECK(eval_prim(PrimOp::band, Nat(6), Nat(3)) == Nat(2));
    CHECK(eval_prim(PrimOp::bor, Nat(6), Nat(3)) == Nat(7));
    CHECK(eval_prim(PrimOp::bxor, Nat(6), Nat(3)) == Nat(5));
    CHECK(eval_prim(PrimOp::bnot, Nat(5), Nat(0)) == Nat(2));
    CHECK(eval_prim(PrimOp::monus, Nat(2), Nat(5)) == Nat(0));
}

TEST_CASE("division errors") {
    CHECK_THROWS_AS(exactdiv(Nat(5), Nat(2)), inexact_division);
    CHECK_THROWS_AS(exactdiv(Nat(5), Nat(0)), division_by_zero);
    CHECK_THROWS_AS(intdiv(Nat(5), Nat(0)), division_by_zero);
    CHECK_THROWS_AS(mod(Nat(5), Nat(0)), division_by_zero);
}

TEST_CASE("bit ceiling guards growth") {
    bit_ceiling_guard guard(1024);
    CHECK_THROWS_AS(shl(Nat(1), Nat(4000)), resource_limit);
    CHECK_THROWS_AS(shl(Nat(1), std::uint64_t{4000}), resource_limit);
    Nat big = shl(Nat(1), std::uint64_t{1000});
    CHECK_THROWS_AS(big * big, resource_limit);
    CHECK_THROWS_AS(pow_checked(Nat(2), Nat(100000)), resource_limit);
    // shr never grows
    CHECK(shr(Nat(5), Nat(1) + Nat(1) + Nat(70)) == Nat(0));
}

TEST_CASE("pow_checked small cases") {
    CHECK(pow_checked(Nat(2), Nat(10)) == Nat(1024));
    CHECK(pow_checked(Nat(3), Nat(3)) == Nat(27));
    CHECK(pow_checked(Nat(7), Nat(0)) == Nat(1));
    CHECK(pow_checked(Nat(0), Nat(7)) == Nat(0));
    CHECK(pow_checked(Nat(1), Nat(7)) == Nat(1));
}

TEST_CASE("hex round trip") {
    Nat a = Nat::from_hex("deadbeef");
    CHECK(a == Nat(0xdeadbeefULL));
    CHECK(Nat::from_hex(a.to_hex()) == a);
    CHECK(Nat(0).to_hex() == "0");
}
