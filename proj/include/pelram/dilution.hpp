#pragma once

#include <cstdint>

#include "pelram/error.hpp"
#include "pelram/nat.hpp"
#include "pelram/random.hpp"
#include "pelram/wordmap.hpp"

namespace pelram {

// A candidate map domain together with its certified sparseness. The
// certificate holds for every random input; randomness only affects how
// many 1 bits survive, never their spacing.
struct SparseDomain {
    Nat domain;
    Nat w;
};

// Keeps the lowest bit of every run of 1s, then shifts down by one. Any
// two survivors come from distinct runs, hence sit at least two apart.
inline SparseDomain bootstrap_domain(const Nat& r0) {
    Nat kept = clr(r0, shl(r0, 1));
    return {shr(kept, 1), Nat(2)};
}

// One dilution round: reads the draw r as an oracle counter over each
// maximal exactly-w-spaced run of domain bits. A run survives when the
// counter starts at 0, increments by 1 per member and ends all-ones; the
// closing addition sends a carry across the verified stretch, so one bit
// at the run's end marker survives iff the whole run checked out. A full
// revolution of the counter spans w * 2^w positions, which certifies the
// new sparseness w' = w * 2^w + 1.
inline SparseDomain dilute_step(const SparseDomain& d, const Nat& r) {
    if (d.w > Nat(bit_ceiling()))
        throw resource_limit("dilution width exceeds bit ceiling");
    std::uint64_t w = d.w.to_u64();
    const Nat& I = d.domain;

    Nat i_begin = clr(I, shl(I, w));
    Nat i_end = clr(shl(I, w), I);
    Nat i_middle = monus(I, i_begin);

    Nat good_begin = meq(r & mask_of(i_begin, w), Nat(0), i_begin, w);
    Nat good_end =
        meq(shl(r, w) & mask_of(i_end, w), mask_of(i_end, w), i_end, w);
    Nat good_middle =
        meq(madd(shl(r, w) & mask_of(i_middle, w), i_middle, i_middle, w),
            r & mask_of(i_middle, w), i_middle, w);

    Nat w_next = shl(d.w, d.w) + Nat(1);
    Nat joined =
        (mask_of(good_begin + good_middle, w) + good_begin) & good_end;
    return {shr(joined, monus(w_next, Nat(1))), w_next};
}

// Dilutes until the certified sparseness reaches target_w. Draw order:
// one k-bit draw for the bootstrap, then one per round.
inline SparseDomain build_domain(const Nat& target_w, std::uint64_t k,
                                 RandomSource& rng) {
    if (target_w < Nat(2)) throw range_error("target sparseness below 2");
    SparseDomain d = bootstrap_domain(rng.draw_bits(k));
    while (d.w < target_w) d = dilute_step(d, rng.draw_bits(k));
    return d;
}

// Upper bound for W * (i+1) * 2^Z using shifts in place of products:
// each a*b becomes a << b. Expected to hit the bit ceiling at anything
// beyond toy parameters.
inline Nat choose_k(std::uint64_t i, const Nat& w_bound, const Nat& z_bound) {
    if (w_bound.is_zero() || z_bound.is_zero())
        throw range_error("bounds must be at least 1");
    return shl(shl(w_bound, Nat(i + 1)), z_bound);
}

}  // namespace pelram
