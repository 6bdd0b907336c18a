#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "pelram/error.hpp"
#include "pelram/nat.hpp"
#include "pelram/step_circuit.hpp"
#include "pelram/tableau.hpp"
#include "pelram/tm.hpp"

namespace pelram {

// Sparse-domain container: w-bit elements living at the 1-bit positions
// of the domain I. Domain bits must be at least w positions apart and the
// contents must stay inside the element windows.
struct WordMap {
    Nat L;  // contents
    Nat I;  // domain
    std::uint64_t w = 0;
};

// Any two 1 bits of I at least w positions apart?
inline bool is_sparse(const Nat& I, const Nat& w) {
    auto words = to_words(I);
    std::optional<std::uint64_t> last;
    for (std::size_t wi = 0; wi < words.size(); ++wi) {
        std::uint64_t x = words[wi];
        while (x) {
            std::uint64_t b = wi * 64 + static_cast<std::uint64_t>(std::countr_zero(x));
            x &= x - 1;
            if (last && Nat(b - *last) < w) return false;
            last = b;
        }
    }
    return true;
}

// MASK(I, w): all bits of every element window.
inline Nat mask_of(const Nat& I, std::uint64_t w) {
    return monus(shl(I, w), I);
}

// Window position masks: the top bit of each element is its flag, the
// w-1 bits below are its data.
inline Nat flags_mask(const Nat& I, std::uint64_t w) { return shl(I, w - 1); }
inline Nat data_mask(const Nat& I, std::uint64_t w) {
    return monus(flags_mask(I, w), I);
}

struct FlagsData {
    Nat flags;
    Nat data;
};

inline FlagsData flags_data(const Nat& V, const Nat& I, std::uint64_t w) {
    return {V & flags_mask(I, w), V & data_mask(I, w)};
}

// Elementwise (v + u) mod 2^w. Data bits are summed as integers (their
// carries stay inside each window); flag bits are folded in by XOR.
inline Nat madd(const Nat& V, const Nat& U, const Nat& I, std::uint64_t w) {
    auto fv = flags_data(V, I, w);
    auto fu = flags_data(U, I, w);
    return (fv.data + fu.data) ^ fv.flags ^ fu.flags;
}

// Indicator of v + u >= 2^w, one bit per domain position.
inline Nat mcarry(const Nat& V, const Nat& U, const Nat& I, std::uint64_t w) {
    return shr(monus(V + U, madd(V, U, I, w)), w);
}

// Elementwise (2^w - 1) - v.
inline Nat mneg(const Nat& V, const Nat& I, std::uint64_t w) {
    return monus(mask_of(I, w), V);
}

// Indicator of v > u.
inline Nat mgt(const Nat& V, const Nat& U, const Nat& I, std::uint64_t w) {
    return mcarry(V, mneg(U, I, w), I, w);
}

// Indicator of v == u.
inline Nat meq(const Nat& V, const Nat& U, const Nat& I, std::uint64_t w) {
    return monus(monus(I, mgt(V, U, I, w)), mgt(U, V, I, w));
}

// I * inp by shift-and-add; one loop pass per input bit.
inline Nat scale_domain(const Nat& I, const Nat& inp) {
    Nat in(0);
    Nat acc = I;
    Nat r = inp;
    while (!r.is_zero()) {
        if ((r & Nat(1)) == Nat(1)) in = in + acc;
        r = shr(r, 1);
        acc = shl(acc, 1);
    }
    return in;
}

// Decodes a map into (index, element) pairs.
inline std::vector<std::pair<std::uint64_t, Nat>> map_elements(const Nat& L,
                                                               const Nat& I,
                                                               std::uint64_t w) {
    std::vector<std::pair<std::uint64_t, Nat>> out;
    Nat window = monus(shl(Nat(1), w), Nat(1));
    for (std::uint64_t ind : set_bits(I))
        out.emplace_back(ind, shr(L, ind) & window);
    return out;
}

enum class Verdict {
    accepts,
    rejects,
    needs_more_tape,
    rejects_by_looping,
    simulation_failed,
};

inline const char* verdict_text(Verdict v) {
    switch (v) {
        case Verdict::accepts: return "T accepts";
        case Verdict::rejects: return "T rejects";
        case Verdict::needs_more_tape: return "T requires more tape";
        case Verdict::rejects_by_looping: return "T rejects by entering an infinite loop";
        case Verdict::simulation_failed: return "Simulation failed. No valid tableau found";
    }
    return "?";
}

// Widths of the packed-tableau map for tape size s: vector width w,
// per-vector bit-length w_m = w * 2^{3w}, element width 4 * w_m.
struct MapShape {
    std::uint64_t w = 0;
    std::uint64_t w_m = 0;
    std::uint64_t elem_w = 0;
};

inline MapShape map_shape(const TmSpec& spec, std::uint64_t s) {
    MapShape sh;
    sh.w = s + spec.c - 1;
    Nat wm = shl(Nat(sh.w), 3 * sh.w);
    if (wm > Nat(bit_ceiling() >> 2))
        throw resource_limit("tableau map width exceeds bit ceiling");
    sh.w_m = wm.to_u64();
    sh.elem_w = sh.w_m * 4;
    return sh;
}

// Packs one tableau (with n = 2^{3w} rows) into the composite element
// (T << 3w_m) + (H << 2w_m) + (S << w_m) + I.
inline Nat pack_tableau_element(const Tableau& t) {
    std::uint64_t wm = t.m * t.n;
    return shl(t.T, 3 * wm) + shl(t.H, 2 * wm) + shl(t.S, wm) + t.ones();
}

namespace wmdetail {

// q * H for a per-spec constant q, as OR of shifted head indicators.
inline Nat mul_state_const(const Nat& H, std::uint64_t q) {
    Nat out(0);
    for (std::uint64_t b = 0; b < 64 && (q >> b); ++b)
        if ((q >> b) & 1) out = out | shl(H, b);
    return out;
}

struct VariantResults {
    Nat valid;
    Nat accepting;
    Nat rejecting;
    Nat exceeded;
};

inline Verdict pick_verdict(const VariantResults& r, const Nat& I,
                            std::uint64_t elem_w) {
    Nat zero(0);
    if (!meq(r.accepting, zero, I, elem_w).is_zero()) return Verdict::accepts;
    if (!meq(r.rejecting, zero, I, elem_w).is_zero()) return Verdict::rejects;
    if (!meq(r.exceeded, zero, I, elem_w).is_zero()) return Verdict::needs_more_tape;
    if (!meq(r.valid, zero, I, elem_w).is_zero()) return Verdict::rejects_by_looping;
    return Verdict::simulation_failed;
}

}  // namespace wmdetail

// Simultaneous verification of all tableau candidates held in the map
// (L, I, 4*w_m). Every element packs (T, H, S, I) vectors of 2^{3w} rows;
// one circuit application steps all of them, and the shifted-XOR
// identities check validity per element with the scalar constants scaled
// onto the domain (1 -> I, inp -> I * inp).
inline Verdict verify_parallel(const Nat& L, const Nat& I, std::uint64_t s,
                               const Nat& inp, const TmSpec& spec,
                               const StepCircuit& circuit) {
    using namespace wmdetail;
    MapShape sh = map_shape(spec, s);
    if (!is_sparse(I, Nat(sh.elem_w)))
        throw shape_error("domain is not sparse enough for the tableau map");
    if ((L & mask_of(I, sh.elem_w)) != L)
        throw shape_error("map contents leak outside element windows");
    if (inp.bit_length() > s) throw shape_error("input wider than the tape");

    Nat maskm = mask_of(I, sh.w_m);
    Nat T = shr(L, 3 * sh.w_m) & maskm;
    Nat H = shr(L, 2 * sh.w_m) & maskm;
    Nat S = shr(L, sh.w_m) & maskm;
    Nat Iv = L & maskm;
    Nat IN = scale_domain(I, inp);
    Nat Is = shl(Iv, s);

    auto out = circuit.eval({T, H, S, Iv, Is});

    Nat rT = ((shl(out[0], sh.w) ^ T) & maskm) ^ IN;
    Nat rH = ((shl(out[1], sh.w) ^ H) & maskm) ^ I;
    Nat rS = (shl(out[2], sh.w) ^ S) & maskm;
    Nat eI = (shl(Iv, sh.w) ^ Iv) ^ (shl(I, sh.w_m) + I);

    VariantResults r;
    r.valid = rT | rH | rS | eI;

    Nat masko = mask_of(I, sh.w);
    Nat lastH = shr(H, sh.w_m - sh.w) & masko;
    Nat lastS = shr(S, sh.w_m - sh.w) & masko;
    r.accepting = r.valid | (lastS ^ mul_state_const(lastH, spec.accept_state));
    r.rejecting = r.valid | (lastS ^ mul_state_const(lastH, spec.reject_state));
    r.exceeded = r.valid | (lastS ^ mul_state_const(lastH, spec.flag_state()));
    return pick_verdict(r, I, sh.elem_w);
}

inline Verdict verify_parallel(const Nat& L, const Nat& I, std::uint64_t s,
                               const Nat& inp, const TmSpec& spec) {
    return verify_parallel(L, I, s, inp, spec, compile_step_circuit(spec));
}

// Variant for element-wise reversed tableaux: the initial description is
// anchored at the top row, so the chain runs downward and the final
// description sits in row 0. The initial tape check is not performed
// here; callers must pin the top w bits of every element to the input
// when generating the map.
inline Verdict verify_parallel_reversed(const Nat& L, const Nat& I,
                                        std::uint64_t s, const TmSpec& spec,
                                        const StepCircuit& circuit) {
    using namespace wmdetail;
    MapShape sh = map_shape(spec, s);
    if (!is_sparse(I, Nat(sh.elem_w)))
        throw shape_error("domain is not sparse enough for the tableau map");
    if ((L & mask_of(I, sh.elem_w)) != L)
        throw shape_error("map contents leak outside element windows");

    Nat maskm = mask_of(I, sh.w_m);
    Nat T = shr(L, 3 * sh.w_m) & maskm;
    Nat H = shr(L, 2 * sh.w_m) & maskm;
    Nat S = shr(L, sh.w_m) & maskm;
    Nat Iv = L & maskm;
    Nat Is = shl(Iv, s);

    auto out = circuit.eval({T, H, S, Iv, Is});

    Nat midmask = mask_of(shl(I, sh.w), sh.w_m - sh.w);
    Nat rT = (shl(T, sh.w) ^ out[0]) & midmask;
    Nat rH = (shl(H, sh.w) ^ out[1]) & midmask;
    Nat rS = (shl(S, sh.w) ^ out[2]) & midmask;
    Nat eI = (shl(Iv, sh.w) ^ Iv) ^ (shl(I, sh.w_m) + I);

    Nat masko = mask_of(I, sh.w);
    Nat topH = (shr(H, sh.w_m - sh.w) & masko) ^ I;  // H at the initial row is 1
    Nat topS = shr(S, sh.w_m - sh.w) & masko;        // S at the initial row is 0

    VariantResults r;
    r.valid = rT | rH | rS | eI | topH | topS;

    Nat lastH = H & masko;
    Nat lastS = S & masko;
    r.accepting = r.valid | (lastS ^ mul_state_const(lastH, spec.accept_state));
    r.rejecting = r.valid | (lastS ^ mul_state_const(lastH, spec.reject_state));
    r.exceeded = r.valid | (lastS ^ mul_state_const(lastH, spec.flag_state()));
    return pick_verdict(r, I, sh.elem_w);
}

inline Verdict verify_parallel_reversed(const Nat& L, const Nat& I,
                                        std::uint64_t s, const TmSpec& spec) {
    return verify_parallel_reversed(L, I, s, spec, compile_step_circuit(spec));
}

}  // namespace pelram
