#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>

#include "pelram/error.hpp"
#include "pelram/nat.hpp"
#include "pelram/step_circuit.hpp"
#include "pelram/tm.hpp"

namespace pelram {

// n elements of m bits each packed into one integer.
struct EncodedVector {
    std::uint64_t m = 0;
    Nat contents;
    std::uint64_t n = 0;

    Nat element(std::uint64_t i) const {
        return shr(contents, m * i) & monus(shl(Nat(1), m), Nat(1));
    }
};

// Execution history of a machine on a size-s tape: row i of (T, H, S) is
// the instantaneous description after i steps, in m = s+c-1 bit windows.
struct Tableau {
    std::uint64_t m = 0;
    std::uint64_t n = 0;
    std::uint64_t s = 0;
    Nat T, H, S;

    Nat row_window(const Nat& v, std::uint64_t i) const {
        return shr(v, m * i) & monus(shl(Nat(1), m), Nat(1));
    }

    InstDesc row(std::uint64_t i) const {
        return InstDesc{row_window(T, i), row_window(H, i), row_window(S, i),
                        Nat(1), shl(Nat(1), s)};
    }

    // The helper vector whose every element is 1.
    Nat ones() const {
        return exactdiv(monus(shl(Nat(1), m * n), Nat(1)),
                        monus(shl(Nat(1), m), Nat(1)));
    }
};

struct VerifyStatus {
    bool valid = false;
    std::optional<TmOutcome::Kind> terminal;
};

inline Tableau build_tableau(const TmSpec& spec, const Nat& inp, std::uint64_t s,
                             std::uint64_t n) {
    if (inp.bit_length() > s) throw range_error("input wider than the tape");
    if (n == 0) throw range_error("tableau needs at least one row");
    Tableau t;
    t.m = s + spec.c - 1;
    t.n = n;
    t.s = s;
    if (Nat(t.m) * Nat(n) > Nat(bit_ceiling()))
        throw resource_limit("tableau exceeds bit ceiling");
    InstDesc id = encode_id(spec, inp, 0, 0, s);
    for (std::uint64_t i = 0; i < n; ++i) {
        t.T = t.T | shl(id.tape, t.m * i);
        t.H = t.H | shl(id.head_pow, t.m * i);
        t.S = t.S | shl(id.state_head, t.m * i);
        if (i + 1 < n) id = tm_step_reference(spec, id);
    }
    return t;
}

inline TmOutcome::Kind classify_terminal(const InstDesc& last_row,
                                         const TmSpec& spec) {
    return classify_state(spec, decode_id(last_row).state);
}

// Checks the whole tableau wholesale: one circuit application plus the
// shifted-XOR identities. Valid iff row 0 starts from inp, every row is
// the step of its predecessor, and the helper vector is well formed.
inline VerifyStatus verify_tableau(const Tableau& t, const TmSpec& spec,
                                   const Nat& inp, const StepCircuit& circuit) {
    if (t.m != t.s + spec.c - 1) return {};
    std::uint64_t nm = t.m * t.n;
    if (t.T.bit_length() > nm || t.H.bit_length() > nm || t.S.bit_length() > nm)
        return {};
    if (inp.bit_length() > t.s) return {};

    Nat I = t.ones();
    Nat Is = shl(I, t.s);
    auto out = circuit.eval({t.T, t.H, t.S, I, Is});
    Nat mask = monus(shl(Nat(1), nm), Nat(1));

    bool valid = ((shl(out[0], t.m) ^ t.T) & mask) == inp &&
                 ((shl(out[1], t.m) ^ t.H) & mask) == Nat(1) &&
                 ((shl(out[2], t.m) ^ t.S) & mask) == Nat(0) &&
                 (shl(I, t.m) ^ I) == shl(Nat(1), nm) + Nat(1) &&
                 Is == shl(I, t.s);
    if (!valid) return {};
    return {true, classify_terminal(t.row(t.n - 1), spec)};
}

inline VerifyStatus verify_tableau(const Tableau& t, const TmSpec& spec,
                                   const Nat& inp) {
    return verify_tableau(t, spec, inp, compile_step_circuit(spec));
}

// Flips one bit of the concatenated (T, H, S) bit space; bit indices in
// [0, nm) land in T, [nm, 2nm) in H, [2nm, 3nm) in S.
inline void tableau_flip_bit(Tableau& t, std::uint64_t bit) {
    std::uint64_t nm = t.m * t.n;
    if (bit >= 3 * nm) throw range_error("bit index outside the tableau");
    Nat* field = bit < nm ? &t.T : bit < 2 * nm ? &t.H : &t.S;
    *field = *field ^ shl(Nat(1), bit % nm);
}

// Reverses the element order of each vector. Reversed tableaux anchor the
// initial description at the top row instead of row 0.
inline Tableau reverse_rows(const Tableau& t) {
    Tableau r = t;
    r.T = Nat(0);
    r.H = Nat(0);
    r.S = Nat(0);
    for (std::uint64_t i = 0; i < t.n; ++i) {
        std::uint64_t j = t.n - 1 - i;
        r.T = r.T | shl(t.row_window(t.T, i), r.m * j);
        r.H = r.H | shl(t.row_window(t.H, i), r.m * j);
        r.S = r.S | shl(t.row_window(t.S, i), r.m * j);
    }
    return r;
}

// Single-line dump: "m n s lenT:hexT lenH:hexH lenS:hexS".
inline std::string tableau_dump(const Tableau& t) {
    auto blob = [](const Nat& v) {
        std::string h = v.to_hex();
        return std::to_string(h.size()) + ":" + h;
    };
    std::ostringstream os;
    os << t.m << " " << t.n << " " << t.s << " " << blob(t.T) << " " << blob(t.H)
       << " " << blob(t.S);
    return os.str();
}

inline Tableau tableau_restore(const std::string& text) {
    std::istringstream is(text);
    Tableau t;
    if (!(is >> t.m >> t.n >> t.s)) throw shape_error("bad tableau dump header");
    auto blob = [&]() {
        std::string tok;
        if (!(is >> tok)) throw shape_error("truncated tableau dump");
        auto colon = tok.find(':');
        if (colon == std::string::npos) throw shape_error("missing length prefix");
        std::size_t len = std::stoull(tok.substr(0, colon));
        std::string hex = tok.substr(colon + 1);
        if (hex.size() != len) throw shape_error("length prefix mismatch");
        return Nat::from_hex(hex);
    };
    t.T = blob();
    t.H = blob();
    t.S = blob();
    if (t.m == 0 || t.n == 0) throw shape_error("degenerate tableau dump");
    return t;
}

}  // namespace pelram
