#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "pelram/nat.hpp"
#include "pelram/tm.hpp"

namespace pelram {

// Straight-line program over the five description components using only
// bitwise Boolean operations and shifts by structural constants. Applied
// to packed vectors it advances every m-bit element independently, which
// is the property the tableau machinery leans on.
struct StepCircuit {
    enum class Op : std::uint8_t { band, bor, bxor, shl, shr };
    struct Node {
        Op op;
        std::uint32_t a;  // value ref: 0..4 inputs, 5+i = node i
        std::uint32_t b;  // value ref, or shift amount for shl/shr
    };

    std::vector<Node> nodes;
    std::array<std::uint32_t, 5> outputs{};  // (tape, head, state, one, es)
    std::uint32_t constant_shift_bound = 0;

    static constexpr std::uint32_t kTape = 0;
    static constexpr std::uint32_t kHead = 1;
    static constexpr std::uint32_t kState = 2;
    static constexpr std::uint32_t kOne = 3;
    static constexpr std::uint32_t kEs = 4;

    std::array<Nat, 5> eval(const std::array<Nat, 5>& in) const {
        std::vector<Nat> v(5 + nodes.size());
        for (std::size_t i = 0; i < 5; ++i) v[i] = in[i];
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const Node& n = nodes[i];
            switch (n.op) {
                case Op::band: v[5 + i] = v[n.a] & v[n.b]; break;
                case Op::bor: v[5 + i] = v[n.a] | v[n.b]; break;
                case Op::bxor: v[5 + i] = v[n.a] ^ v[n.b]; break;
                case Op::shl: v[5 + i] = shl(v[n.a], std::uint64_t{n.b}); break;
                case Op::shr: v[5 + i] = shr(v[n.a], std::uint64_t{n.b}); break;
            }
        }
        return {v[outputs[0]], v[outputs[1]], v[outputs[2]], v[outputs[3]],
                v[outputs[4]]};
    }

    InstDesc step(const InstDesc& id) const {
        auto out = eval({id.tape, id.head_pow, id.state_head, id.low_end,
                         id.high_end});
        return InstDesc{out[0], out[1], out[2], out[3], out[4]};
    }
};

// Builds the one-step circuit for a machine. Per (state, read) pair a
// masked indicator at the head position selects the transition; move and
// write effects are ORed together, which is carry-free because exactly
// one predicate fires per element. Flagged (overrun) descriptions pass
// through unchanged.
inline StepCircuit compile_step_circuit(const TmSpec& spec) {
    StepCircuit c;
    using Op = StepCircuit::Op;
    auto emit = [&](Op op, std::uint32_t a, std::uint32_t b) {
        c.nodes.push_back({op, a, b});
        return static_cast<std::uint32_t>(4 + c.nodes.size());
    };
    const std::uint32_t T = StepCircuit::kTape, H = StepCircuit::kHead,
                        S = StepCircuit::kState, ONE = StepCircuit::kOne,
                        ES = StepCircuit::kEs;
    const std::uint32_t cbits = spec.c;
    c.constant_shift_bound = std::max<std::uint32_t>(1, cbits - 1);

    // Indicators at the head bit: read value and each state bit.
    std::uint32_t rh1 = emit(Op::band, T, H);
    std::uint32_t rh0 = emit(Op::bxor, H, rh1);
    std::vector<std::uint32_t> sb(cbits), nsb(cbits);
    for (std::uint32_t b = 0; b < cbits; ++b) {
        std::uint32_t shifted = b == 0 ? S : emit(Op::shr, S, b);
        sb[b] = emit(Op::band, shifted, H);
        nsb[b] = emit(Op::bxor, H, sb[b]);
    }

    auto state_pred = [&](std::uint64_t q) {
        std::uint32_t acc = 0;
        bool first = true;
        for (std::uint32_t b = 0; b < cbits; ++b) {
            std::uint32_t term = ((q >> b) & 1) ? sb[b] : nsb[b];
            acc = first ? term : emit(Op::band, acc, term);
            first = false;
        }
        return acc;
    };

    std::optional<std::uint32_t> tape_flips, head_next, state_next;
    auto or_into = [&](std::optional<std::uint32_t>& acc, std::uint32_t t) {
        acc = acc ? emit(Op::bor, *acc, t) : t;
    };
    // moved is the head indicator after the move; place the next state's
    // bits above it.
    auto contribute = [&](std::uint32_t moved, std::uint64_t next_state) {
        or_into(head_next, moved);
        for (std::uint32_t b = 0; b < cbits; ++b)
            if ((next_state >> b) & 1)
                or_into(state_next, b == 0 ? moved : emit(Op::shl, moved, b));
    };

    for (std::uint32_t q = 0; q < spec.state_count; ++q) {
        std::uint32_t pq = state_pred(q);
        for (std::uint32_t r = 0; r < 2; ++r) {
            Transition tr = spec.effective(q, r == 1);
            std::uint32_t p = emit(Op::band, pq, r ? rh1 : rh0);
            if (tr.write != (r == 1)) or_into(tape_flips, p);
            switch (tr.move) {
                case Move::stay:
                    contribute(p, tr.next);
                    break;
                case Move::left: {
                    // at the closed end a left move stays put
                    std::uint32_t edge = emit(Op::band, p, ONE);
                    std::uint32_t inner = emit(Op::bxor, p, edge);
                    std::uint32_t moved =
                        emit(Op::bor, emit(Op::shr, inner, 1), edge);
                    contribute(moved, tr.next);
                    break;
                }
                case Move::right: {
                    std::uint32_t pr = emit(Op::shl, p, 1);
                    std::uint32_t over = emit(Op::band, pr, ES);
                    std::uint32_t ok = emit(Op::bxor, pr, over);
                    contribute(ok, tr.next);
                    // stepping past the end: stay put, raise the flag
                    contribute(emit(Op::shr, over, 1), spec.flag_state());
                    break;
                }
            }
        }
    }
    contribute(state_pred(spec.flag_state()), spec.flag_state());

    std::uint32_t t_out =
        tape_flips ? emit(Op::bxor, T, *tape_flips) : T;
    c.outputs = {t_out, *head_next, *state_next, ONE, ES};
    return c;
}

}  // namespace pelram
