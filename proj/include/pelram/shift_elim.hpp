#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "pelram/error.hpp"
#include "pelram/program.hpp"

namespace pelram {

struct ShiftElimResult {
    Program program;
    // origin_start[i] is where instruction i of the source landed; the
    // final entry is one past the last emitted instruction.
    std::vector<std::size_t> origin_start;
    std::uint64_t scale_register = 0;
    std::uint64_t scratch_register = 0;
    std::uint64_t shadow_base = 0;
};

namespace sedetail {

inline bool reads_reg(const Operand& o, std::uint64_t r) {
    return o.kind == Operand::Kind::direct && o.reg == r;
}

// Flow-insensitive taint: registers whose value may depend on a right
// shift result. Shift amounts must stay untainted (the shadow simulation
// ignores right shifts, so tainted shadow values are wrong).
inline std::set<std::uint64_t> shr_tainted(const Program& p) {
    std::set<std::uint64_t> tainted;
    bool changed = true;
    auto op_tainted = [&](const Operand& o) {
        return o.kind == Operand::Kind::direct && tainted.count(o.reg) != 0;
    };
    while (changed) {
        changed = false;
        for (const auto& ins : p.instructions) {
            if (ins.dst.kind != Operand::Kind::direct) continue;
            bool taint = false;
            if (ins.op == Opcode::prim && ins.prim == PrimOp::shr)
                taint = true;
            else if (ins.op == Opcode::assign || ins.op == Opcode::prim)
                taint = op_tainted(ins.a) || op_tainted(ins.b);
            if (taint && !tainted.count(ins.dst.reg)) {
                tainted.insert(ins.dst.reg);
                changed = true;
            }
        }
    }
    return tainted;
}

}  // namespace sedetail

// Rewrites p into an equivalent program that never right-shifts. The
// simulating registers hold R'[i] = R[i] * R'[k+1], where R'[k+1] is a
// power-of-two scale; a shadow bank tracks native values so shift amounts
// stay correct. Requires direct addressing, no randomness, and operations
// within {+, -., <<, Bool}; shift amounts must not be derived from right
// shifts.
inline ShiftElimResult eliminate_right_shifts(const Program& p) {
    using namespace sedetail;

    if (p.uses_indirect)
        throw transform_inapplicable("program uses indirect addressing");
    if (!p.max_static_register)
        throw transform_inapplicable("register bound unknown");
    for (const auto& ins : p.instructions) {
        if (ins.op == Opcode::rand_pow2 || ins.op == Opcode::rand_gen)
            throw transform_inapplicable("randomized instructions cannot be duplicated");
        if (ins.op == Opcode::prim &&
            (ins.prim == PrimOp::mul || ins.prim == PrimOp::intdiv ||
             ins.prim == PrimOp::exactdiv))
            throw transform_inapplicable(
                "multiplicative operations do not commute with the scale");
    }

    bool any_shr = false;
    for (const auto& ins : p.instructions)
        if (ins.op == Opcode::prim && ins.prim == PrimOp::shr) any_shr = true;

    std::uint64_t k = *p.max_static_register;
    ShiftElimResult out;
    out.scale_register = k + 1;
    out.scratch_register = k + 2;
    out.shadow_base = k + 3;
    out.program.policy = p.policy;
    out.program.policy.shr = false;
    out.program.uses_indirect = false;

    auto& code = out.program.instructions;
    auto R = [](std::uint64_t r) { return Operand::direct(r); };

    if (!any_shr) {
        // Scale stays 1 forever; keep the program as-is behind the preamble.
        code.push_back({Opcode::assign, PrimOp::add, R(out.scale_register),
                        Operand::lit(true), {}, 0});
        out.origin_start.resize(p.instructions.size() + 1);
        for (std::size_t i = 0; i < p.instructions.size(); ++i)
            out.origin_start[i] = i + 1;
        out.origin_start[p.instructions.size()] = p.instructions.size() + 1;
        for (const auto& ins : p.instructions) {
            Instruction copy = ins;
            if (ins.op == Opcode::jump || ins.op == Opcode::branch_eq)
                copy.target = ins.target + 1;
            code.push_back(copy);
        }
        out.program.max_static_register = out.scale_register;
        return out;
    }

    auto tainted = shr_tainted(p);
    for (const auto& ins : p.instructions) {
        if (ins.op == Opcode::prim && ins.prim == PrimOp::shr &&
            ins.b.kind == Operand::Kind::direct && tainted.count(ins.b.reg))
            throw transform_inapplicable(
                "right shift amount is itself derived from a right shift");
    }

    const std::uint64_t scale = out.scale_register;
    const std::uint64_t scratch = out.scratch_register;
    const std::uint64_t sbase = out.shadow_base;

    // Scaled-space operand: an explicit 1 denotes the value 1, which is
    // the scale register in primed coordinates (shift amounts excepted).
    auto primed = [&](const Operand& o) {
        if (o.kind == Operand::Kind::lit1) return R(scale);
        return o;
    };
    auto shadow = [&](const Operand& o) {
        if (o.kind == Operand::Kind::direct) return R(sbase + o.reg);
        return o;
    };
    // Shift amounts come from the shadow bank: native values, literal 1
    // stays a literal.
    auto amount = shadow;

    auto block_len = [&](const Instruction& ins) -> std::size_t {
        switch (ins.op) {
            case Opcode::assign: return 2;
            case Opcode::prim:
                if (ins.prim == PrimOp::shr) return k + 4;
                if (ins.prim == PrimOp::bnot) return 4;
                return 2;
            case Opcode::jump:
            case Opcode::branch_eq:
            case Opcode::halt:
                return 1;
            case Opcode::halt_accept:
            case Opcode::halt_reject:
                return 2;
            default: return 1;
        }
    };

    out.origin_start.resize(p.instructions.size() + 1);
    std::size_t at = 2;  // preamble
    for (std::size_t i = 0; i < p.instructions.size(); ++i) {
        out.origin_start[i] = at;
        at += block_len(p.instructions[i]);
    }
    out.origin_start[p.instructions.size()] = at;

    auto emit = [&](Instruction ins) { code.push_back(ins); };
    auto emit_assign = [&](Operand dst, Operand src) {
        emit({Opcode::assign, PrimOp::add, dst, src, {}, 0});
    };
    auto emit_prim = [&](PrimOp op, Operand dst, Operand a, Operand b) {
        emit({Opcode::prim, op, dst, a, b, 0});
    };
    // Clears the sub-scale bits of dst: dst <= dst clr bnot(scale).
    auto emit_truncate = [&](Operand dst) {
        emit_prim(PrimOp::bnot, R(scratch), R(scale), {});
        emit_prim(PrimOp::clr, dst, dst, R(scratch));
    };

    emit_assign(R(scale), Operand::lit(true));
    emit_assign(R(sbase), R(0));  // shadow copy of the input register

    for (const auto& ins : p.instructions) {
        switch (ins.op) {
            case Opcode::assign:
                emit_assign(ins.dst, primed(ins.a));
                emit_assign(shadow(ins.dst), shadow(ins.a));
                break;
            case Opcode::prim:
                if (ins.prim == PrimOp::shr) {
                    emit_assign(ins.dst, primed(ins.a));
                    for (std::uint64_t x = 0; x <= k + 1; ++x) {
                        if (x == ins.dst.reg) continue;
                        emit_prim(PrimOp::shl, R(x), R(x), amount(ins.b));
                    }
                    emit_truncate(ins.dst);
                    // the shadow simulation ignores right shifts
                } else if (ins.prim == PrimOp::bnot) {
                    emit_prim(PrimOp::bnot, ins.dst, primed(ins.a), {});
                    emit_truncate(ins.dst);
                    emit_prim(PrimOp::bnot, shadow(ins.dst), shadow(ins.a), {});
                } else if (ins.prim == PrimOp::shl) {
                    emit_prim(PrimOp::shl, ins.dst, primed(ins.a), amount(ins.b));
                    emit_prim(PrimOp::shl, shadow(ins.dst), shadow(ins.a),
                              shadow(ins.b));
                } else {
                    emit_prim(ins.prim, ins.dst, primed(ins.a), primed(ins.b));
                    emit_prim(ins.prim, shadow(ins.dst), shadow(ins.a),
                              shadow(ins.b));
                }
                break;
            case Opcode::jump:
                emit({Opcode::jump, PrimOp::add, {}, {}, {},
                      out.origin_start[ins.target]});
                break;
            case Opcode::branch_eq:
                // Both sides carry the same scale, so scaled equality is
                // native equality.
                emit({Opcode::branch_eq, PrimOp::add, {}, primed(ins.a),
                      primed(ins.b), out.origin_start[ins.target]});
                break;
            case Opcode::halt:
                emit({Opcode::halt, PrimOp::add, {}, {}, {}, 0});
                break;
            case Opcode::halt_accept:
                emit_assign(R(0), R(scale));
                emit({Opcode::halt, PrimOp::add, {}, {}, {}, 0});
                break;
            case Opcode::halt_reject:
                emit_assign(R(0), Operand::lit(false));
                emit({Opcode::halt, PrimOp::add, {}, {}, {}, 0});
                break;
            default:
                break;
        }
    }

    out.program.max_static_register = sbase + k;
    return out;
}

}  // namespace pelram
