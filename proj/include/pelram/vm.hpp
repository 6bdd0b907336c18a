#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include "pelram/error.hpp"
#include "pelram/nat.hpp"
#include "pelram/program.hpp"
#include "pelram/random.hpp"

namespace pelram {

enum class Outcome { accepted, rejected, budget_exhausted, runtime_error };

inline const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::accepted: return "accepted";
        case Outcome::rejected: return "rejected";
        case Outcome::budget_exhausted: return "budget_exhausted";
        case Outcome::runtime_error: return "runtime_error";
    }
    return "?";
}

struct RunResult {
    Outcome outcome = Outcome::rejected;
    std::uint64_t steps_used = 0;
    Nat final_r0;
    std::string diagnostic;
};

// Sparse register file: reading a never-written register yields 0.
struct MachineState {
    std::map<Nat, Nat> registers;
    std::size_t pc = 0;
    std::uint64_t steps = 0;

    const Nat& get(const Nat& addr) const {
        static const Nat zero(0);
        auto it = registers.find(addr);
        return it == registers.end() ? zero : it->second;
    }
    void set(const Nat& addr, Nat v) { registers[addr] = std::move(v); }
};

// Called before each dispatch with the state and the pc about to execute.
using StepObserver = std::function<void(const MachineState&, std::size_t)>;

namespace vmdetail {

inline Nat load(const MachineState& st, const Operand& o) {
    switch (o.kind) {
        case Operand::Kind::lit0: return Nat(0);
        case Operand::Kind::lit1: return Nat(1);
        case Operand::Kind::direct: return st.get(Nat(o.reg));
        case Operand::Kind::indirect: return st.get(st.get(Nat(o.reg)));
    }
    return Nat(0);
}

inline void store(MachineState& st, const Operand& o, Nat v) {
    if (o.kind == Operand::Kind::direct)
        st.set(Nat(o.reg), std::move(v));
    else
        st.set(st.get(Nat(o.reg)), std::move(v));
}

}  // namespace vmdetail

// Executes from pc = 0 with R0 = input. Every dispatched instruction costs
// exactly one step; the budget is checked before each dispatch. Falling off
// the end of the program halts like an explicit `halt`.
inline RunResult run_traced(const Program& prog, const Nat& input,
                            std::uint64_t budget, RandomSource& rng,
                            const StepObserver& observer = {},
                            MachineState* final_state = nullptr) {
    using namespace vmdetail;
    MachineState st;
    st.set(Nat(0), input);

    auto finish = [&](Outcome oc, std::string diag = {}) {
        if (final_state) *final_state = st;
        return RunResult{oc, st.steps, st.get(Nat(0)), std::move(diag)};
    };

    try {
        for (;;) {
            if (st.pc >= prog.instructions.size())
                return finish(st.get(Nat(0)).is_zero() ? Outcome::rejected
                                                       : Outcome::accepted);
            if (st.steps == budget) return finish(Outcome::budget_exhausted);
            if (observer) observer(st, st.pc);

            const Instruction& ins = prog.instructions[st.pc];
            ++st.steps;
            switch (ins.op) {
                case Opcode::assign:
                    store(st, ins.dst, load(st, ins.a));
                    ++st.pc;
                    break;
                case Opcode::prim:
                    store(st, ins.dst,
                          eval_prim(ins.prim, load(st, ins.a), load(st, ins.b)));
                    ++st.pc;
                    break;
                case Opcode::rand_pow2: {
                    Nat k = load(st, ins.a);
                    if (k > Nat(bit_ceiling()))
                        throw resource_limit("rand2 width exceeds bit ceiling");
                    store(st, ins.dst, rng.draw_bits(k.to_u64()));
                    ++st.pc;
                    break;
                }
                case Opcode::rand_gen:
                    store(st, ins.dst, rand_general(load(st, ins.a), rng));
                    ++st.pc;
                    break;
                case Opcode::jump:
                    st.pc = ins.target;
                    break;
                case Opcode::branch_eq:
                    st.pc = load(st, ins.a) == load(st, ins.b) ? ins.target
                                                               : st.pc + 1;
                    break;
                case Opcode::halt:
                    return finish(st.get(Nat(0)).is_zero() ? Outcome::rejected
                                                           : Outcome::accepted);
                case Opcode::halt_accept:
                    st.set(Nat(0), Nat(1));
                    return finish(Outcome::accepted);
                case Opcode::halt_reject:
                    st.set(Nat(0), Nat(0));
                    return finish(Outcome::rejected);
            }
        }
    } catch (const error& e) {
        return finish(Outcome::runtime_error, e.what());
    }
}

inline RunResult run(const Program& prog, const Nat& input, std::uint64_t budget,
                     RandomSource& rng) {
    return run_traced(prog, input, budget, rng);
}

}  // namespace pelram
