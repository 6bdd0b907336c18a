#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pelram/dilution.hpp"
#include "pelram/error.hpp"
#include "pelram/nat.hpp"
#include "pelram/program.hpp"
#include "pelram/random.hpp"
#include "pelram/tableau.hpp"
#include "pelram/vm.hpp"
#include "pelram/wordmap.hpp"

namespace pelram {

// Iterated exponentiation of the given height: tetrate(b, 1) = b,
// tetrate(b, h+1) = b^tetrate(b, h).
inline Nat tetrate(const Nat& base, std::uint64_t height) {
    if (height == 0) throw range_error("tetration height must be at least 1");
    Nat acc = base;
    for (std::uint64_t i = 1; i < height; ++i) acc = pow_checked(base, acc);
    return acc;
}

// Knobs for the simulation driver. The honest parameter choices from the
// analysis (k from choose_k, dilution certified all the way to the map
// width) overrun any realistic bit ceiling immediately, so experiments
// supply an explicit draw width and optionally cap the dilution target;
// the domain is then validated for real before use, which keeps the
// no-false-accept guarantee intact.
struct SimLimits {
    std::uint64_t max_iterations = 2;
    std::uint64_t k_bits = 0;   // 0: derive via choose_k (expect resource_limit)
    Nat dilution_target_cap;    // 0: dilute to the full map width
    bool use_input_verify = false;  // reversed-tableau generation route
    std::uint64_t max_tableau_rows = std::uint64_t{1} << 12;
};

struct SimReport {
    Outcome outcome = Outcome::rejected;
    std::string diagnostic;
    std::uint64_t iterations = 0;
    std::optional<Verdict> last_verdict;
    // driver work proxy: tetration passes + dilution rounds + input bits
    std::uint64_t unit_steps = 0;
};

// Verifies the input without multiplication: filters random draws down to
// elements that are exact repeating-unit patterns and exact counters, then
// masks away every counter field whose top w bits differ from inp. The
// returned map holds exactly the map_w-bit strings with top-w bits equal
// to inp (all of them, when any source element survived).
inline WordMap input_verify(const Nat& Ix, const Nat& wx, std::uint64_t map_w,
                            const Nat& inp, std::uint64_t w, RandomSource& rng) {
    if (w == 0 || w > map_w)
        throw shape_error("need 0 < w <= map width");
    if (inp.bit_length() > w) throw shape_error("input wider than w bits");

    Nat ew_n = shl(Nat(1), map_w);  // elementwidth, a known power of two
    Nat width_n = shl(ew_n, ew_n);  // counter block: elementwidth * 2^elementwidth
    if (width_n > Nat(bit_ceiling()))
        throw resource_limit("counter block exceeds bit ceiling");
    std::uint64_t ew = ew_n.to_u64();
    std::uint64_t width = width_n.to_u64();
    if (wx <= width_n + ew_n)
        throw shape_error("domain certificate too small for the counter block");
    if (!is_sparse(Ix, wx)) throw shape_error("domain is not wx-sparse");

    Nat block_mask = mask_of(Ix, width);
    std::uint64_t k = block_mask.bit_length();

    // constant-pattern filter
    Nat l_const = rng.draw_bits(k) & block_mask;
    Nat i_gb = meq(l_const & mask_of(Ix, ew), Ix, Ix, ew);
    Nat i_gt = clr(mask_of(i_gb, width), l_const ^ shl(l_const, ew)) |
               mask_of(i_gb, ew);
    Nat i_good = i_gb & shr(i_gt + i_gb, width);

    // counter filter
    Nat l_counter = rng.draw_bits(k) & mask_of(i_good, width);
    i_gb = i_good & meq(l_counter & mask_of(Ix, ew), Nat(0), Ix, ew);
    Nat temp = shl(madd(l_counter, l_const, l_const, ew), ew);
    Nat gbmask = mask_of(i_gb, ew);
    i_gt = clr(mask_of(i_gb, width), l_counter ^ temp) | gbmask;
    i_good = i_gb & shr(i_gt + i_gb, width);

    // prefix mask: keep the counter fields whose value has top-w bits inp
    Nat shift_amt = shl(inp, map_w + (map_w - w));
    Nat m_domain = shl(i_good, shift_amt);
    Nat m_width = shl(ew_n, map_w - w);
    if (m_width > Nat(bit_ceiling()))
        throw resource_limit("prefix mask exceeds bit ceiling");
    Nat m = mask_of(m_domain, m_width.to_u64());

    return WordMap{l_counter & m, l_const & m, map_w};
}

namespace simdetail {

inline std::string reject_text(Verdict v) {
    return std::string(verdict_text(v));
}

}  // namespace simdetail

// Top level of the randomized simulation: grow the tape by tetration,
// generate a candidate map, verify all candidates at once, and halt as
// soon as the machine's fate on the current tape is known. Rejects on a
// failed generation round; never falsely accepts.
inline SimReport simulate_pel(const TmSpec& spec, const Nat& inp,
                              RandomSource& rng, const SimLimits& limits) {
    SimReport rep;
    StepCircuit circuit = compile_step_circuit(spec);
    std::uint64_t maxstep = 1;

    for (std::uint64_t iter = 0; iter < limits.max_iterations; ++iter) {
        rep.iterations = iter + 1;
        rep.unit_steps += maxstep + inp.bit_length();
        try {
            Nat s_nat = tetrate(Nat(2), maxstep);
            if (s_nat > Nat(bit_ceiling()))
                throw resource_limit("tape size exceeds bit ceiling");
            std::uint64_t s = s_nat.to_u64();
            if (inp.bit_length() > s) {
                maxstep += maxstep;
                continue;  // the input does not fit yet: more tape
            }
            MapShape sh = map_shape(spec, s);
            if (shl(Nat(1), 3 * sh.w) > Nat(limits.max_tableau_rows))
                throw resource_limit("tableau rows exceed the configured ceiling");

            Nat k_n = limits.k_bits
                          ? Nat(limits.k_bits)
                          : choose_k(iter, Nat(sh.elem_w),
                                     Nat(sh.elem_w) * Nat(iter + 1));
            if (k_n > Nat(bit_ceiling()))
                throw resource_limit("draw width exceeds bit ceiling");
            std::uint64_t k = k_n.to_u64();

            Verdict v;
            if (!limits.use_input_verify) {
                Nat target(sh.elem_w);
                if (!limits.dilution_target_cap.is_zero() &&
                    limits.dilution_target_cap < target)
                    target = limits.dilution_target_cap;
                SparseDomain dom = build_domain(target, k, rng);
                rep.unit_steps += 2;
                Nat contents = rng.draw_bits(k) & mask_of(dom.domain, sh.elem_w);
                v = verify_parallel(contents, dom.domain, s, inp, spec, circuit);
            } else {
                // reversed-tableau route: certify far past the counter
                // block, then pin the input prefix structurally
                Nat ew = shl(Nat(1), sh.elem_w);
                Nat target_x = shl(ew, ew) + ew + Nat(1);
                SparseDomain dom = build_domain(target_x, k, rng);
                rep.unit_steps += 2;
                WordMap m = input_verify(dom.domain, dom.w, sh.elem_w, inp, sh.w, rng);
                v = verify_parallel_reversed(m.L, m.I, s, spec, circuit);
            }
            rep.last_verdict = v;
            switch (v) {
                case Verdict::accepts:
                    rep.outcome = Outcome::accepted;
                    rep.diagnostic = simdetail::reject_text(v);
                    return rep;
                case Verdict::rejects:
                case Verdict::rejects_by_looping:
                    rep.outcome = Outcome::rejected;
                    rep.diagnostic = simdetail::reject_text(v);
                    return rep;
                case Verdict::simulation_failed:
                    rep.outcome = Outcome::rejected;
                    rep.diagnostic = simdetail::reject_text(v);
                    return rep;
                case Verdict::needs_more_tape:
                    break;
            }
        } catch (const resource_limit& e) {
            rep.outcome = Outcome::rejected;
            rep.diagnostic = e.what();
            return rep;
        } catch (const shape_error& e) {
            // a capped dilution produced a domain too dense to use
            rep.outcome = Outcome::rejected;
            rep.diagnostic = e.what();
            return rep;
        } catch (const tape_exhausted& e) {
            rep.outcome = Outcome::rejected;
            rep.diagnostic = e.what();
            return rep;
        }
        maxstep += maxstep;
    }
    rep.outcome = Outcome::rejected;
    rep.diagnostic = "iteration limit reached without a decided tape size";
    return rep;
}

// --- crafted oracle tapes -------------------------------------------------

// Draw that survives one dilution round for the run
// {start, start+w, ..., start+(members-1)w}: a counter starting at 0.
inline Nat dilution_counter_draw(std::uint64_t start, std::uint64_t members,
                                 std::uint64_t w) {
    Nat r(0);
    std::uint64_t wrap = std::uint64_t{1} << w;
    for (std::uint64_t j = 0; j < members; ++j)
        r = r | shl(Nat(j % wrap), start + j * w);
    return r;
}

// Bootstrap draw producing the 2-spaced run {start, start+2, ...}.
inline Nat bootstrap_run_draw(std::uint64_t start, std::uint64_t members) {
    Nat r(0);
    for (std::uint64_t j = 0; j < members; ++j)
        r = r | shl(Nat(1), start + 2 * j + 1);
    return r;
}

// Limits matching make_lucky_tape: one loop pass, explicit draw width,
// dilution stopped after one round (the crafted domain is far sparser
// than its certificate).
inline SimLimits lucky_limits(const TmSpec& spec, std::uint64_t s) {
    MapShape sh = map_shape(spec, s);
    SimLimits lim;
    lim.max_iterations = 1;
    lim.k_bits = sh.elem_w;
    lim.dilution_target_cap = Nat(9);
    return lim;
}

// Oracle bits driving one simulate_pel iteration to the correct tableau:
// a bootstrap draw with a single 4-member run, its counter, and then the
// packed history of the machine on input inp as the content draw.
inline std::vector<std::uint8_t> make_lucky_tape(const TmSpec& spec,
                                                 const Nat& inp,
                                                 std::uint64_t s) {
    MapShape sh = map_shape(spec, s);
    std::uint64_t k = sh.elem_w;
    std::vector<std::uint8_t> tape;
    append_bits(tape, bootstrap_run_draw(0, 4), k);
    append_bits(tape, dilution_counter_draw(0, 4, 2), k);
    Nat rows = tableau_length_bound(spec, s);
    Tableau t = build_tableau(spec, inp, s, rows.to_u64());
    append_bits(tape, pack_tableau_element(t), k);
    return tape;
}

// --- generic RAND to power-of-two RAND ------------------------------------

struct RpToBrpPlan {
    std::uint64_t maxstep = 0;  // per-repetition draw budget
    Nat m_bound;                // bound on any rand() argument
    Nat k_tilde;                // pool width: 2^k_tilde > m_bound^maxstep
    bool bpp = false;

    static RpToBrpPlan make(std::uint64_t maxstep, const Nat& m_bound,
                            bool bpp = false) {
        if (maxstep == 0) throw range_error("need a positive step budget");
        if (m_bound < Nat(2)) throw range_error("per-call bound below 2");
        RpToBrpPlan plan;
        plan.maxstep = maxstep;
        plan.m_bound = m_bound;
        plan.bpp = bpp;
        // products become shifts: bitlen(M) * maxstep <= bitlen(M) << maxstep
        plan.k_tilde =
            shl(Nat(m_bound.bit_length()), Nat(maxstep)) + Nat(bpp ? 3 : 1);
        if (plan.k_tilde > Nat(bit_ceiling()))
            throw resource_limit("pool width exceeds bit ceiling");
        return plan;
    }
};

namespace rpdetail {

// Emits `dst <= 0` then doubling/increment steps building the constant.
inline void emit_load_const(std::vector<Instruction>& code, std::uint64_t dst,
                            const Nat& value) {
    auto R = [](std::uint64_t r) { return Operand::direct(r); };
    code.push_back({Opcode::assign, PrimOp::add, R(dst), Operand::lit(false), {}, 0});
    if (value.is_zero()) return;
    for (std::uint64_t b = value.bit_length(); b-- > 0;) {
        if (b + 1 < value.bit_length())
            code.push_back({Opcode::prim, PrimOp::add, R(dst), R(dst), R(dst), 0});
        if (value.bit(b))
            code.push_back(
                {Opcode::prim, PrimOp::add, R(dst), R(dst), Operand::lit(true), 0});
    }
}

inline std::size_t load_const_len(const Nat& value) {
    if (value.is_zero()) return 1;
    std::size_t ones = 0;
    for (std::uint64_t b = 0; b < value.bit_length(); ++b)
        if (value.bit(b)) ++ones;
    return 1 + (value.bit_length() - 1) + ones;
}

}  // namespace rpdetail

// Collates all rand(y) draws of one bounded run into a single upfront
// rand2(k_tilde) pool; each original draw becomes mod/div extraction from
// the pool. The whole body runs three times on fresh pools; the wrapper
// accepts if any repetition accepted, or by majority in bpp mode. A
// repetition that draws more than maxstep times rejects outright, which
// can only depress the acceptance rate.
inline Program rp_to_brp(const Program& p, const RpToBrpPlan& plan) {
    if (p.uses_indirect)
        throw policy_violation("pool transform needs statically bounded registers");
    if (!p.max_static_register)
        throw policy_violation("pool transform needs a register bound");
    for (const auto& ins : p.instructions)
        if (ins.op == Opcode::rand_pow2)
            throw policy_violation("input program must use general rand only");

    const std::uint64_t base = *p.max_static_register + 1;
    const std::uint64_t pool = base, count = base + 1, flag = base + 2,
                        save_in = base + 3, t1 = base + 4, t2 = base + 5,
                        budget_c = base + 6, ktilde_c = base + 7,
                        two_c = base + 8;
    auto R = [](std::uint64_t r) { return Operand::direct(r); };

    Program out;
    out.policy = p.policy;
    out.policy.rand_mode = RandMode::rand_pow2;
    out.policy.monus = true;
    out.policy.mul = true;
    out.policy.intdiv = true;
    out.uses_indirect = false;
    auto& code = out.instructions;

    Nat budget_plus_one = Nat(plan.maxstep) + Nat(1);

    // instruction count of each translated body instruction
    auto len_of = [&](const Instruction& ins) -> std::size_t {
        switch (ins.op) {
            case Opcode::rand_gen: return 6;
            case Opcode::halt: return 2;
            case Opcode::halt_accept: return 1;
            case Opcode::halt_reject: return 1;
            default: return 1;
        }
    };

    rpdetail::emit_load_const(code, ktilde_c, plan.k_tilde);
    rpdetail::emit_load_const(code, budget_c, budget_plus_one);
    code.push_back({Opcode::assign, PrimOp::add, R(save_in), R(0), {}, 0});
    code.push_back({Opcode::assign, PrimOp::add, R(flag), Operand::lit(false), {}, 0});

    // three repetitions, unrolled; per-rep offsets for branch remapping
    std::vector<std::size_t> rep_start(3);
    std::vector<std::vector<std::size_t>> body_start(
        3, std::vector<std::size_t>(p.instructions.size() + 1));
    std::size_t at = code.size();
    // zero regs 1..max, restore input, zero counter, draw the pool
    std::size_t prologue_len = *p.max_static_register + 3;
    for (int rep = 0; rep < 3; ++rep) {
        rep_start[rep] = at;
        at += prologue_len;
        for (std::size_t i = 0; i < p.instructions.size(); ++i) {
            body_start[rep][i] = at;
            at += len_of(p.instructions[i]);
        }
        body_start[rep][p.instructions.size()] = at;
        at += 2;  // trailing halt translation
        at += 1;  // flag increment
    }
    std::size_t finale_at = at;
    std::size_t overdraw_at = finale_at + (plan.bpp ? 4 : 2);

    for (int rep = 0; rep < 3; ++rep) {
        std::size_t rep_end = body_start[rep][p.instructions.size()] + 2;
        // reset user registers, restore input, zero the draw counter
        for (std::uint64_t r = 1; r <= *p.max_static_register; ++r)
            code.push_back(
                {Opcode::assign, PrimOp::add, R(r), Operand::lit(false), {}, 0});
        code.push_back({Opcode::assign, PrimOp::add, R(0), R(save_in), {}, 0});
        code.push_back(
            {Opcode::assign, PrimOp::add, R(count), Operand::lit(false), {}, 0});
        code.push_back({Opcode::rand_pow2, PrimOp::add, R(pool), R(ktilde_c), {}, 0});

        for (const auto& ins : p.instructions) {
            switch (ins.op) {
                case Opcode::rand_gen:
                    // count and bound the draws, then extract mod/div
                    code.push_back({Opcode::prim, PrimOp::add, R(count), R(count),
                                    Operand::lit(true), 0});
                    code.push_back({Opcode::branch_eq, PrimOp::add, {}, R(count),
                                    R(budget_c), overdraw_at});
                    code.push_back(
                        {Opcode::prim, PrimOp::intdiv, R(t1), R(pool), ins.a, 0});
                    code.push_back({Opcode::prim, PrimOp::mul, R(t2), R(t1), ins.a, 0});
                    code.push_back(
                        {Opcode::prim, PrimOp::monus, ins.dst, R(pool), R(t2), 0});
                    code.push_back({Opcode::assign, PrimOp::add, R(pool), R(t1), {}, 0});
                    break;
                case Opcode::halt:
                    code.push_back({Opcode::branch_eq, PrimOp::add, {}, R(0),
                                    Operand::lit(false), rep_end + 1});
                    code.push_back({Opcode::jump, PrimOp::add, {}, {}, {}, rep_end});
                    break;
                case Opcode::halt_accept:
                    code.push_back({Opcode::jump, PrimOp::add, {}, {}, {}, rep_end});
                    break;
                case Opcode::halt_reject:
                    code.push_back(
                        {Opcode::jump, PrimOp::add, {}, {}, {}, rep_end + 1});
                    break;
                case Opcode::jump:
                    code.push_back({Opcode::jump, PrimOp::add, {}, {}, {},
                                    body_start[rep][ins.target]});
                    break;
                case Opcode::branch_eq: {
                    Instruction copy = ins;
                    copy.target = body_start[rep][ins.target];
                    code.push_back(copy);
                    break;
                }
                default:
                    code.push_back(ins);
                    break;
            }
        }
        // falling off the body end behaves like halt
        code.push_back({Opcode::branch_eq, PrimOp::add, {}, R(0),
                        Operand::lit(false), rep_end + 1});
        code.push_back({Opcode::jump, PrimOp::add, {}, {}, {}, rep_end});
        // rep_end: success path
        code.push_back({Opcode::prim, PrimOp::add, R(flag), R(flag),
                        Operand::lit(true), 0});
        // rep_end + 1 = next repetition (or the finale)
    }

    if (plan.bpp) {
        // majority of three: flag >= 2, i.e. bit 1 of the tally
        code.push_back({Opcode::assign, PrimOp::add, R(two_c), Operand::lit(true), {}, 0});
        code.push_back({Opcode::prim, PrimOp::add, R(two_c), R(two_c), R(two_c), 0});
        code.push_back({Opcode::prim, PrimOp::band, R(0), R(flag), R(two_c), 0});
        code.push_back({Opcode::halt, PrimOp::add, {}, {}, {}, 0});
    } else {
        code.push_back({Opcode::assign, PrimOp::add, R(0), R(flag), {}, 0});
        code.push_back({Opcode::halt, PrimOp::add, {}, {}, {}, 0});
    }
    // overdraw: conservative reject
    code.push_back({Opcode::halt_reject, PrimOp::add, {}, {}, {}, 0});

    out.max_static_register = two_c;
    return out;
}

// --- acceptance-bound arithmetic ------------------------------------------

// One bounded repetition accepts with probability at least p/(2-p) when
// the unbounded algorithm accepts with probability p.
inline double rp_per_rep_bound(double p) { return p / (2.0 - p); }

// Acceptance after three any-of repetitions.
inline double rp_triple_bound(double p) {
    double q = rp_per_rep_bound(p);
    return 1.0 - (1.0 - q) * (1.0 - q) * (1.0 - q);
}

// Per-repetition bound with the wider pool used in bpp mode.
inline double bpp_per_rep_bound(double p) { return 4.0 * p / (5.0 - p); }

inline double majority3(double q) { return q * q * (3.0 - 2.0 * q); }

}  // namespace pelram
