#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "fixtures.hpp"
#include "pelram/step_circuit.hpp"
#include "pelram/tm.hpp"

using namespace pelram;

namespace {

// Deliberately naive simulator over an explicit cell array; kept separate
// from the integer-coded production stepper so the two can cross-check.
struct WalkSim {
    std::vector<int> cells;
    std::size_t pos = 0;
    std::uint64_t state = 0;

    static WalkSim from_id(const TmSpec& spec, const InstDesc& id) {
        auto d = decode_id(id);
        WalkSim w;
        w.cells.assign(d.s, 0);
        for (std::uint64_t i = 0; i < d.s; ++i) w.cells[i] = d.tape.bit(i);
        w.pos = d.headpos;
        w.state = d.state;
        (void)spec;
        return w;
    }

    void step(const TmSpec& spec) {
        if (spec.is_flagged(state) || spec.is_final(state)) return;
        bool read = cells[pos] != 0;
        Transition tr = spec.effective(static_cast<std::uint32_t>(state), read);
        cells[pos] = tr.write ? 1 : 0;
        switch (tr.move) {
            case Move::stay: state = tr.next; break;
            case Move::left:
                if (pos > 0) --pos;
                state = tr.next;
                break;
            case Move::right:
                if (pos + 1 >= cells.size()) {
                    state = spec.flag_state();
                } else {
                    ++pos;
                    state = tr.next;
                }
                break;
        }
    }

    InstDesc to_id(const TmSpec& spec, std::uint64_t s) const {
        Nat tape(0);
        for (std::uint64_t i = 0; i < s; ++i)
            if (cells[i]) tape = tape | shl(Nat(1), i);
        return encode_id(spec, tape, pos, state, s);
    }
};

std::vector<TmSpec> circuit_fixtures() {
    return {fixtures::even_tm(), fixtures::writer_tm(), fixtures::oscillator_tm(),
            fixtures::right_mover_tm(), fixtures::left_mover_tm()};
}

std::vector<std::uint64_t> valid_states(const TmSpec& spec) {
    std::vector<std::uint64_t> qs;
    for (std::uint64_t q = 0; q < spec.state_count; ++q) qs.push_back(q);
    qs.push_back(spec.flag_state());
    return qs;
}

}  // namespace

TEST_CASE("parse_tm: header and totality checks") {
    CHECK_NOTHROW(fixtures::even_tm());
    // missing (0,1) row
    CHECK_THROWS_AS(parse_tm("states 3 c 3 accept 1 reject 2 tape-default 0\n"
                             "0 0 -> 1 0 S\n"),
                    syntax_error);
    // non-absorbing accept state
    CHECK_THROWS_AS(parse_tm("states 3 c 3 accept 1 reject 2 tape-default 0\n"
                             "0 0 -> 1 0 S\n0 1 -> 2 1 S\n1 0 -> 0 0 R\n"),
                    syntax_error);
    // no headroom for the overrun flag
    CHECK_THROWS_AS(parse_tm("states 3 c 2 accept 1 reject 2 tape-default 0\n"
                             "0 0 -> 1 0 S\n0 1 -> 2 1 S\n"),
                    syntax_error);
    CHECK_THROWS_AS(parse_tm("states 3 c 3 accept 2 reject 2 tape-default 0\n"
                             "0 0 -> 2 0 S\n0 1 -> 2 1 S\n"),
                    syntax_error);
    // explicit absorbing rows for final states are fine
    CHECK_NOTHROW(parse_tm("states 3 c 3 accept 1 reject 2 tape-default 0\n"
                           "0 0 -> 1 0 S\n0 1 -> 2 1 S\n"
                           "1 0 -> 1 0 S\n1 1 -> 1 1 S\n"));
}

TEST_CASE("encode_id matches the five-tuple layout") {
    TmSpec spec = fixtures::even_tm();
    InstDesc a = encode_id(spec, Nat(5), 0, 0, 3);
    CHECK(a.tape == Nat(5));
    CHECK(a.head_pow == Nat(1));
    CHECK(a.state_head == Nat(0));
    CHECK(a.low_end == Nat(1));
    CHECK(a.high_end == Nat(8));

    InstDesc b = encode_id(spec, Nat(0), 3, 2, 3);
    CHECK(b.tape == Nat(0));
    CHECK(b.head_pow == Nat(8));
    CHECK(b.state_head == Nat(16));
    CHECK(b.high_end == Nat(8));

    CHECK_THROWS_AS(encode_id(spec, Nat(9), 0, 0, 3), range_error);
    CHECK_THROWS_AS(encode_id(spec, Nat(0), 4, 0, 3), range_error);
    CHECK_THROWS_AS(encode_id(spec, Nat(0), 0, 9, 3), range_error);
}

TEST_CASE("decode inverts encode on random tuples") {
    TmSpec spec = fixtures::oscillator_tm();
    std::mt19937_64 rng(5);
    for (int i = 0; i < 1000; ++i) {
        std::uint64_t s = 1 + rng() % 12;
        Nat tape(rng() & ((std::uint64_t{1} << s) - 1));
        std::uint64_t pos = rng() % (s + 1);
        std::uint64_t state = rng() % (std::uint64_t{1} << spec.c);
        InstDesc id = encode_id(spec, tape, pos, state, s);
        DecodedId d = decode_id(id);
        CHECK(d.tape == tape);
        CHECK(d.headpos == pos);
        CHECK(d.state == state);
        CHECK(d.s == s);
    }
}

TEST_CASE("reference step: absorbing states are fixed points") {
    TmSpec spec = fixtures::even_tm();
    InstDesc id = encode_id(spec, Nat(3), 1, spec.accept_state, 3);
    CHECK(tm_step_reference(spec, id) == id);
    InstDesc rej = encode_id(spec, Nat(3), 1, spec.reject_state, 3);
    CHECK(tm_step_reference(spec, rej) == rej);
    InstDesc flagged = encode_id(spec, Nat(3), 1, spec.flag_state(), 3);
    CHECK(tm_step_reference(spec, flagged) == flagged);
}

TEST_CASE("reference step: write-and-move-right from the start cell") {
    TmSpec spec = fixtures::writer_tm();
    InstDesc id = encode_id(spec, Nat(0), 0, 0, 3);  // (0, 1, 0, 1, 8)
    InstDesc next = tm_step_reference(spec, id);
    CHECK(next.tape == Nat(1));        // wrote 1 under the old head
    CHECK(next.head_pow == Nat(2));    // moved right
    CHECK(next.state_head == Nat(6));  // state 3 at position 1
}

TEST_CASE("reference step agrees with a naive cell-array simulator") {
    std::mt19937_64 rng(99);
    for (const TmSpec& spec : circuit_fixtures()) {
        auto states = valid_states(spec);
        for (int i = 0; i < 512; ++i) {
            std::uint64_t s = 1 + rng() % 6;
            Nat tape(rng() & ((std::uint64_t{1} << s) - 1));
            std::uint64_t pos = rng() % s;
            std::uint64_t q = states[rng() % states.size()];
            InstDesc id = encode_id(spec, tape, pos, q, s);
            WalkSim w = WalkSim::from_id(spec, id);
            InstDesc got = tm_step_reference(spec, id);
            w.step(spec);
            CHECK(got == w.to_id(spec, s));
        }
    }
}

TEST_CASE("run_tm_reference outcomes") {
    // immediate accept: initial state is already final
    TmSpec trivially = parse_tm(
        "states 2 c 2 accept 0 reject 1 tape-default 0\n");
    auto out = run_tm_reference(trivially, Nat(0), 2, 10);
    CHECK(out.kind == TmOutcome::Kind::accepted);
    CHECK(out.steps <= 1);

    auto even = fixtures::even_tm();
    CHECK(run_tm_reference(even, Nat(2), 3, 10).kind == TmOutcome::Kind::accepted);
    CHECK(run_tm_reference(even, Nat(3), 3, 10).kind == TmOutcome::Kind::rejected);

    auto mover = fixtures::right_mover_tm();
    auto ex = run_tm_reference(mover, Nat(0), 2, 100);
    CHECK(ex.kind == TmOutcome::Kind::exceeded_tape);
    CHECK(ex.steps <= 3);  // the head passes the end within s+1 steps

    auto osc = fixtures::oscillator_tm();
    std::uint64_t bound = tableau_length_bound(osc, 2).to_u64();
    CHECK(run_tm_reference(osc, Nat(1), 2, bound).kind ==
          TmOutcome::Kind::nonterminating);
}

TEST_CASE("circuit: static shape") {
    for (const TmSpec& spec : circuit_fixtures()) {
        StepCircuit c = compile_step_circuit(spec);
        for (const auto& n : c.nodes) {
            if (n.op == StepCircuit::Op::shl || n.op == StepCircuit::Op::shr) {
                CHECK(n.b <= c.constant_shift_bound);  // structural constants only
            } else {
                CHECK(n.b < 5 + c.nodes.size());  // a value reference
            }
            CHECK(n.a < 5 + c.nodes.size());
        }
        // identity wires for the two constant inputs
        CHECK(c.outputs[3] == StepCircuit::kOne);
        CHECK(c.outputs[4] == StepCircuit::kEs);
    }
}

TEST_CASE("circuit equals the reference stepper on every valid description") {
    for (const TmSpec& spec : circuit_fixtures()) {
        StepCircuit c = compile_step_circuit(spec);
        auto states = valid_states(spec);
        for (std::uint64_t s = 1; s <= 4; ++s) {
            for (std::uint64_t tape = 0; tape < (std::uint64_t{1} << s); ++tape) {
                for (std::uint64_t pos = 0; pos < s; ++pos) {
                    for (std::uint64_t q : states) {
                        InstDesc id = encode_id(spec, Nat(tape), pos, q, s);
                        CHECK(c.step(id) == tm_step_reference(spec, id));
                    }
                }
            }
        }
    }
}

TEST_CASE("circuit: accepting description is a fixed point") {
    TmSpec spec = fixtures::even_tm();
    StepCircuit c = compile_step_circuit(spec);
    InstDesc id = encode_id(spec, Nat(6), 2, spec.accept_state, 3);
    CHECK(c.step(id) == id);
}

TEST_CASE("circuit acts elementwise on packed descriptions") {
    std::mt19937_64 rng(1234);
    for (const TmSpec& spec : circuit_fixtures()) {
        StepCircuit c = compile_step_circuit(spec);
        auto states = valid_states(spec);
        for (int trial = 0; trial < 50; ++trial) {
            std::uint64_t s = 1 + rng() % 4;
            std::uint64_t m = s + spec.c - 1;
            std::size_t count = 1 + rng() % 9;
            std::vector<InstDesc> ids;
            for (std::size_t i = 0; i < count; ++i) {
                Nat tape(rng() & ((std::uint64_t{1} << s) - 1));
                std::uint64_t pos = rng() % s;
                std::uint64_t q = states[rng() % states.size()];
                ids.push_back(encode_id(spec, tape, pos, q, s));
            }
            Nat T(0), H(0), S(0), I(0);
            for (std::size_t i = 0; i < count; ++i) {
                T = T | shl(ids[i].tape, m * i);
                H = H | shl(ids[i].head_pow, m * i);
                S = S | shl(ids[i].state_head, m * i);
                I = I | shl(Nat(1), m * i);
            }
            auto out = c.eval({T, H, S, I, shl(I, s)});
            Nat eT(0), eH(0), eS(0);
            for (std::size_t i = 0; i < count; ++i) {
                InstDesc next = tm_step_reference(spec, ids[i]);
                eT = eT | shl(next.tape, m * i);
                eH = eH | shl(next.head_pow, m * i);
                eS = eS | shl(next.state_head, m * i);
            }
            CHECK(out[0] == eT);
            CHECK(out[1] == eH);
            CHECK(out[2] == eS);
            CHECK(out[3] == I);
            CHECK(out[4] == shl(I, s));
        }
    }
}
