#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pelram/error.hpp"
#include "pelram/nat.hpp"

namespace pelram {

enum class Move { left, right, stay };

struct Transition {
    bool write = false;
    Move move = Move::stay;
    std::uint32_t next = 0;
};

// One-sided bounded-tape machine over the binary alphabet, 0 doubling as
// blank. States are integers below state_count; the initial state is 0.
// The top bit of the c-bit state field is reserved: it is the sticky
// tape-overrun flag, so state_count must fit in c-1 bits.
struct TmSpec {
    std::uint32_t state_count = 0;
    std::uint32_t c = 0;  // state field width in bits
    std::uint32_t accept_state = 0;
    std::uint32_t reject_state = 0;
    std::vector<std::optional<Transition>> table;  // [q * 2 + read]

    std::uint32_t flag_state() const { return std::uint32_t{1} << (c - 1); }

    bool is_final(std::uint64_t q) const {
        return q == accept_state || q == reject_state;
    }
    bool is_flagged(std::uint64_t q) const { return (q >> (c - 1)) & 1; }

    // Absorbing on final states, table-driven otherwise.
    Transition effective(std::uint32_t q, bool read) const {
        if (is_final(q)) return Transition{read, Move::stay, q};
        return *table[q * 2 + (read ? 1 : 0)];
    }
};

// The five-integer snapshot (tape, 2^headpos, state*2^headpos, 1, 2^s).
struct InstDesc {
    Nat tape;
    Nat head_pow;
    Nat state_head;
    Nat low_end;   // always 1
    Nat high_end;  // 2^s

    bool operator==(const InstDesc&) const = default;
};

struct TmOutcome {
    enum class Kind { accepted, rejected, nonterminating, exceeded_tape };
    Kind kind = Kind::nonterminating;
    std::uint64_t steps = 0;
};

inline const char* tm_outcome_name(TmOutcome::Kind k) {
    switch (k) {
        case TmOutcome::Kind::accepted: return "accepted";
        case TmOutcome::Kind::rejected: return "rejected";
        case TmOutcome::Kind::nonterminating: return "nonterminating";
        case TmOutcome::Kind::exceeded_tape: return "exceeded_tape";
    }
    return "?";
}

namespace tmdetail {
inline std::uint32_t parse_u32(const std::string& t, std::size_t line) {
    if (t.empty() || t.size() > 9) throw syntax_error(line, "bad number '" + t + "'");
    for (char c : t)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw syntax_error(line, "bad number '" + t + "'");
    return static_cast<std::uint32_t>(std::stoul(t));
}
}  // namespace tmdetail

// Header "states N c C accept A reject R tape-default 0", then one line
// per transition: "q b -> q' b' {L|R|S}". Non-final states need rows for
// both read bits; rows for final states may only be absorbing self-loops.
inline TmSpec parse_tm(const std::string& text) {
    TmSpec spec;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    bool saw_header = false;

    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::vector<std::string> toks;
        std::string t;
        while (ls >> t) toks.push_back(t);
        if (toks.empty()) continue;

        if (!saw_header) {
            if (toks.size() != 10 || toks[0] != "states" || toks[2] != "c" ||
                toks[4] != "accept" || toks[6] != "reject" ||
                toks[8] != "tape-default" || toks[9] != "0")
                throw syntax_error(lineno,
                                   "expected header 'states N c C accept A reject R "
                                   "tape-default 0'");
            spec.state_count = tmdetail::parse_u32(toks[1], lineno);
            spec.c = tmdetail::parse_u32(toks[3], lineno);
            spec.accept_state = tmdetail::parse_u32(toks[5], lineno);
            spec.reject_state = tmdetail::parse_u32(toks[7], lineno);

            if (spec.state_count == 0) throw syntax_error(lineno, "need states");
            if (spec.c < 2) throw syntax_error(lineno, "state field needs c >= 2");
            if (spec.c >= 32 || (std::uint64_t{1} << (spec.c - 1)) < spec.state_count)
                throw syntax_error(
                    lineno, "state_count must fit in c-1 bits (top bit is reserved)");
            if (spec.accept_state == spec.reject_state)
                throw syntax_error(lineno, "accept and reject must differ");
            if (spec.accept_state >= spec.state_count ||
                spec.reject_state >= spec.state_count)
                throw syntax_error(lineno, "final state out of range");
            spec.table.assign(spec.state_count * 2, std::nullopt);
            saw_header = true;
            continue;
        }

        if (toks.size() != 6 || toks[2] != "->")
            throw syntax_error(lineno, "expected 'q b -> q' b' {L|R|S}'");
        std::uint32_t q = tmdetail::parse_u32(toks[0], lineno);
        std::uint32_t b = tmdetail::parse_u32(toks[1], lineno);
        std::uint32_t q2 = tmdetail::parse_u32(toks[3], lineno);
        std::uint32_t b2 = tmdetail::parse_u32(toks[4], lineno);
        if (q >= spec.state_count || q2 >= spec.state_count || b > 1 || b2 > 1)
            throw syntax_error(lineno, "transition out of range");
        Move mv;
        if (toks[5] == "L") mv = Move::left;
        else if (toks[5] == "R") mv = Move::right;
        else if (toks[5] == "S") mv = Move::stay;
        else throw syntax_error(lineno, "move must be L, R or S");
        if (spec.is_final(q) && !(q2 == q && b2 == b && mv == Move::stay))
            throw syntax_error(lineno, "final states must be absorbing");
        if (spec.table[q * 2 + b])
            throw syntax_error(lineno, "duplicate transition");
        spec.table[q * 2 + b] = Transition{b2 == 1, mv, q2};
    }

    if (!saw_header) throw syntax_error(1, "missing header");
    for (std::uint32_t q = 0; q < spec.state_count; ++q) {
        if (spec.is_final(q)) continue;
        for (std::uint32_t b = 0; b < 2; ++b)
            if (!spec.table[q * 2 + b])
                throw syntax_error(0, "unspecified transition for state " +
                                          std::to_string(q) + " on " +
                                          std::to_string(b));
    }
    return spec;
}

inline InstDesc encode_id(const TmSpec& spec, const Nat& tape_bits,
                          std::uint64_t headpos, std::uint64_t state,
                          std::uint64_t s) {
    if (headpos > s) throw range_error("head position beyond tape end");
    if (state >= (std::uint64_t{1} << spec.c)) throw range_error("state too wide");
    if (tape_bits.bit_length() > s) throw range_error("tape content too wide");
    InstDesc id;
    id.tape = tape_bits;
    id.head_pow = shl(Nat(1), headpos);
    id.state_head = shl(Nat(state), headpos);
    id.low_end = Nat(1);
    id.high_end = shl(Nat(1), s);
    return id;
}

struct DecodedId {
    Nat tape;
    std::uint64_t headpos = 0;
    std::uint64_t state = 0;
    std::uint64_t s = 0;
};

inline DecodedId decode_id(const InstDesc& id) {
    DecodedId d;
    if (id.head_pow.is_zero()) throw range_error("head indicator is zero");
    std::uint64_t p = id.head_pow.bit_length() - 1;
    if (id.head_pow != shl(Nat(1), p)) throw range_error("head indicator not a power of two");
    if (id.low_end != Nat(1)) throw range_error("low endpoint must be 1");
    if (id.high_end.is_zero() || id.high_end != shl(Nat(1), id.high_end.bit_length() - 1))
        throw range_error("high endpoint not a power of two");
    d.s = id.high_end.bit_length() - 1;
    if (p > d.s) throw range_error("head beyond tape end");
    Nat state = intdiv(id.state_head, id.head_pow);
    if (shl(state, p) != id.state_head)
        throw range_error("state field not aligned with the head");
    d.state = state.to_u64();
    d.headpos = p;
    d.tape = id.tape;
    if (d.tape.bit_length() > d.s) throw range_error("tape content too wide");
    return d;
}

// One transition. Halting and flagged descriptions are fixed points; a
// right move past the tape end freezes the head and raises the sticky
// overrun flag in the state field.
inline InstDesc tm_step_reference(const TmSpec& spec, const InstDesc& id) {
    DecodedId d = decode_id(id);
    if (spec.is_flagged(d.state) || spec.is_final(d.state)) return id;
    if (d.headpos >= d.s) {
        // parked on the virtual end cell: immediately flagged
        InstDesc out = id;
        out.state_head = shl(Nat(spec.flag_state()), d.headpos);
        return out;
    }
    bool read = d.tape.bit(d.headpos);
    Transition tr = spec.effective(static_cast<std::uint32_t>(d.state), read);

    Nat tape = d.tape;
    if (tr.write != read) tape = tape ^ shl(Nat(1), d.headpos);

    std::uint64_t p = d.headpos;
    std::uint64_t q = tr.next;
    switch (tr.move) {
        case Move::stay: break;
        case Move::left:
            if (p > 0) --p;
            break;
        case Move::right:
            if (p + 1 >= d.s) {
                q = spec.flag_state();  // would pass the end: freeze, flag
            } else {
                ++p;
            }
            break;
    }
    return encode_id(spec, tape, p, q, d.s);
}

inline TmOutcome::Kind classify_state(const TmSpec& spec, std::uint64_t state) {
    if (spec.is_flagged(state)) return TmOutcome::Kind::exceeded_tape;
    if (state == spec.accept_state) return TmOutcome::Kind::accepted;
    if (state == spec.reject_state) return TmOutcome::Kind::rejected;
    return TmOutcome::Kind::nonterminating;
}

// Steps the reference machine until it halts, overruns the tape or uses
// up max_steps.
inline TmOutcome run_tm_reference(const TmSpec& spec, const Nat& inp,
                                  std::uint64_t s, std::uint64_t max_steps) {
    if (inp.bit_length() > s) throw range_error("input wider than the tape");
    InstDesc id = encode_id(spec, inp, 0, 0, s);
    for (std::uint64_t step = 0;; ++step) {
        auto kind = classify_state(spec, decode_id(id).state);
        if (kind != TmOutcome::Kind::nonterminating) return {kind, step};
        if (step == max_steps) return {TmOutcome::Kind::nonterminating, step};
        id = tm_step_reference(spec, id);
    }
}

// 2^{3(s+c-1)}: past this many steps every description has repeated.
inline Nat tableau_length_bound(const TmSpec& spec, std::uint64_t s) {
    return shl(Nat(1), 3 * (s + spec.c - 1));
}

}  // namespace pelram
