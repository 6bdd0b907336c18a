#pragma once

// Small machines and programs shared across the test suites.

#include <string>

#include "pelram/program.hpp"
#include "pelram/tm.hpp"

namespace fixtures {

// Accepts iff bit 0 of the input is 0. Decides in one step.
inline const char* kEvenTm =
    "states 3 c 3 accept 1 reject 2 tape-default 0\n"
    "0 0 -> 1 0 S\n"
    "0 1 -> 2 1 S\n";

// Runs right off the end of any tape.
inline const char* kRightMoverTm =
    "states 3 c 3 accept 1 reject 2 tape-default 0\n"
    "0 0 -> 0 0 R\n"
    "0 1 -> 0 1 R\n";

// Ping-pongs between states 0 and 3 forever.
inline const char* kOscillatorTm =
    "states 4 c 3 accept 1 reject 2 tape-default 0\n"
    "0 0 -> 3 0 S\n"
    "0 1 -> 3 1 S\n"
    "3 0 -> 0 0 S\n"
    "3 1 -> 0 1 S\n";

// Writes a 1, moves right, writes another 1, accepts.
inline const char* kWriterTm =
    "states 4 c 3 accept 1 reject 2 tape-default 0\n"
    "0 0 -> 3 1 R\n"
    "0 1 -> 3 1 R\n"
    "3 0 -> 1 1 S\n"
    "3 1 -> 1 1 S\n";

// Walks left (parking at the closed end) until it reads a 1.
inline const char* kLeftMoverTm =
    "states 3 c 3 accept 1 reject 2 tape-default 0\n"
    "0 0 -> 0 0 L\n"
    "0 1 -> 1 1 S\n";

inline pelram::TmSpec even_tm() { return pelram::parse_tm(kEvenTm); }
inline pelram::TmSpec right_mover_tm() { return pelram::parse_tm(kRightMoverTm); }
inline pelram::TmSpec oscillator_tm() { return pelram::parse_tm(kOscillatorTm); }
inline pelram::TmSpec writer_tm() { return pelram::parse_tm(kWriterTm); }
inline pelram::TmSpec left_mover_tm() { return pelram::parse_tm(kLeftMoverTm); }

// RP program: rejects input 0; otherwise accepts iff a fair coin lands 1.
inline const char* kCoinHalfRam =
    "op +,rand\n"
    "beq R0 0 no\n"
    "R1 <= 1\n"
    "R1 <= R1 + R1\n"   // 2
    "R2 <= rand(R1)\n"
    "R0 <= R2\n"
    "halt\n"
    "no:\n"
    "reject\n";

inline pelram::Program coin_half_ram() {
    return pelram::parse_program(kCoinHalfRam);
}

}  // namespace fixtures
