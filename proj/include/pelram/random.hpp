#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "pelram/error.hpp"
#include "pelram/nat.hpp"

namespace pelram {

// Source of uniform random bits. Either a seeded PRNG or an explicit
// oracle tape; the latter makes every randomized construction replayable
// bit for bit.
class RandomSource {
  public:
    virtual ~RandomSource() = default;

    // Uniform draw in [0, 2^k). Oracle sources consume exactly k bits.
    virtual Nat draw_bits(std::uint64_t k) = 0;
};

namespace detail {
inline Nat nat_from_words(std::vector<std::uint64_t>& words, std::uint64_t k) {
    if (k == 0 || words.empty()) return Nat(0);
    bigint v;
    boost::multiprecision::import_bits(v, words.begin(), words.end(), 64, false);
    // import_bits treats every word as full width; mask the top word's slack.
    bigint mask = (bigint(1) << static_cast<unsigned>(k)) - 1;
    return Nat(v & mask);
}
}  // namespace detail

class SeededPrng final : public RandomSource {
  public:
    explicit SeededPrng(std::uint64_t seed) : rng_(seed) {}

    Nat draw_bits(std::uint64_t k) override {
        if (k > bit_ceiling()) throw resource_limit("draw exceeds bit ceiling");
        if (k == 0) return Nat(0);
        std::vector<std::uint64_t> words((k + 63) / 64);
        for (auto& w : words) w = rng_();
        return detail::nat_from_words(words, k);
    }

  private:
    std::mt19937_64 rng_;
};

// Explicit bit sequence. Draws read k consecutive bits, least significant
// first, so tapes compose by concatenation.
class OracleTape final : public RandomSource {
  public:
    explicit OracleTape(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {}

    // Parses ASCII '0'/'1'; whitespace is ignored.
    static OracleTape from_text(const std::string& text) {
        std::vector<std::uint8_t> bits;
        bits.reserve(text.size());
        for (std::size_t i = 0; i < text.size(); ++i) {
            char c = text[i];
            if (c == '0' || c == '1') {
                bits.push_back(static_cast<std::uint8_t>(c - '0'));
            } else if (c != ' ' && c != '\n' && c != '\t' && c != '\r') {
                throw range_error("tape character is not 0/1/whitespace");
            }
        }
        return OracleTape(std::move(bits));
    }

    Nat draw_bits(std::uint64_t k) override {
        if (k > bit_ceiling()) throw resource_limit("draw exceeds bit ceiling");
        if (cursor_ + k > bits_.size()) throw tape_exhausted();
        std::vector<std::uint64_t> words((k + 63) / 64, 0);
        for (std::uint64_t i = 0; i < k; ++i) {
            if (bits_[cursor_ + i])
                words[i / 64] |= std::uint64_t{1} << (i % 64);
        }
        cursor_ += k;
        return detail::nat_from_words(words, k);
    }

    std::size_t cursor() const { return cursor_; }
    std::size_t size() const { return bits_.size(); }

  private:
    std::vector<std::uint8_t> bits_;
    std::size_t cursor_ = 0;
};

// Appends the low k bits of v, LSB first. Building block for crafted tapes.
inline void append_bits(std::vector<std::uint8_t>& tape, const Nat& v,
                        std::uint64_t k) {
    for (std::uint64_t i = 0; i < k; ++i)
        tape.push_back(v.bit(i) ? 1 : 0);
}

// Uniform draw in [0, y) by rejection over ceil(log2 y)-bit reads.
inline Nat rand_general(const Nat& y, RandomSource& rng) {
    if (y.is_zero()) throw rand_zero();
    if (y == Nat(1)) return Nat(0);
    std::uint64_t bits = monus(y, Nat(1)).bit_length();
    for (;;) {
        Nat v = rng.draw_bits(bits);
        if (v < y) return v;
    }
}

}  // namespace pelram
