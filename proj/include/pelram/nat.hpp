#pragma once

#include <atomic>
#include <bit>
#include <cstdint>
#include <iosfwd>
#include <iterator>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "pelram/error.hpp"

namespace pelram {

using bigint = boost::multiprecision::cpp_int;

namespace detail {
inline std::atomic<std::uint64_t> bit_ceiling{std::uint64_t{1} << 26};
}

// Global cap on the bit-length any operation may produce. Runaway
// computations (huge shifts, tetration) fail with resource_limit instead
// of exhausting memory.
inline std::uint64_t bit_ceiling() {
    return detail::bit_ceiling.load(std::memory_order_relaxed);
}
inline void set_bit_ceiling(std::uint64_t bits) {
    detail::bit_ceiling.store(bits, std::memory_order_relaxed);
}

// Scoped override, mainly for tests.
struct bit_ceiling_guard {
    explicit bit_ceiling_guard(std::uint64_t bits) : saved_(bit_ceiling()) {
        set_bit_ceiling(bits);
    }
    ~bit_ceiling_guard() { set_bit_ceiling(saved_); }
    bit_ceiling_guard(const bit_ceiling_guard&) = delete;
    bit_ceiling_guard& operator=(const bit_ceiling_guard&) = delete;

  private:
    std::uint64_t saved_;
};

/// Arbitrary-precision nonnegative integer. The universal register value;
/// all operations keep the result in the naturals (no negatives, ever).
class Nat {
  public:
    Nat() = default;
    Nat(std::uint64_t v) : v_(v) {}
    explicit Nat(bigint v) : v_(std::move(v)) {}

    const bigint& raw() const { return v_; }

    bool is_zero() const { return v_.is_zero(); }

    // Position of the most significant 1, plus one. bit_length(0) = 0.
    std::uint64_t bit_length() const {
        if (v_.is_zero()) return 0;
        return static_cast<std::uint64_t>(boost::multiprecision::msb(v_)) + 1;
    }

    bool bit(std::uint64_t i) const {
        return boost::multiprecision::bit_test(v_, static_cast<unsigned>(i));
    }

    std::uint64_t to_u64() const {
        if (v_ > std::uint64_t(-1))
            throw range_error("value does not fit in 64 bits");
        return v_.convert_to<std::uint64_t>();
    }

    std::string to_string() const { return v_.str(); }

    std::string to_hex() const {
        std::ostringstream os;
        os << std::hex << v_;
        return os.str();
    }

    static Nat from_hex(const std::string& s) {
        if (s.empty()) throw range_error("empty hex string");
        return Nat(bigint("0x" + s));
    }

    static Nat from_dec(const std::string& s) {
        if (s.empty()) throw range_error("empty decimal string");
        return Nat(bigint(s));
    }

    friend bool operator==(const Nat& a, const Nat& b) { return a.v_ == b.v_; }
    friend bool operator!=(const Nat& a, const Nat& b) { return a.v_ != b.v_; }
    friend bool operator<(const Nat& a, const Nat& b) { return a.v_ < b.v_; }
    friend bool operator<=(const Nat& a, const Nat& b) { return a.v_ <= b.v_; }
    friend bool operator>(const Nat& a, const Nat& b) { return a.v_ > b.v_; }
    friend bool operator>=(const Nat& a, const Nat& b) { return a.v_ >= b.v_; }

    friend Nat operator+(const Nat& a, const Nat& b) {
        return checked(Nat(a.v_ + b.v_));
    }
    friend Nat operator*(const Nat& a, const Nat& b) {
        if (a.bit_length() + b.bit_length() > bit_ceiling() + 1)
            throw resource_limit("product exceeds bit ceiling");
        return checked(Nat(a.v_ * b.v_));
    }
    friend Nat operator&(const Nat& a, const Nat& b) { return Nat(a.v_ & b.v_); }
    friend Nat operator|(const Nat& a, const Nat& b) { return Nat(a.v_ | b.v_); }
    friend Nat operator^(const Nat& a, const Nat& b) { return Nat(a.v_ ^ b.v_); }

    friend std::ostream& operator<<(std::ostream& os, const Nat& a);

  private:
    static Nat checked(Nat n) {
        if (n.bit_length() > bit_ceiling())
            throw resource_limit("value exceeds bit ceiling");
        return n;
    }

    bigint v_;
};

inline std::ostream& operator<<(std::ostream& os, const Nat& a) {
    return os << a.v_;
}

// Tweaked negation: flip the bits of a up to and including its most
// significant 1. bnot(0) = 0.
inline Nat bnot(const Nat& a) {
    if (a.is_zero()) return Nat(0);
    bigint mask = (bigint(1) << static_cast<unsigned>(a.bit_length())) - 1;
    return Nat(a.raw() ^ mask);
}

// a + bnot(a): the smallest number of the form 2^m - 1 that is >= a.
inline Nat set_fill(const Nat& a) {
    if (a.is_zero()) return Nat(0);
    return Nat((bigint(1) << static_cast<unsigned>(a.bit_length())) - 1);
}

// Natural subtraction, max(a - b, 0).
inline Nat monus(const Nat& a, const Nat& b) {
    if (a <= b) return Nat(0);
    return Nat(a.raw() - b.raw());
}

// a <= b decided with additions, tweaked negation and Boolean ops only.
// Case 1: bit-lengths differ, detected by the fill masks. Case 2: equal
// fills, decided by the carry position of a + bnot(b).
inline bool le_synth(const Nat& a, const Nat& b) {
    Nat sa = set_fill(a);
    Nat sb = set_fill(b);
    if ((sa | sb) != sa) return true;  // fill(b) strictly longer, so a < b
    if (sa != sb) return false;        // fill(a) strictly longer, so a > b
    return ((a + bnot(b)) & (sb + Nat(1))).is_zero();
}

// Natural subtraction built only from +, tweaked negation, the fill mask
// and bitwise AND.
inline Nat monus_synth(const Nat& a, const Nat& b) {
    if (le_synth(a, b)) return Nat(0);
    Nat sa = set_fill(a);
    return (a + bnot(b + sa)) & sa;
}

// a with every bit cleared where b has a 1: a AND NOT b over an unbounded
// bit field, expressed without a real complement.
inline Nat clr(const Nat& a, const Nat& b) {
    return Nat(a.raw() ^ (a.raw() & b.raw()));
}

// a * 2^b
inline Nat shl(const Nat& a, std::uint64_t b) {
    if (a.is_zero()) return a;
    if (a.bit_length() + b > bit_ceiling())
        throw resource_limit("shift exceeds bit ceiling");
    return Nat(a.raw() << static_cast<unsigned>(b));
}

inline Nat shl(const Nat& a, const Nat& b) {
    if (a.is_zero()) return a;
    if (b > Nat(bit_ceiling()))
        throw resource_limit("shift amount exceeds bit ceiling");
    return shl(a, b.to_u64());
}

// floor(a / 2^b)
inline Nat shr(const Nat& a, std::uint64_t b) {
    if (b >= a.bit_length()) return Nat(0);
    return Nat(a.raw() >> static_cast<unsigned>(b));
}

inline Nat shr(const Nat& a, const Nat& b) {
    if (b >= Nat(a.bit_length())) return Nat(0);
    return shr(a, b.to_u64());
}

inline Nat intdiv(const Nat& a, const Nat& b) {
    if (b.is_zero()) throw division_by_zero();
    return Nat(a.raw() / b.raw());
}

inline Nat exactdiv(const Nat& a, const Nat& b) {
    if (b.is_zero()) throw division_by_zero();
    bigint q, r;
    boost::multiprecision::divide_qr(a.raw(), b.raw(), q, r);
    if (!r.is_zero()) throw inexact_division();
    return Nat(q);
}

inline Nat mod(const Nat& a, const Nat& b) {
    if (b.is_zero()) throw division_by_zero();
    return Nat(a.raw() % b.raw());
}

// base^exp with the ceiling checked up front, so huge exponents fail fast
// instead of allocating.
inline Nat pow_checked(const Nat& base, const Nat& exp) {
    if (exp.is_zero()) return Nat(1);
    if (base.is_zero()) return Nat(0);
    if (base == Nat(1)) return Nat(1);
    if (exp > Nat(bit_ceiling()))
        throw resource_limit("exponent exceeds bit ceiling");
    std::uint64_t e = exp.to_u64();
    if (base.bit_length() * e > bit_ceiling() + e)
        throw resource_limit("power exceeds bit ceiling");
    Nat r(boost::multiprecision::pow(base.raw(), static_cast<unsigned>(e)));
    if (r.bit_length() > bit_ceiling())
        throw resource_limit("power exceeds bit ceiling");
    return r;
}

// Little-endian 64-bit words of v; empty for zero.
inline std::vector<std::uint64_t> to_words(const Nat& v) {
    std::vector<std::uint64_t> words;
    if (!v.is_zero())
        boost::multiprecision::export_bits(v.raw(), std::back_inserter(words), 64,
                                           false);
    return words;
}

inline std::vector<std::uint64_t> set_bits(const Nat& v) {
    std::vector<std::uint64_t> out;
    auto words = to_words(v);
    for (std::size_t i = 0; i < words.size(); ++i) {
        std::uint64_t x = words[i];
        while (x) {
            out.push_back(i * 64 + static_cast<std::uint64_t>(std::countr_zero(x)));
            x &= x - 1;
        }
    }
    return out;
}

enum class PrimOp {
    add,
    monus,
    mul,
    intdiv,
    exactdiv,
    shl,
    shr,
    band,
    bor,
    bxor,
    bnot,
    clr,
};

inline bool prim_is_unary(PrimOp op) { return op == PrimOp::bnot; }

inline const char* prim_name(PrimOp op) {
    switch (op) {
        case PrimOp::add: return "+";
        case PrimOp::monus: return "-.";
        case PrimOp::mul: return "*";
        case PrimOp::intdiv: return "//";
        case PrimOp::exactdiv: return "/";
        case PrimOp::shl: return "<<";
        case PrimOp::shr: return ">>";
        case PrimOp::band: return "&";
        case PrimOp::bor: return "|";
        case PrimOp::bxor: return "^";
        case PrimOp::bnot: return "~";
        case PrimOp::clr: return "clr";
    }
    return "?";
}

// Unit-time primitive dispatch. b is ignored for the unary bnot.
inline Nat eval_prim(PrimOp op, const Nat& a, const Nat& b) {
    switch (op) {
        case PrimOp::add: return a + b;
        case PrimOp::monus: return monus(a, b);
        case PrimOp::mul: return a * b;
        case PrimOp::intdiv: return intdiv(a, b);
        case PrimOp::exactdiv: return exactdiv(a, b);
        case PrimOp::shl: return shl(a, b);
        case PrimOp::shr: return shr(a, b);
        case PrimOp::band: return a & b;
        case PrimOp::bor: return a | b;
        case PrimOp::bxor: return a ^ b;
        case PrimOp::bnot: return bnot(a);
        case PrimOp::clr: return clr(a, b);
    }
    throw range_error("unknown primitive");
}

}  // namespace pelram
