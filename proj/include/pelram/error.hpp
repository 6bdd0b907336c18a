#pragma once

#include <stdexcept>
#include <string>

namespace pelram {

// Base class for all library errors.
struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

struct division_by_zero : error {
    division_by_zero() : error("division by zero") {}
};

// a / b with b not dividing a. Exact division is only defined on multiples.
struct inexact_division : error {
    inexact_division() : error("inexact division: divisor does not divide dividend") {}
};

// A computation would exceed the configured bit-length ceiling.
struct resource_limit : error {
    explicit resource_limit(const std::string& what)
        : error("resource limit: " + what) {}
};

struct rand_zero : error {
    rand_zero() : error("rand() with empty range y = 0") {}
};

struct tape_exhausted : error {
    tape_exhausted() : error("oracle tape exhausted") {}
};

struct syntax_error : error {
    syntax_error(std::size_t line, const std::string& msg)
        : error("line " + std::to_string(line) + ": " + msg), line(line) {}
    std::size_t line;
};

struct policy_violation : error {
    explicit policy_violation(const std::string& msg)
        : error("policy violation: " + msg) {}
};

struct transform_inapplicable : error {
    explicit transform_inapplicable(const std::string& msg)
        : error("transform inapplicable: " + msg) {}
};

struct range_error : error {
    explicit range_error(const std::string& msg) : error("range error: " + msg) {}
};

struct shape_error : error {
    explicit shape_error(const std::string& msg) : error("shape error: " + msg) {}
};

}  // namespace pelram
