#pragma once

#include <stdexcept>
#include <string>

namespace pz {

// Base for all library errors so callers can catch one type at the CLI
// boundary and map it to an exit code.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Mismatched or invalid sizes/orders.
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// A numerical procedure failed (factorization, iteration non-convergence,
// root on the unit circle).
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg) : Error(msg) {}
};

// Rank-deficient least-squares or singular normal equations.
class RankError : public Error {
public:
    explicit RankError(const std::string& msg) : Error(msg) {}
};

// Degenerate or out-of-contract input values (zero frames, bad frequencies).
class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& msg) : Error(msg) {}
};

// Malformed files (WAV encoding, JSON schema).
class FormatError : public Error {
public:
    explicit FormatError(const std::string& msg) : Error(msg) {}
};

// Bad command-line usage.
class UsageError : public Error {
public:
    explicit UsageError(const std::string& msg) : Error(msg) {}
};

}  // namespace pz
