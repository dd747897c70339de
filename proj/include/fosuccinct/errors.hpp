#pragma once

#include <stdexcept>
#include <string>

namespace fosuccinct {

// Bad input: malformed text, precondition violations, values outside contracts.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// A resource guard tripped (search space, table memory, string length, ...).
// The message names the guard and the offending size.
class GuardError : public std::runtime_error {
public:
    explicit GuardError(const std::string& msg) : std::runtime_error(msg) {}
};

// An internal invariant failed; indicates a bug, not bad input.
class InternalError : public std::logic_error {
public:
    explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

} // namespace fosuccinct
