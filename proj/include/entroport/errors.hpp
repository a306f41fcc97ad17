#pragma once

#include <stdexcept>
#include <string>

namespace entroport {

// Bad input data: malformed files, out-of-range parameters, invalid weights.
// The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// An exact accounting identity failed beyond its tolerance.
// The CLI maps this to exit code 3.
class IdentityError : public std::runtime_error {
public:
    explicit IdentityError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace entroport
