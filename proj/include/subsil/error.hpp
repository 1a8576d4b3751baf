#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace subsil {

// Base for every error raised by the library. The CLI maps DataError (and
// its subclasses) to exit code 2 and anything else to 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input that is well-typed but violates a contract: bad scenario, geometry
// mismatch, duplicate video id, empty corpus, ...
class DataError : public Error {
public:
    using Error::Error;
};

class ParseError : public DataError {
public:
    ParseError(const std::string& what, std::size_t line)
        : DataError(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

} // namespace subsil
