#pragma once

#include <stdexcept>
#include <string>

namespace decoyrate {

// Bad input data or a violated invariant. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Config/CSV syntax problem; carries the 1-based line number when known.
class ParseError : public DataError {
public:
    ParseError(const std::string& what, int line)
        : DataError(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace decoyrate
