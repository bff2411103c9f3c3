#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nscore {

/// Base for every data/validation failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Confidence ratio with a zero second-largest logit.
class DivisionByZero : public Error {
public:
    using Error::Error;
};

/// A record carrying both (or neither) of true_class and the novel flag.
class InvalidRecord : public Error {
public:
    using Error::Error;
};

/// Evaluation with no positives or no negatives under the chosen definition.
class DegenerateEvaluation : public Error {
public:
    using Error::Error;
};

class InvalidPlan : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace nscore
