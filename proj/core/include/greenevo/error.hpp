#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace greenevo {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GrammarError : public Error {
public:
    GrammarError(const std::string& what, std::size_t line)
        : Error("grammar line " + std::to_string(line) + ": " + what), line_(line) {}
    explicit GrammarError(const std::string& what) : Error("grammar: " + what) {}

    /// 1-based line number, 0 when the error is not tied to a line.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_ = 0;
};

class DerivationError : public Error {
public:
    using Error::Error;
};

class InvalidGenotype : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class MeasurementError : public Error {
public:
    using Error::Error;
};

class CheckpointError : public Error {
public:
    using Error::Error;
};

class StatsError : public Error {
public:
    using Error::Error;
};

} // namespace greenevo
