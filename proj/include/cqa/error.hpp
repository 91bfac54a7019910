#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cqa {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input. Line and column are 1-based; 0 means unknown.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, std::size_t line, std::size_t column)
        : Error(format(what, line, column)), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string format(const std::string& what, std::size_t line, std::size_t column) {
        if (line == 0) return what;
        return std::to_string(line) + ":" + std::to_string(column) + ": " + what;
    }
    std::size_t line_;
    std::size_t column_;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class UnsafeVariable : public Error {
public:
    using Error::Error;
};

class UnsafeQuery : public Error {
public:
    using Error::Error;
};

class ChangeTargetMissing : public Error {
public:
    using Error::Error;
};

class DeleteTargetMissing : public Error {
public:
    using Error::Error;
};

class BudgetExceeded : public Error {
public:
    using Error::Error;
};

class ForcedOut : public Error {
public:
    using Error::Error;
};

class NoRepair : public Error {
public:
    using Error::Error;
};

class BaseInconsistent : public Error {
public:
    using Error::Error;
};

class UnsupportedQueryClass : public Error {
public:
    using Error::Error;
};

}  // namespace cqa
