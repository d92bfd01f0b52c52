#pragma once

#include <stdexcept>
#include <string>

namespace botflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Input bytes do not follow the expected container format (e.g. pcap magic).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Arguments or data violate an operation's preconditions.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A CSV file lacks a required column.
class SchemaError : public Error {
public:
    SchemaError(const std::string& column, const std::string& what)
        : Error(what), column_(column) {}
    const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

/// A specific line of a text input could not be parsed.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& detail)
        : Error("line " + std::to_string(line) + ": " + detail), line_(line), detail_(detail) {}
    std::size_t line() const noexcept { return line_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t line_;
    std::string detail_;
};

}  // namespace botflow
