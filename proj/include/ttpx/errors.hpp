#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ttpx {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed technique ID text.
class GrammarError : public Error {
public:
    explicit GrammarError(const std::string& raw)
        : Error("invalid technique id '" + raw + "'"), raw_(raw) {}
    const std::string& raw() const noexcept { return raw_; }

private:
    std::string raw_;
};

// Well-formed ID that the catalog does not know (strict mode).
class UnknownIdError : public Error {
public:
    explicit UnknownIdError(const std::string& id)
        : Error("unknown technique id '" + id + "'"), id_(id) {}
    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

// File could not be parsed in its declared format. Line is 1-based, 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Data parsed but violates a cross-record invariant.
class IntegrityError : public Error {
public:
    IntegrityError(const std::string& what, std::vector<std::string> offenders)
        : Error(what), offenders_(std::move(offenders)) {}
    const std::vector<std::string>& offenders() const noexcept { return offenders_; }

private:
    std::vector<std::string> offenders_;
};

// A value violates a documented invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace ttpx
