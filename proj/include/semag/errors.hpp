#pragma once

#include <stdexcept>
#include <string>

namespace semag {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dataset record does not match its schema. The message names the field.
class ParseError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

// The sandbox could not start a child process. Never used for candidate failures.
class InfrastructureError : public Error {
public:
    using Error::Error;
};

// Transport failure after the retry budget was spent.
class BackendError : public Error {
public:
    using Error::Error;
};

class TemplateError : public Error {
public:
    using Error::Error;
};

class ExtractionError : public Error {
public:
    ExtractionError(const std::string& what, std::string raw)
        : Error(what), raw_(std::move(raw)) {}

    const std::string& raw() const noexcept { return raw_; }

private:
    std::string raw_;
};

} // namespace semag
