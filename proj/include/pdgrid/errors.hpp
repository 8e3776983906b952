#pragma once

#include <stdexcept>
#include <string>

namespace pdgrid {

// Base of every error raised by the library. Callers that only need to
// distinguish "bad input" from "bug" can catch this and ValidationError.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed user input: files, configs, command-line values.
class ValidationError : public Error {
public:
    using Error::Error;
};

class DegenerateEdge : public Error {
public:
    using Error::Error;
};

class DegenerateFace : public Error {
public:
    using Error::Error;
};

class DegenerateCell : public Error {
public:
    using Error::Error;
};

class GeometryError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class OutOfDomain : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    using Error::Error;
};

class Antipodal : public Error {
public:
    using Error::Error;
};

class InvalidFlip : public Error {
public:
    using Error::Error;
};

class NonTermination : public Error {
public:
    using Error::Error;
};

class EmptyStar : public Error {
public:
    using Error::Error;
};

// Parse failure with file/line context baked into the message.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& file, int line, const std::string& what)
        : ValidationError(file + ":" + std::to_string(line) + ": " + what)
    {}
};

} // namespace pdgrid
