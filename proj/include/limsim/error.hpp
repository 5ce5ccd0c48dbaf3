#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace limsim {

/// Root of every error thrown by the simulator.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid object construction (e.g. a zero-sized crossbar).
class ConstructionError : public Error {
public:
    using Error::Error;
};

/// Cell coordinates out of bounds or colliding.
class AddressError : public Error {
public:
    using Error::Error;
};

/// Operation not allowed in the object's current state.
class StateError : public Error {
public:
    using Error::Error;
};

/// (family, gate) pair with no implementation.
class UnsupportedGateError : public Error {
public:
    using Error::Error;
};

/// Not enough crossbar rows or columns for the requested work.
class CapacityError : public Error {
public:
    using Error::Error;
};

class MappingError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

/// Model and instruction stream disagree.
class LinkageError : public Error {
public:
    using Error::Error;
};

/// Aggregation over an empty set or a value outside its domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Model document violates the schema. `path()` names the offending node.
class ValidationError : public Error {
public:
    ValidationError(std::string path, const std::string& what)
        : Error(path + ": " + what), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Malformed binary input; `offset()` is the byte position of the problem.
class ParseError : public Error {
public:
    ParseError(std::size_t offset, const std::string& what)
        : Error("offset " + std::to_string(offset) + ": " + what), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

}  // namespace limsim
