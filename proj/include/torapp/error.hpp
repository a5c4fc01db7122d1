#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace torapp {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input is well-formed but not something we handle (magic, link type).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Input is malformed. `offset` is the byte position where parsing failed,
/// or npos when the failure is not positional.
class ParseError : public Error {
public:
    static constexpr std::uint64_t npos = ~std::uint64_t{0};

    ParseError(const std::string& what, std::uint64_t offset = npos)
        : Error(offset == npos ? what : what + " at byte offset " + std::to_string(offset)),
          offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

/// A caller violated a documented precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace torapp
