// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace amgs {

enum class ErrorKind {
    io,
    parse,
    validation,
    sampling,
    encoding,
    numerical,
    inner_loop,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Base exception for every failure raised by the library. `kind()` gives the
/// machine-readable category used by the CLI error line.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error(ErrorKind::io, message) {}
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& message)
        : Error(ErrorKind::parse, "line " + std::to_string(line) + ": " + message), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message) : Error(ErrorKind::validation, message) {}
};

class SamplingError : public Error {
public:
    explicit SamplingError(const std::string& message) : Error(ErrorKind::sampling, message) {}
};

class EncodingError : public Error {
public:
    explicit EncodingError(const std::string& message) : Error(ErrorKind::encoding, message) {}
};

class NumericalError : public Error {
public:
    NumericalError(std::string block, const std::string& message)
        : Error(ErrorKind::numerical, message), block_(std::move(block)) {}

    const std::string& block() const noexcept { return block_; }

private:
    std::string block_;
};

/// Raised when the inner adaptation loop produces a non-finite loss.
class InnerLoopError : public Error {
public:
    InnerLoopError(int step, const std::string& message)
        : Error(ErrorKind::inner_loop, "inner step " + std::to_string(step) + ": " + message), step_(step) {}

    int step() const noexcept { return step_; }

private:
    int step_;
};

}  // namespace amgs
