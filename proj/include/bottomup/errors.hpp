// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "bottomup/exchange.hpp"

namespace bottomup {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Scene graphs.
class NoJsonFound : public Error {
public:
    NoJsonFound() : Error("no balanced JSON brace block found in reply") {}
};

class SchemaMismatch : public Error {
public:
    using Error::Error;
};

class InvalidGraph : public Error {
public:
    using Error::Error;
};

class DanglingEndpoint : public Error {
public:
    using Error::Error;
};

// Backends.
class InvalidRequest : public Error {
public:
    using Error::Error;
};

class TransportError : public Error {
public:
    using Error::Error;
};

class BackendError : public Error {
public:
    BackendError(int status, std::string body)
        : Error("backend returned status " + std::to_string(status) + ": " + body),
          status_(status), body_(std::move(body)) {}

    int status() const { return status_; }
    const std::string& body() const { return body_; }

private:
    int status_;
    std::string body_;
};

class ReplyEmpty : public Error {
public:
    ReplyEmpty() : Error("chat backend returned an empty reply") {}
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

class SearchUnavailable : public Error {
public:
    using Error::Error;
};

class ReplayMiss : public Error {
public:
    ReplayMiss(const std::string& kind, const std::string& digest)
        : Error("no recorded " + kind + " response for request " + digest), digest_(digest) {}

    const std::string& digest() const { return digest_; }

private:
    std::string digest_;
};

class StoreCorrupt : public Error {
public:
    using Error::Error;
};

// Prompts and stages.
class MissingSlot : public Error {
public:
    explicit MissingSlot(std::vector<std::string> names);
    const std::vector<std::string>& names() const { return names_; }

private:
    std::vector<std::string> names_;
};

class UnknownSlot : public Error {
public:
    explicit UnknownSlot(std::vector<std::string> names);
    const std::vector<std::string>& names() const { return names_; }

private:
    std::vector<std::string> names_;
};

class InvalidTemplate : public Error {
public:
    using Error::Error;
};

class PerceptionFailed : public Error {
public:
    PerceptionFailed(std::string message, std::vector<Exchange> exchanges, std::vector<std::string> attempt_errors)
        : Error(std::move(message)), exchanges_(std::move(exchanges)), attempt_errors_(std::move(attempt_errors)) {}

    int attempts() const { return static_cast<int>(exchanges_.size()); }
    const std::vector<Exchange>& exchanges() const { return exchanges_; }
    const std::vector<std::string>& attempt_errors() const { return attempt_errors_; }

private:
    std::vector<Exchange> exchanges_;
    std::vector<std::string> attempt_errors_;
};

class GuardParseError : public Error {
public:
    using Error::Error;
};

// Configuration, evaluation, IO.
class ConfigError : public Error {
public:
    using Error::Error;
};

class DatasetError : public Error {
public:
    DatasetError(std::size_t line, const std::string& reason)
        : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class LengthMismatch : public Error {
public:
    LengthMismatch(std::size_t a, std::size_t b)
        : Error("length mismatch: " + std::to_string(a) + " predictions vs " +
                std::to_string(b) + " gold labels") {}
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace bottomup
