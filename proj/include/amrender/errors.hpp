// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace amrender {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point or index fell outside the domain it must live in.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A caller-supplied argument violates an operation's precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A requested field name is not declared by the dataset.
class UnknownFieldError : public ArgumentError {
 public:
  explicit UnknownFieldError(const std::string& name)
      : ArgumentError("unknown field '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// A render request asks for more pixels than the configured budget.
class BudgetError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// Filesystem failure (open, write, short write).
class IoError : public Error {
 public:
  using Error::Error;
};

/// PAMR/FMAP header with the wrong magic, version or dimension.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Truncated or oversized payload; record counts disagree with the header.
class CorruptionError : public Error {
 public:
  using Error::Error;
};

/// Records describe an invalid octree (incomplete child set, orphan records).
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A work unit failed inside the worker pool.
class WorkUnitError : public Error {
 public:
  WorkUnitError(std::int64_t unit_id, const std::string& what)
      : Error("work unit " + std::to_string(unit_id) + " failed: " + what),
        unit_id_(unit_id) {}
  std::int64_t unit_id() const { return unit_id_; }

 private:
  std::int64_t unit_id_;
};

}  // namespace amrender
