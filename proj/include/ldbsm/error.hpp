// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace ldbsm {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A variable or unknown had no value in an evaluation.
class BindingError : public Error {
public:
  explicit BindingError(const std::string& id)
      : Error("no binding for '" + id + "'"), id_(id) {}
  const std::string& id() const { return id_; }

private:
  std::string id_;
};

class ParseError : public Error {
public:
  ParseError(const std::string& what, int line, int column)
      : Error(format(what, line, column)), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

private:
  static std::string format(const std::string& what, int line, int column) {
    if (line <= 0) return "parse error: " + what;
    return "parse error at " + std::to_string(line) + ":" + std::to_string(column) + ": " + what;
  }
  int line_;
  int column_;
};

class DegreeError : public Error {
  using Error::Error;
};
class CapacityError : public Error {
  using Error::Error;
};
class EncodingError : public Error {
  using Error::Error;
};
class ReductionError : public Error {
  using Error::Error;
};
class DomainError : public Error {
  using Error::Error;
};
class ConfigError : public Error {
  using Error::Error;
};
class ModelError : public Error {
  using Error::Error;
};
/// The noise family cannot be sampled (explicit moments only).
class SimulationError : public Error {
  using Error::Error;
};

} // namespace ldbsm
