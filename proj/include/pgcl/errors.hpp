#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pgcl {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class EvalError : public Error {
 public:
  using Error::Error;
};

class UnboundVariable : public EvalError {
 public:
  explicit UnboundVariable(const std::string& name)
      : EvalError("unbound variable '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class DivisionByZero : public EvalError {
 public:
  DivisionByZero() : EvalError("division by zero") {}
};

class NegativeValue : public EvalError {
 public:
  using EvalError::EvalError;
};

class Unsupported : public Error {
 public:
  using Error::Error;
};

class InfiniteReward : public Error {
 public:
  using Error::Error;
};

class GuardMismatch : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace pgcl
