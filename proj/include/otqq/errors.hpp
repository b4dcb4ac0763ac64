#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace otqq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t expected, std::size_t got)
      : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
              std::to_string(got)),
        expected_(expected),
        got_(got) {}
  std::size_t expected() const noexcept { return expected_; }
  std::size_t got() const noexcept { return got_; }

 private:
  std::size_t expected_;
  std::size_t got_;
};

class ConstantColumn : public Error {
 public:
  explicit ConstantColumn(std::size_t index)
      : Error("column " + std::to_string(index) + " has zero standard deviation"),
        index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class EmptyRestriction : public Error {
 public:
  EmptyRestriction() : Error("no point lies inside the region") {}
};

class BadSpec : public Error {
 public:
  using Error::Error;
};

class NonSquare : public Error {
 public:
  NonSquare(std::size_t rows, std::size_t cols)
      : Error("assignment needs a square cost matrix, got " + std::to_string(rows) + "x" +
              std::to_string(cols)) {}
};

class InfeasibleDuals : public Error {
 public:
  using Error::Error;
};

class NumericalOverflow : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class DegenerateFit : public Error {
 public:
  DegenerateFit() : Error("all x values are equal; slope is undefined") {}
};

class NotConverged : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& reason)
      : Error("parse error at line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + reason),
        line_(line),
        column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class RaggedRows : public Error {
 public:
  explicit RaggedRows(std::size_t line)
      : Error("row at line " + std::to_string(line) + " has a different field count"),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& path) : Error("i/o failure on " + path), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Wraps an error raised inside a pipeline stage with the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace otqq
