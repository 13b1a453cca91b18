#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace morph {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownSymbol : public Error {
 public:
  UnknownSymbol(std::string symbol, std::size_t offset)
      : Error("unknown symbol '" + symbol + "' at offset " + std::to_string(offset)),
        symbol_(std::move(symbol)),
        offset_(offset) {}
  /// Same, located in row `row` of a data file.
  UnknownSymbol(std::string symbol, std::size_t offset, std::size_t row)
      : Error("row " + std::to_string(row) + ": unknown symbol '" + symbol + "' at offset " + std::to_string(offset)),
        symbol_(std::move(symbol)),
        offset_(offset),
        row_(row) {}

  const std::string& symbol() const { return symbol_; }
  /// Offset in code points from the start of the input.
  std::size_t offset() const { return offset_; }
  std::optional<std::size_t> row() const { return row_; }

 private:
  std::string symbol_;
  std::size_t offset_;
  std::optional<std::size_t> row_;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NotScalar : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& reason)
      : Error("row " + std::to_string(row) + ": " + reason), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class EmptyCandidates : public Error {
 public:
  EmptyCandidates() : Error("candidate set is empty") {}
};

class EmptyContext : public Error {
 public:
  EmptyContext() : Error("attention over an empty context") {}
};

class EmptyDataset : public Error {
 public:
  EmptyDataset() : Error("dataset is empty") {}
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class DegenerateTable : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace morph
