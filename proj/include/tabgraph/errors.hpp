#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tabgraph {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// canonical model
class EmptyColumn : public Error {
 public:
  EmptyColumn() : Error("distinct_ratio: column is empty") {}
};

class NotAList : public Error {
 public:
  NotAList() : Error("list_as_table: input is not a list") {}
};

class InvalidTable : public Error {
 public:
  using Error::Error;
};

// extraction
class NoTableFound : public Error {
 public:
  NoTableFound() : Error("no table element found in fragment") {}
};

class EmptyTable : public Error {
 public:
  EmptyTable() : Error("table has zero data rows after cleaning") {}
};

class NoListFound : public Error {
 public:
  NoListFound() : Error("no list element found in fragment") {}
};

class EmptyList : public Error {
 public:
  EmptyList() : Error("list has no non-blank items") {}
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// numerics
class ShapeError : public Error {
 public:
  using Error::Error;
};

class NoNeighbors : public Error {
 public:
  explicit NoNeighbors(std::size_t node)
      : Error("node " + std::to_string(node) + " has no neighbors to pool") {}
};

class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace tabgraph
