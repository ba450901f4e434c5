#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rfprox {

// Base of every error raised by the library. Subclasses carry the condition
// name so callers can dispatch on type; the message is for humans.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input (files, schemas, datasets, parameters).
class InputError : public Error {
 public:
  using Error::Error;
};

class MissingColumn : public InputError {
 public:
  explicit MissingColumn(const std::string& column)
      : InputError("missing column '" + column + "'"), column_(column) {}
  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

// Row and column are zero-based; the row excludes the header.
class UnparsableCell : public InputError {
 public:
  UnparsableCell(std::size_t row, std::size_t col, const std::string& text)
      : InputError("cannot parse cell (data row " + std::to_string(row) + ", column " +
                   std::to_string(col) + "): '" + text + "'"),
        row_(row),
        col_(col) {}
  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

class EmptyFile : public InputError {
 public:
  explicit EmptyFile(const std::string& path) : InputError("no data rows in '" + path + "'") {}
};

class InvalidSchema : public InputError {
 public:
  using InputError::InputError;
};

class MissingValues : public InputError {
 public:
  MissingValues() : InputError("dataset contains missing cells; impute before training") {}
};

// Raised when a per-class precondition fails. `class_id` is the offending class.
class ClassError : public InputError {
 public:
  ClassError(const std::string& what, int class_id)
      : InputError(what + " (class " + std::to_string(class_id) + ")"), class_id_(class_id) {}
  int class_id() const { return class_id_; }

 private:
  int class_id_;
};

class ClassTooSmall : public ClassError {
 public:
  explicit ClassTooSmall(int class_id) : ClassError("class needs at least 2 records", class_id) {}
};

class ClassSmallerThanK : public ClassError {
 public:
  ClassSmallerThanK(int class_id, int k)
      : ClassError("class has fewer records than folds (k=" + std::to_string(k) + ")", class_id) {}
};

class AbsentClass : public ClassError {
 public:
  explicit AbsentClass(int class_id) : ClassError("class has no records", class_id) {}
};

class EmptyClass : public ClassError {
 public:
  explicit EmptyClass(int class_id) : ClassError("class is empty", class_id) {}
};

class SingletonOwnClass : public ClassError {
 public:
  explicit SingletonOwnClass(int class_id)
      : ClassError("record is the only member of its own class", class_id) {}
};

class UnknownClass : public InputError {
 public:
  explicit UnknownClass(const std::string& name) : InputError("unknown class '" + name + "'") {}
};

class InvalidSpec : public InputError {
 public:
  using InputError::InputError;
};

class InvalidParams : public InputError {
 public:
  using InputError::InputError;
};

class SingleClassInput : public InputError {
 public:
  SingleClassInput() : InputError("training data must contain at least two classes") {}
};

class SchemaMismatch : public InputError {
 public:
  using InputError::InputError;
};

class TooLarge : public InputError {
 public:
  TooLarge(std::size_t n, std::size_t limit)
      : InputError("n=" + std::to_string(n) + " exceeds limit " + std::to_string(limit)) {}
};

class LengthMismatch : public InputError {
 public:
  LengthMismatch(std::size_t a, std::size_t b)
      : InputError("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class InvalidProbabilities : public InputError {
 public:
  using InputError::InputError;
};

class ConstantX : public InputError {
 public:
  ConstantX() : InputError("independent variable is constant") {}
};

class TooShort : public InputError {
 public:
  explicit TooShort(std::size_t n) : InputError("series too short: " + std::to_string(n)) {}
};

class EmptyInput : public InputError {
 public:
  EmptyInput() : InputError("empty input") {}
};

class NotSymmetric : public InputError {
 public:
  NotSymmetric(std::size_t i, std::size_t j)
      : InputError("distance matrix not symmetric at (" + std::to_string(i) + ", " +
                   std::to_string(j) + ")") {}
  explicit NotSymmetric(const std::string& what) : InputError(what) {}
};

class NonzeroDiagonal : public InputError {
 public:
  explicit NonzeroDiagonal(std::size_t i)
      : InputError("distance matrix has nonzero diagonal at " + std::to_string(i)) {}
};

class MissingReturns : public InputError {
 public:
  explicit MissingReturns(std::size_t record_id)
      : InputError("no returns for record " + std::to_string(record_id)) {}
};

class MissingArtifacts : public InputError {
 public:
  using InputError::InputError;
};

class FormatError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace rfprox
