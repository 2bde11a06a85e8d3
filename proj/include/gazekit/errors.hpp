#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gazekit {

// Base for all library errors. Subclasses carry no state beyond the message
// unless noted; the class itself is the error code.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Parse errors carry the 1-based data-row number when known (-1 otherwise).
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::int64_t row = -1)
      : Error(row >= 0 ? "row " + std::to_string(row) + ": " + msg : msg),
        row(row) {}
  std::int64_t row;
};

class FormatError : public ParseError {
 public:
  using ParseError::ParseError;
};

class OrderError : public ParseError {
 public:
  using ParseError::ParseError;
};

class RangeError : public ParseError {
 public:
  using ParseError::ParseError;
};

class TaxonomyError : public ParseError {
 public:
  using ParseError::ParseError;
};

class EmptyLabels : public ParseError {
 public:
  using ParseError::ParseError;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class CropTooLarge : public Error {
 public:
  using Error::Error;
};

class InvalidSize : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class EmptyCache : public Error {
 public:
  using Error::Error;
};

class KindError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& msg, int epoch)
      : Error(msg + " at epoch " + std::to_string(epoch)), epoch(epoch) {}
  int epoch;
};

class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

class AlignmentError : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class BenchAborted : public Error {
 public:
  using Error::Error;
};

class PipelineError : public Error {
 public:
  using Error::Error;
};

class SpecError : public Error {
 public:
  using Error::Error;
};

}  // namespace gazekit
