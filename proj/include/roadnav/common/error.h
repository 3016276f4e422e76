#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace roadnav {

// All library failures derive from Error so callers (the CLI in particular)
// can map them onto exit codes without knowing every module.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class InvalidShape : public Error {
 public:
  using Error::Error;
};

class SpecViolation : public Error {
 public:
  using Error::Error;
};

class IncompatibleWeights : public Error {
 public:
  using Error::Error;
};

class CorruptFile : public Error {
 public:
  using Error::Error;
};

class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

class InvalidRoute : public Error {
 public:
  using Error::Error;
};

class OutOfWorld : public Error {
 public:
  using Error::Error;
};

class OracleOffRoad : public Error {
 public:
  using Error::Error;
};

class InvalidSplit : public Error {
 public:
  using Error::Error;
};

class StaleCache : public Error {
 public:
  using Error::Error;
};

// Parse failure tied to a specific record of a multi-record file.
class ParseError : public Error {
 public:
  ParseError(std::size_t record, const std::string& what)
      : Error("record " + std::to_string(record) + ": " + what),
        record_(record) {}

  std::size_t record() const { return record_; }

 private:
  std::size_t record_;
};

class TimestampRegression : public ParseError {
 public:
  using ParseError::ParseError;
};

}  // namespace roadnav
