#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace squit {

// Base of every error the library throws. The CLI maps IoError to exit
// status 2 and everything else to 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A record that parsed but violates the dump schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// Violated precondition of an operation.
class ContractError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Live endpoint errors.
class RetryableError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

class StatusError : public Error {
 public:
  StatusError(int status, const std::string& what)
      : Error("HTTP " + std::to_string(status) + ": " + what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

}  // namespace squit
