#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hk {

// Numeric values are part of the C API contract (see hkpoho.h).
enum class ErrorCode : int {
  InvalidArgument = 1,
  Parse = 2,
  UnboundVariable = 3,
  EvaluationSingularity = 4,
  StepCapExceeded = 5,
  DegenerateTangent = 6,
  NotASolution = 7,
  NotDirichlet = 8,
  PreconditionViolated = 9,
  Config = 10,
  Io = 11,
  Internal = 12,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorCode::InvalidArgument, what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(ErrorCode::Parse, what + " (at offset " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class UnboundVariable : public Error {
 public:
  explicit UnboundVariable(const std::string& name)
      : Error(ErrorCode::UnboundVariable, "unbound variable '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

// Raised by evaluation of log at a non-positive argument, a fractional power
// of a negative base, or a negative power of zero. `node` carries the spatial
// point when the failure happened at a quadrature node.
class EvaluationSingularity : public Error {
 public:
  explicit EvaluationSingularity(const std::string& what, std::vector<double> node = {})
      : Error(ErrorCode::EvaluationSingularity, what), node_(std::move(node)) {}
  const std::vector<double>& node() const noexcept { return node_; }

 private:
  std::vector<double> node_;
};

class StepCapExceeded : public Error {
 public:
  explicit StepCapExceeded(int requested)
      : Error(ErrorCode::StepCapExceeded,
              "bracket length " + std::to_string(requested) + " exceeds the cap of 12") {}
};

class DegenerateTangent : public Error {
 public:
  explicit DegenerateTangent(const std::string& what) : Error(ErrorCode::DegenerateTangent, what) {}
};

// Carries the node where the offending quantity was largest.
class WitnessError : public Error {
 public:
  WitnessError(ErrorCode code, const std::string& what, std::vector<double> node, double value)
      : Error(code, what), node_(std::move(node)), value_(value) {}
  const std::vector<double>& node() const noexcept { return node_; }
  double value() const noexcept { return value_; }

 private:
  std::vector<double> node_;
  double value_;
};

class NotASolution : public WitnessError {
 public:
  NotASolution(const std::string& what, std::vector<double> node, double value)
      : WitnessError(ErrorCode::NotASolution, what, std::move(node), value) {}
};

class NotDirichlet : public WitnessError {
 public:
  NotDirichlet(const std::string& what, std::vector<double> node, double value)
      : WitnessError(ErrorCode::NotDirichlet, what, std::move(node), value) {}
};

class PreconditionViolated : public WitnessError {
 public:
  PreconditionViolated(const std::string& what, std::vector<double> node = {}, double value = 0.0)
      : WitnessError(ErrorCode::PreconditionViolated, what, std::move(node), value) {}
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0, std::string key = {})
      : Error(ErrorCode::Config, format(what, line, key)), line_(line), key_(std::move(key)) {}
  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  static std::string format(const std::string& what, int line, const std::string& key) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!key.empty()) out += "key '" + key + "': ";
    return out + what;
  }
  int line_;
  std::string key_;
};

}  // namespace hk
