#pragma once

#include <stdexcept>
#include <string>

namespace dflow {

enum class ErrorKind {
  InvalidArgument,
  GridMismatch,
  PositivityFloor,
  FormsDisagree,
  TooFewSamples,
  Vacuum,
  ShockImminent,
  SinkhornDiverged,
  DegenerateMarginals,
  PicardStalled,
  HjbOverflow,
  Config,
  Io,
};

const char* error_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_name(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// True for the failures a flow construction can raise at run time.
bool is_construction_failure(ErrorKind kind);

}  // namespace dflow
