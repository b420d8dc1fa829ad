#include "dflow/error.hpp"

namespace dflow {

const char* error_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::GridMismatch: return "grid mismatch";
    case ErrorKind::PositivityFloor: return "positivity floor violated";
    case ErrorKind::FormsDisagree: return "forms disagree";
    case ErrorKind::TooFewSamples: return "too few samples";
    case ErrorKind::Vacuum: return "vacuum";
    case ErrorKind::ShockImminent: return "shock imminent";
    case ErrorKind::SinkhornDiverged: return "sinkhorn diverged";
    case ErrorKind::DegenerateMarginals: return "degenerate marginals";
    case ErrorKind::PicardStalled: return "picard stalled";
    case ErrorKind::HjbOverflow: return "HJB overflow";
    case ErrorKind::Config: return "config error";
    case ErrorKind::Io: return "io error";
  }
  return "error";
}

bool is_construction_failure(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Vacuum:
    case ErrorKind::ShockImminent:
    case ErrorKind::SinkhornDiverged:
    case ErrorKind::DegenerateMarginals:
    case ErrorKind::PicardStalled:
    case ErrorKind::HjbOverflow:
    case ErrorKind::PositivityFloor:
    case ErrorKind::FormsDisagree:
      return true;
    default:
      return false;
  }
}

}  // namespace dflow
