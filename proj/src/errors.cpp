#include "semiclassical/errors.hpp"

namespace semiclassical {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::OutOfDomain: return "out-of-domain";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InvalidHorizon: return "invalid-horizon";
    case ErrorKind::Singularity: return "singularity";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::Stability: return "stability";
    case ErrorKind::TemporalResolution: return "temporal-resolution";
    case ErrorKind::Resolution: return "resolution";
    case ErrorKind::BoundaryBreach: return "boundary-breach";
    case ErrorKind::DegenerateState: return "degenerate-state";
    case ErrorKind::Sampling: return "sampling";
    case ErrorKind::StatisticalPower: return "statistical-power";
    case ErrorKind::DomainSize: return "domain-size";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace semiclassical
