#pragma once

#include <stdexcept>
#include <string>

namespace twinbeam {

/// Base class of every error raised by the toolkit. `stage()` names the
/// pipeline stage that failed so the CLI can report it.
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& what)
      : std::runtime_error(what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

#define TWINBEAM_DEFINE_ERROR(Name, Stage)                                  \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& what) : Error(Stage, what) {}         \
  }

// histogram_io
TWINBEAM_DEFINE_ERROR(FileNotFound, "input");
TWINBEAM_DEFINE_ERROR(ParseError, "input");
TWINBEAM_DEFINE_ERROR(DuplicateEntry, "input");
TWINBEAM_DEFINE_ERROR(EmptyHistogram, "input");
TWINBEAM_DEFINE_ERROR(IoError, "output");

// moments
TWINBEAM_DEFINE_ERROR(NegativeMeanAfterSubtraction, "dark-count subtraction");
TWINBEAM_DEFINE_ERROR(ZeroMeanArm, "baseline estimate");

// field_model
TWINBEAM_DEFINE_ERROR(SubPoissonianComponent, "field components from moments");
TWINBEAM_DEFINE_ERROR(CutoffOverflow, "joint photon-number distribution");

// detector_model
TWINBEAM_DEFINE_ERROR(NumericalInstability, "detector response");
TWINBEAM_DEFINE_ERROR(DimensionMismatch, "joint photocount distribution");

// calibrator
TWINBEAM_DEFINE_ERROR(InfeasiblePoint, "one-parameter field solution");
TWINBEAM_DEFINE_ERROR(NoFeasibleRegion, "declination minimization (no-feasible-region)");
TWINBEAM_DEFINE_ERROR(BootstrapFailure, "bootstrap uncertainty");

/// No paired signal in the data: a special case of an empty feasible region.
class NonpositiveCovariance : public NoFeasibleRegion {
 public:
  explicit NonpositiveCovariance(const std::string& what) : NoFeasibleRegion(what) {}
};

#undef TWINBEAM_DEFINE_ERROR

}  // namespace twinbeam
