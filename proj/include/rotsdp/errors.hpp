#pragma once

#include <stdexcept>
#include <string>

namespace rotsdp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// rotation domains
struct KindMismatch : Error {
  using Error::Error;
};
struct DegenerateInput : Error {
  using Error::Error;
};
struct InvalidQuaternion : Error {
  using Error::Error;
};
struct SingularPoint : Error {
  using Error::Error;
};

// problem builders
struct TranslationUnobservable : Error {
  using Error::Error;
};

// solver / certificates
struct CertificateInvalid : Error {
  using Error::Error;
};

// analysis
struct NotPSD : Error {
  using Error::Error;
};
struct RoundingDegenerate : Error {
  using Error::Error;
};
struct OracleUnavailable : Error {
  using Error::Error;
};

// counterexample synthesis
struct InsufficientRealIntersections : Error {
  using Error::Error;
};
struct SamplingFailed : Error {
  using Error::Error;
};
struct DegenerateSelection : Error {
  using Error::Error;
};
struct NoStructuredM0 : Error {
  using Error::Error;
};
struct AssemblyFailed : Error {
  using Error::Error;
};
struct FitFailed : Error {
  using Error::Error;
};

// experiment harness
struct IoError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace rotsdp
