#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace rotent {

enum class ErrorCode {
  InvalidArgument,
  EmptyLetter,
  BadTheta,
  CapExceeded,
  CycleCapExceeded,
  NotIrreducible,
  ToleranceUnreachable,
  NoConvergence,
  MissingWord,
  ExtraWord,
  NonFinite,
  DimensionMismatch,
  InadmissibleWord,
  EnclosureTooWide,
  NotTransitive,
  DegenerateRotationSet,
  NotCertified,
  EmptySelection,
  Divergence,
  ConstructionViolated,
  Parse,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  // Cap errors report the cap that would have been needed.
  static Error cap_exceeded(ErrorCode code, const std::string& what,
                            std::uint64_t required) {
    Error e(code, what + " (required cap " + std::to_string(required) + ")");
    e.required_cap_ = required;
    return e;
  }

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::uint64_t> required_cap() const noexcept {
    return required_cap_;
  }

 private:
  ErrorCode code_;
  std::optional<std::uint64_t> required_cap_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::EmptyLetter: return "empty letter";
    case ErrorCode::BadTheta: return "bad theta";
    case ErrorCode::CapExceeded: return "cap exceeded";
    case ErrorCode::CycleCapExceeded: return "cycle cap exceeded";
    case ErrorCode::NotIrreducible: return "not irreducible";
    case ErrorCode::ToleranceUnreachable: return "tolerance unreachable";
    case ErrorCode::NoConvergence: return "no convergence";
    case ErrorCode::MissingWord: return "missing word";
    case ErrorCode::ExtraWord: return "extra word";
    case ErrorCode::NonFinite: return "non-finite entry";
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::InadmissibleWord: return "inadmissible word";
    case ErrorCode::EnclosureTooWide: return "enclosure too wide";
    case ErrorCode::NotTransitive: return "not transitive";
    case ErrorCode::DegenerateRotationSet: return "degenerate rotation set";
    case ErrorCode::NotCertified: return "not certified";
    case ErrorCode::EmptySelection: return "ball does not meet interior image";
    case ErrorCode::Divergence: return "divergence";
    case ErrorCode::ConstructionViolated: return "construction violated";
    case ErrorCode::Parse: return "parse error";
  }
  return "unknown";
}

}  // namespace rotent
