#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace varilab {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr double kPi = 3.14159265358979323846;

// Error taxonomy shared by all modules. The CLI maps kinds to exit codes:
// invalid input -> 2, numeric failure -> 3, out-of-hypothesis abort -> 4.
enum class ErrorKind {
  DegenerateFace,
  InvalidIndex,
  NonPositiveMultiplicity,
  InvalidSpec,
  NoReference,
  ZeroDirection,
  GridTooSmall,
  IoError,
  ConfigError,
  NumericFailure,
  SolverDiverged,
  DegenerateFit,
  ExcisionTooLarge,
  PoleOnMesh,
  LiYauViolation,
  HypothesisViolated,
  PlaneThroughPole,
  CoverageGap,
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::DegenerateFace: return "DegenerateFace";
    case ErrorKind::InvalidIndex: return "InvalidIndex";
    case ErrorKind::NonPositiveMultiplicity: return "NonPositiveMultiplicity";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::NoReference: return "NoReference";
    case ErrorKind::ZeroDirection: return "ZeroDirection";
    case ErrorKind::GridTooSmall: return "GridTooSmall";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::NumericFailure: return "NumericFailure";
    case ErrorKind::SolverDiverged: return "SolverDiverged";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::ExcisionTooLarge: return "ExcisionTooLarge";
    case ErrorKind::PoleOnMesh: return "PoleOnMesh";
    case ErrorKind::LiYauViolation: return "LiYauViolation";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::PlaneThroughPole: return "PlaneThroughPole";
    case ErrorKind::CoverageGap: return "CoverageGap";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// 0 = ok, 2 = invalid input/config, 3 = numeric failure,
// 4 = out-of-hypothesis abort (expected for extremal inputs).
inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::HypothesisViolated:
    case ErrorKind::PlaneThroughPole:
    case ErrorKind::CoverageGap:
      return 4;
    case ErrorKind::NumericFailure:
    case ErrorKind::SolverDiverged:
    case ErrorKind::DegenerateFit:
    case ErrorKind::LiYauViolation:
      return 3;
    default:
      return 2;
  }
}

// Neumaier compensated accumulator. All measure/energy reductions go through
// this so results do not depend on summation chunking.
class KahanSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// FNV-1a over raw bytes; used for mesh provenance hashes.
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 1469598103934665603ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace varilab
