#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hairrec {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat34 = Eigen::Matrix<double, 3, 4>;  // affine transform, column 3 = translation

inline constexpr double kPi = std::numbers::pi;

enum class ErrorKind {
  Ingest,
  Validation,
  Argument,
  DegenerateGeometry,
  EmptyResult,
  RegistrationFailure,
  Convergence,
  Correspondence,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Ingest: return "ingest";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Argument: return "argument";
    case ErrorKind::DegenerateGeometry: return "degenerate-geometry";
    case ErrorKind::EmptyResult: return "empty-result";
    case ErrorKind::RegistrationFailure: return "registration-failure";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::Correspondence: return "correspondence";
    case ErrorKind::Io: return "io";
  }
  return "error";
}

// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

// Smallest absolute angular difference between two angles, in [0, pi].
inline double angle_distance(double a, double b) {
  return std::abs(wrap_angle(a - b));
}

inline Mat34 identity_transform() {
  Mat34 t = Mat34::Zero();
  t.block<3, 3>(0, 0) = Mat3::Identity();
  return t;
}

inline Vec3 apply_transform(const Mat34& t, const Vec3& p) {
  return t.block<3, 3>(0, 0) * p + t.col(3);
}

}  // namespace hairrec
