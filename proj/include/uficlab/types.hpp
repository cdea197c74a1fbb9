#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace uficlab {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Eigen::VectorXd;

inline constexpr double kDefaultDt = 1e-3;   // control/physics rate 1 kHz
inline constexpr double kGravity = 9.81;

/// Errors carrying a machine-checkable category next to the human message.
class Error : public std::runtime_error {
public:
  Error(std::string category, const std::string& msg)
      : std::runtime_error(msg), category_(std::move(category)) {}
  const std::string& category() const { return category_; }

private:
  std::string category_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error("config", msg) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& msg) : Error("domain", msg) {}
};
struct ParseError : Error {
  explicit ParseError(const std::string& msg) : Error("parse", msg), line_number(0) {}
  ParseError(const std::string& msg, long line)
      : Error("parse", msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
  long line_number;
};
struct ContractError : Error {
  explicit ContractError(const std::string& msg) : Error("contract", msg) {}
};
/// Non-finite state or force during integration; carries the failing step.
struct SimulationFault : Error {
  SimulationFault(const std::string& msg, long step)
      : Error("simulation", msg + " at step " + std::to_string(step)), step_index(step) {}
  long step_index;
};
struct TrainingFault : Error {
  TrainingFault(const std::string& msg, long sample)
      : Error("training", msg + " (sample " + std::to_string(sample) + ")"),
        sample_index(sample) {}
  long sample_index;
};

/// Rotation matrix from a rotation-vector (axis * angle), exact exponential map.
inline Mat3 rotation_from_vector(const Vec3& theta) {
  const double angle = theta.norm();
  if (angle < 1e-12) {
    Mat3 r = Mat3::Identity();
    r(0, 1) = -theta.z(); r(1, 0) = theta.z();
    r(0, 2) = theta.y();  r(2, 0) = -theta.y();
    r(1, 2) = -theta.x(); r(2, 1) = theta.x();
    return r;
  }
  return Eigen::AngleAxisd(angle, theta / angle).toRotationMatrix();
}

/// Applies blockdiag(R, R) to a wrench (force, torque halves rotated independently).
inline Vec6 rotate_wrench(const Mat3& r, const Vec6& w) {
  Vec6 out;
  out.head<3>() = r * w.head<3>();
  out.tail<3>() = r * w.tail<3>();
  return out;
}

}  // namespace uficlab
