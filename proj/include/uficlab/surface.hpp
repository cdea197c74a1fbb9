#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uficlab/config.hpp"
#include "uficlab/dynamics.hpp"
#include "uficlab/types.hpp"

namespace uficlab {

enum class SurfaceKind { planar, inclined, curved, heightfield };

SurfaceKind surface_kind_from_string(const std::string& s);
std::string to_string(SurfaceKind k);

/// Axis-aligned (u,v) rectangle where the surface material is absent.
struct GapRegion {
  double u_min = 0, u_max = 0, v_min = 0, v_max = 0;
  bool contains(double u, double v) const {
    return u >= u_min && u <= u_max && v >= v_min && v <= v_max;
  }
};

/// Instantaneous contact between the end-effector point and a surface.
struct ContactState {
  bool in_contact = false;
  double penetration = 0.0;          // m, along the surface normal
  Vec3 normal = Vec3::UnitZ();       // outward unit normal at the contact
  Vec6 f_ext = Vec6::Zero();         // wrench on the robot, base frame; torque-free
};

/// Graph surface z = h(u,v) over base-frame (u,v) = (x,y), with penalty contact.
/// Heights and normals are analytic; the gap region only suppresses contact,
/// geometry queries still evaluate the underlying h there.
class SurfaceModel {
public:
  SurfaceKind kind = SurfaceKind::planar;
  double mu = 0.4;                 // in (0, 1]
  double k_n = 1e4;                // N/m
  double b_n = 50.0;               // N·s/m
  double amplitude = 0.02;         // curved: h = A sin(ωu) cos(ωv)
  double frequency = 10.0;         // rad/m
  double incline_grade = 0.2;      // inclined: h = grade·u
  std::vector<double> poly;        // heightfield: cubic bivariate coefficients (10)
  std::optional<GapRegion> gap;
  double workspace = 0.5;          // |u|,|v| bound, m
  double v_reg = 1e-3;             // friction regularization velocity, m/s
  std::string id = "surface";

  /// Reads keys kind, mu, k_n, b_n, amplitude, frequency, incline_grade,
  /// gap_u_min/max, gap_v_min/max (and workspace, v_reg, poly) under `prefix`.
  static SurfaceModel from_config(const Config& cfg, const std::string& prefix = "surface.");
  void validate() const;  // throws ConfigError on invariant violations

  bool in_workspace(double u, double v) const {
    return std::abs(u) <= workspace && std::abs(v) <= workspace;
  }

  double height(double u, double v) const;
  /// (∂h/∂u, ∂h/∂v), analytic.
  Eigen::Vector2d gradient(double u, double v) const;

  /// Height and outward unit normal; throws DomainError outside the workspace.
  std::pair<double, Vec3> eval(double u, double v) const;

  /// Penalty contact: f_n = max(0, k_n·δ − b_n·(v·n)) along the normal,
  /// tangential Coulomb friction regularized by tanh(‖v_t‖/v_reg).
  /// Total over finite states: off-workspace or in-gap positions give no contact.
  ContactState contact(const Vec3& position, const Vec3& velocity) const;
  ContactState contact(const RobotState& state) const {
    return contact(state.x.head<3>(), state.x_dot.head<3>());
  }
};

}  // namespace uficlab
