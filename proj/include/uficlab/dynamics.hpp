#pragma once

#include "uficlab/types.hpp"

namespace uficlab {

/// End-effector state plus its constant Cartesian plant parameters.
/// x = (position, small-angle rotation vector); x_dot the matching twist.
struct RobotState {
  Vec6 x = Vec6::Zero();
  Vec6 x_dot = Vec6::Zero();
  Mat6 M_C = Mat6::Identity();   // symmetric positive definite
  Mat6 D_C = Mat6::Zero();       // positive semidefinite plant damping
  Vec6 f_g = Vec6::Zero();       // gravity wrench; f_robot always contains it
  Mat6 M_inv = Mat6::Identity();
};

/// Validates SPD/PSD structure and caches M_inv. Throws DomainError.
RobotState make_robot_state(const Mat6& M_C, const Mat6& D_C, const Vec6& f_g);

/// One semi-implicit Euler step of M ẍ = f_robot + f_ext − D ẋ − f_g
/// (constant M, so no Coriolis term): ẋ += M⁻¹(...)·dt, then x += ẋ·dt.
/// Throws SimulationFault on non-finite acceleration; `step` tags diagnostics.
RobotState step_dynamics(const RobotState& state, const Vec6& f_robot, const Vec6& f_ext,
                         double dt, long step = -1);

/// ½ ẋᵀ M ẋ, the storage function of the plant.
double kinetic_energy(const RobotState& state);

}  // namespace uficlab
