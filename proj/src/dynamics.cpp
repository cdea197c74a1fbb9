#include "uficlab/dynamics.hpp"

#include <Eigen/Eigenvalues>

namespace uficlab {

RobotState make_robot_state(const Mat6& M_C, const Mat6& D_C, const Vec6& f_g) {
  if (!M_C.isApprox(M_C.transpose(), 1e-10))
    throw DomainError("inertia matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat6> es_m(M_C);
  if (es_m.eigenvalues().minCoeff() <= 0.0)
    throw DomainError("inertia matrix must be positive definite");
  Eigen::SelfAdjointEigenSolver<Mat6> es_d(0.5 * (D_C + D_C.transpose()));
  if (es_d.eigenvalues().minCoeff() < -1e-12)
    throw DomainError("damping matrix must be positive semidefinite");
  RobotState s;
  s.M_C = M_C;
  s.D_C = D_C;
  s.f_g = f_g;
  s.M_inv = M_C.inverse();
  return s;
}

RobotState step_dynamics(const RobotState& state, const Vec6& f_robot, const Vec6& f_ext,
                         double dt, long step) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  const Vec6 accel =
      state.M_inv * (f_robot + f_ext - state.D_C * state.x_dot - state.f_g);
  if (!accel.allFinite())
    throw SimulationFault("non-finite acceleration", step);
  RobotState next = state;
  next.x_dot = state.x_dot + accel * dt;
  next.x = state.x + next.x_dot * dt;
  if (!next.x.allFinite() || !next.x_dot.allFinite())
    throw SimulationFault("non-finite state", step);
  return next;
}

double kinetic_energy(const RobotState& state) {
  return 0.5 * state.x_dot.dot(state.M_C * state.x_dot);
}

}  // namespace uficlab
